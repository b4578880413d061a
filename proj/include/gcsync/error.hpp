#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gcsync {

enum class Errc {
    NotSymmetric,
    Singular,
    Overflow,
    ShapeMismatch,
    InvalidEdge,
    InvalidTopology,
    WrongKind,
    NotAdmissible,
    MissingVariable,
    IllPosed,
    NoFeasibleStart,
    Step1Infeasible,
    BadSpectrum,
    AgreementInitialStates,
    BudgetTooSmall,
    Infeasible,
    NotConverged,
    NumericalBlowup,
    InvalidConfig,
};

std::string_view to_string(Errc code);

// Single exception type for the library; callers switch on code().
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace gcsync
