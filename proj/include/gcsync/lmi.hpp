#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gcsync/numkit.hpp"

namespace gcsync::lmi {

/// Unknown matrix of an LMI problem.
struct MatVar {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    bool symmetric = true;
};

enum class Sense {
    NegativeDefinite,     // F < 0
    NegativeSemidefinite, // F <= 0
    PositiveDefinite,     // F > 0
    PositiveSemidefinite, // F >= 0
};

[[nodiscard]] constexpr bool is_strict(Sense s) {
    return s == Sense::NegativeDefinite || s == Sense::PositiveDefinite;
}
[[nodiscard]] constexpr bool is_negative(Sense s) {
    return s == Sense::NegativeDefinite || s == Sense::NegativeSemidefinite;
}

/// scale · left · X · right, or scale · left · Xᵀ · right when transpose is set.
/// left and right already embed the term into the full block dimension.
struct Term {
    Mat left;
    std::string var;
    bool transpose = false;
    Mat right;
    double scale = 1.0;
};

struct AffineBlock {
    std::string label;
    Mat constant;
    std::vector<Term> terms;
    Sense sense = Sense::NegativeDefinite;

    [[nodiscard]] std::size_t dim() const { return constant.rows(); }
};

/// Builds a partitioned symmetric block. Off-diagonal entries are mirrored
/// automatically, so callers only describe the upper triangle.
class BlockBuilder {
public:
    BlockBuilder(std::string label, std::vector<std::size_t> partition, Sense sense);

    /// Adds c at block (i, j) and cᵀ at (j, i) when i != j.
    BlockBuilder& constant(std::size_t i, std::size_t j, const Mat& c);
    /// Adds scale · left · X(ᵀ) · right at block (i, j) and the transpose at (j, i) when i != j.
    BlockBuilder& term(std::size_t i, std::size_t j, const Mat& left, const std::string& var, bool transpose,
                       const Mat& right, double scale = 1.0);
    /// For a diagonal block: adds left·X(ᵀ)·right plus its transpose (the "He" operator).
    BlockBuilder& sym_term(std::size_t i, const Mat& left, const std::string& var, bool transpose, const Mat& right,
                           double scale = 1.0);

    [[nodiscard]] AffineBlock build() const { return block_; }

private:
    Mat selector(std::size_t part) const;

    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> sizes_;
    AffineBlock block_;
};

/// Linear functional sum_k tr(weight_k · X_k).
struct TraceObjective {
    struct Entry {
        Mat weight;
        std::string var;
    };
    std::vector<Entry> entries;
};

struct LmiProblem {
    std::vector<MatVar> variables;
    std::vector<AffineBlock> blocks;
    std::optional<TraceObjective> objective;

    [[nodiscard]] const MatVar* find(const std::string& name) const;
};

using Assignment = std::map<std::string, Mat>;

struct SolverOptions {
    double margin = 1e-7;         // strict blocks must clear this eigenvalue margin
    double psd_tolerance = 1e-9;  // semidefinite blocks may dip this far
    double feasibility_radius = 1e3; // Euclidean bound on the vectorized variables
    double mu_initial = 1.0;
    double mu_factor = 5.0;
    double mu_final = 1e-9;
    int max_newton_steps = 200;
    // Cone complementarity iteration.
    int max_iters = 200;
    double delta = 1e-4;
};

enum class Status { Feasible, InfeasibleBestEffort, MaxIterations };
std::string_view to_string(Status s);

struct BlockMargin {
    std::string label;
    Sense sense;
    double extreme_eigenvalue = 0.0; // max for negative senses, min for positive ones
    bool satisfied = false;
};

struct FeasibilityResult {
    Status status = Status::InfeasibleBestEffort;
    Assignment assignment;
    std::vector<BlockMargin> margins;
    std::optional<double> objective_value;
    int newton_steps = 0;
};

struct Evaluation {
    Mat value;
    double margin = 0.0;
};

/// Assembles a block at the given assignment and reports its relevant extreme eigenvalue.
Evaluation evaluate(const AffineBlock& block, const Assignment& assignment);
bool block_satisfied(Sense sense, double extreme_eigenvalue, const SolverOptions& opts);
/// Independent re-check of every block through the definiteness test.
std::vector<BlockMargin> certify(const LmiProblem& p, const Assignment& a, const SolverOptions& opts);
double objective_value(const TraceObjective& obj, const Assignment& a);

FeasibilityResult solve_feasibility(const LmiProblem& p, const SolverOptions& opts = {});
/// Minimizes the trace objective. The result never has a larger objective than the start.
FeasibilityResult solve_min_trace(const LmiProblem& p, const SolverOptions& opts = {},
                                  const std::optional<Assignment>& start = std::nullopt);

struct CclIteration {
    int k = 0;
    double objective = 0.0;       // tr(Px_{k+1} Phat_k + Px_k Phat_{k+1})
    double coupling_trace = 0.0;  // tr(Px_{k+1} Phat_{k+1})
    double residual = 0.0;        // ||Px_{k+1} Phat_{k+1} - I||_F
};

struct CclResult {
    FeasibilityResult result;
    std::vector<CclIteration> history;
    bool converged = false;
};

struct CclCoupling {
    std::string x;
    std::string xhat;
};

/// Extra acceptance test run on a coupled iterate before stopping (returns true to stop).
using CclAccept = std::function<bool(const Assignment&)>;
using CclProgress = std::function<void(const CclIteration&)>;

/// Linearized trace minimization driving X·Xhat toward I under the Schur
/// block [[X, I], [I, Xhat]] >= 0 that p_core must already contain.
CclResult cone_complementarity(const LmiProblem& p_core, const CclCoupling& coupling, const SolverOptions& opts = {},
                               const CclAccept& accept = {}, const CclProgress& progress = {});

} // namespace gcsync::lmi
