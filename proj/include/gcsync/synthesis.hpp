#pragma once

#include <functional>
#include <vector>

#include "gcsync/lmi.hpp"
#include "gcsync/numkit.hpp"
#include "gcsync/topology.hpp"

namespace gcsync {

/// x' = A x + B u, y = C x for every agent.
struct AgentModel {
    Mat A; // n x n
    Mat B; // n x m
    Mat C; // d x n

    [[nodiscard]] std::size_t n() const { return A.rows(); }
    [[nodiscard]] std::size_t m() const { return B.cols(); }
    [[nodiscard]] std::size_t d() const { return C.rows(); }
    void validate() const;
    friend bool operator==(const AgentModel&, const AgentModel&) = default;
};

/// Weights of the energy term (R) and the synchronization regulation term (Q).
struct CostWeights {
    Mat Q; // n x n, symmetric positive definite
    Mat R; // m x m, symmetric positive definite
    void validate(const AgentModel& model) const;
    friend bool operator==(const CostWeights&, const CostWeights&) = default;
};

/// Protocol gains: u_j = Ku phi_j, and Kphi injects neighbour output errors.
struct ProtocolGains {
    Mat Ku;   // m x n
    Mat Kphi; // n x d
    void validate(const AgentModel& model) const;
    friend bool operator==(const ProtocolGains&, const ProtocolGains&) = default;
};

namespace var {
inline constexpr const char* Px = "Px";
inline constexpr const char* PhatX = "Phat_x";
inline constexpr const char* PhatPhi = "Phat_phi";
inline constexpr const char* KhatU = "Khat_u";
inline constexpr const char* Pphi = "Pphi";
} // namespace var

/// Stacked initial states x0 (N·n entries) as the quadratic form x0ᵀ(M ⊗ I_n)x0
/// with M the relationship matrix of the topology kind.
double budget_coefficient(std::span<const double> x0, TopologyKind kind, std::size_t agent_count);

/// x0ᵀ(M ⊗ Px)x0: the guaranteed cost certified by Px.
double cost_bound(std::span<const double> x0, TopologyKind kind, std::size_t agent_count, const Mat& Px);

/// Design LMIs over Px, Phat_x, Phat_phi, Khat_u (7 blocks). Only the extreme
/// nonzero eigenvalues enter. The same assembly serves leaderless and
/// leader-following networks.
lmi::LmiProblem assemble_design(const AgentModel& model, double lambda2, double lambdaN, const CostWeights& weights,
                                double gamma);

/// Analysis LMIs over Px, Pphi for fixed gains (5 blocks).
lmi::LmiProblem assemble_analysis(const AgentModel& model, double lambda2, double lambdaN, const CostWeights& weights,
                                  const ProtocolGains& gains, double gamma);

/// The analysis block at an arbitrary eigenvalue (used to check interior eigenvalues).
lmi::AffineBlock analysis_block(const AgentModel& model, double lambda, const CostWeights& weights,
                                const ProtocolGains& gains);

/// Controller half of the design for a fixed Kphi, over Px, Phat_phi, Khat_u
/// (the analysis blocks after congruence with diag(Pphi^{-1}, I, I)).
lmi::LmiProblem assemble_controller(const AgentModel& model, double lambda2, double lambdaN,
                                    const CostWeights& weights, const Mat& Kphi, double gamma);

ProtocolGains gain_extraction(const Mat& Khat_u, const Mat& Phat_phi, const Mat& Phat_x, const Mat& C);

struct AnalysisCertificate {
    bool feasible = false;
    Mat Px;
    Mat Pphi;
    double cost_bound = 0.0;
    double budget = 0.0;
    double gamma = 0.0;
    double budget_coefficient = 0.0;
    double lambda2 = 0.0;
    double lambdaN = 0.0;
    std::vector<lmi::BlockMargin> margins;
};

struct DesignReport {
    ProtocolGains gains;
    Mat Px;
    Mat Phat_x;
    Mat Phat_phi;
    double gamma = 0.0;
    double budget_coefficient = 0.0;
    double lambda2 = 0.0;
    double lambdaN = 0.0;
    int iterations = 0;
    bool certified = false;
    std::vector<lmi::CclIteration> history;
    std::vector<lmi::BlockMargin> margins;
    AnalysisCertificate certificate;
};

using DesignProgress = std::function<void(const lmi::CclIteration&)>;

/// Runs the cone complementarity design. Throws BudgetTooSmall when the
/// budget block is what makes the initial check fail, Infeasible when the
/// criteria fail regardless of the budget, NotConverged when the iteration
/// budget runs out.
DesignReport design(const AgentModel& model, const Topology& topology, const CostWeights& weights,
                    std::span<const double> x0, double budget, const lmi::SolverOptions& opts = {},
                    const DesignProgress& progress = {});

/// Certifies given gains. An infeasible result is returned, not thrown: it
/// means no certificate was found, which is not a disproof.
AnalysisCertificate analyze(const AgentModel& model, const Topology& topology, const CostWeights& weights,
                            const ProtocolGains& gains, std::span<const double> x0, double budget,
                            const lmi::SolverOptions& opts = {});

} // namespace gcsync
