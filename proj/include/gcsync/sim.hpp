#pragma once

#include <ostream>
#include <utility>
#include <vector>

#include "gcsync/numkit.hpp"
#include "gcsync/synthesis.hpp"
#include "gcsync/topology.hpp"

namespace gcsync::sim {

struct Scenario {
    AgentModel model;
    Topology topology;
    CostWeights weights;
    ProtocolGains gains;
    Vec x0;   // N·n, agent-major
    Vec phi0; // N·n, empty means zeros
    double dt = 1e-3;
    double horizon = 10.0;

    void validate() const;
    /// Nonzero protocol initial states void the budget guarantee.
    [[nodiscard]] bool budget_void() const;
};

struct Trajectory {
    std::size_t agents = 0;
    std::size_t order = 0; // n
    TopologyKind kind = TopologyKind::Leaderless;
    bool budget_void = false;
    std::vector<double> times;
    std::vector<Vec> states;
    std::vector<Vec> protocol_states;
    std::vector<double> cost_running;
    std::vector<double> cost_u;
    std::vector<double> cost_xphi;
};

struct Derivative {
    Vec dx;
    Vec dphi;
};

/// Stacked closed-loop operators, built once per scenario.
class ClosedLoop {
public:
    explicit ClosedLoop(const Scenario& s);

    [[nodiscard]] Derivative derivative(std::span<const double> x, std::span<const double> phi) const;
    [[nodiscard]] std::pair<double, double> cost_terms(std::span<const double> x, std::span<const double> phi) const;

private:
    Mat xx_;       // I ⊗ A
    Mat xphi_;     // I ⊗ B Ku
    Mat phiphi_;   // I ⊗ (A + B Ku) + L ⊗ Kphi C
    Mat phix_;     // -(L ⊗ Kphi C)
    struct Link {
        std::size_t from, to;
        double weight;
    };
    Mat energy_;            // R^{1/2} Ku
    Mat q_root_;            // Q^{1/2}
    std::vector<Link> links_;
    std::size_t agents_ = 0;
};

/// Symmetric square root of a positive semidefinite matrix.
Mat sqrt_psd(const Mat& s);

/// One evaluation of the stacked dynamics.
Derivative derivative(const Scenario& s, std::span<const double> x, std::span<const double> phi);

/// Fixed-step RK4 with the running cost carried as an extra state, so the
/// quadrature uses the same stages (Simpson weights on each step).
Trajectory integrate(const Scenario& s);

/// (Ju, Jxphi) from the per-agent and per-edge sums.
std::pair<double, double> cost_terms(const Topology& t, std::span<const double> x, std::span<const double> phi,
                                     const CostWeights& weights, const ProtocolGains& gains);
/// Jxphi = (phi − x)ᵀ(2L ⊗ Q)(phi − x), leaderless only.
double disagreement_cost_quadratic(const Topology& t, std::span<const double> x, std::span<const double> phi,
                                   const Mat& Q);
/// Weight matrix G with sum_j sum_{i in N_j} w_ji (e_i − e_j)ᵀQ(e_i − e_j) = eᵀ(G ⊗ Q)e.
Mat pairwise_weight_matrix(const Topology& t);

/// c(t) = e^{At} · mean of the initial states.
Vec sync_function(const Mat& A, std::span<const double> x0, std::size_t agent_count, double t);
Vec mean_state(std::span<const double> stacked, std::size_t agent_count);

/// Leaderless: max_j ||x_j − mean||. Leader-following: max_{j>=2} ||x_j − x_1||.
double disagreement(std::span<const double> stacked, std::size_t agent_count, TopologyKind kind);
std::vector<double> error_metrics(const Trajectory& tr);

/// t, x1..x{N·n}, phi1..phi{N·n}, Ju, Jxphi, Js
void write_csv(std::ostream& os, const Trajectory& tr);
/// t, c1..cn on the trajectory grid.
void write_sync_csv(std::ostream& os, const Trajectory& tr, const Mat& A, std::span<const double> x0);

} // namespace gcsync::sim
