#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "gcsync/numkit.hpp"

namespace gcsync {

enum class TopologyKind { Leaderless, LeaderFollowing };

std::string_view to_string(TopologyKind kind);
TopologyKind parse_topology_kind(std::string_view text);

/// Edge between agents `from` and `to` (1-based). For leader-following
/// graphs an edge touching agent 1 is directed leader -> follower; every
/// other edge is undirected.
struct Edge {
    std::size_t from = 0;
    std::size_t to = 0;
    double weight = 1.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Interaction graph. The edge list is the only stored state; every matrix
/// is derived from it on demand.
class Topology {
public:
    Topology(TopologyKind kind, std::size_t agent_count, std::vector<Edge> edges);

    [[nodiscard]] TopologyKind kind() const noexcept { return kind_; }
    [[nodiscard]] std::size_t agent_count() const noexcept { return agents_; }
    [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }

    /// In-neighbors of agent j (0-based) with weights w_ji.
    [[nodiscard]] std::vector<std::pair<std::size_t, double>> in_neighbors(std::size_t j) const;

    static Topology cycle(std::size_t n, double weight = 1.0);
    static Topology complete(std::size_t n, double weight = 1.0);
    /// Leader 1 linked to every follower, no follower edges.
    static Topology leader_star(std::size_t n, double weight = 1.0);

    friend bool operator==(const Topology&, const Topology&) = default;

private:
    TopologyKind kind_;
    std::size_t agents_;
    std::vector<Edge> edges_;
};

struct Admissibility {
    bool admissible = false;
    std::string diagnosis;
};

struct Spectrum {
    Vec eigenvalues; // lambda_1 = 0 first, ascending
    double lambda2 = 0.0;
    double lambdaN = 0.0;
    /// Leaderless: U = [1/sqrt(N), U_hat] (N x N). Leader-following: U_tilde over followers.
    Mat basis;
};

Mat laplacian(const Topology& t);
Admissibility is_admissible(const Topology& t);
/// L_ff + Lambda_fl: follower block of a leader-following Laplacian.
Mat follower_matrix(const Topology& t);
Spectrum spectrum(const Topology& t);
/// Matrix linking initial states to the cost budget: the complete-graph
/// Laplacian with weights 1/N (leaderless) or the unit star centred on the
/// leader (leader-following).
Mat relationship_matrix(TopologyKind kind, std::size_t agent_count);

} // namespace gcsync
