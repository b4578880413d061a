#include "gcsync/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>

namespace gcsync {

std::string_view to_string(TopologyKind kind) {
    return kind == TopologyKind::Leaderless ? "leaderless" : "leader_following";
}

TopologyKind parse_topology_kind(std::string_view text) {
    if (text == "leaderless") return TopologyKind::Leaderless;
    if (text == "leader_following") return TopologyKind::LeaderFollowing;
    throw Error(Errc::InvalidConfig, "unknown topology kind '" + std::string(text) + "'");
}

Topology::Topology(TopologyKind kind, std::size_t agent_count, std::vector<Edge> edges)
    : kind_(kind), agents_(agent_count), edges_(std::move(edges)) {
    if (agents_ < 2) throw Error(Errc::InvalidTopology, "at least two agents are required");
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& e : edges_) {
        if (e.from < 1 || e.from > agents_ || e.to < 1 || e.to > agents_)
            throw Error(Errc::InvalidEdge, "agent index out of range");
        if (e.from == e.to) throw Error(Errc::InvalidEdge, "self-loop on agent " + std::to_string(e.from));
        if (!(e.weight > 0.0) || !std::isfinite(e.weight))
            throw Error(Errc::InvalidEdge, "edge weight must be positive and finite");
        if (kind_ == TopologyKind::LeaderFollowing && e.to == 1)
            throw Error(Errc::InvalidEdge, "the leader (agent 1) cannot receive from followers");
        if (!seen.insert(std::minmax(e.from, e.to)).second)
            throw Error(Errc::InvalidEdge,
                        "duplicate edge " + std::to_string(e.from) + "-" + std::to_string(e.to));
    }
}

std::vector<std::pair<std::size_t, double>> Topology::in_neighbors(std::size_t j) const {
    std::vector<std::pair<std::size_t, double>> out;
    for (const auto& e : edges_) {
        const std::size_t a = e.from - 1, b = e.to - 1;
        const bool directed = kind_ == TopologyKind::LeaderFollowing && a == 0;
        if (b == j) out.emplace_back(a, e.weight);
        else if (!directed && a == j) out.emplace_back(b, e.weight);
    }
    return out;
}

Topology Topology::cycle(std::size_t n, double weight) {
    std::vector<Edge> edges;
    for (std::size_t k = 1; k <= n; ++k) edges.push_back({k, k % n + 1, weight});
    if (n == 2) edges.pop_back();
    return Topology(TopologyKind::Leaderless, n, std::move(edges));
}

Topology Topology::complete(std::size_t n, double weight) {
    std::vector<Edge> edges;
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = i + 1; j <= n; ++j) edges.push_back({i, j, weight});
    return Topology(TopologyKind::Leaderless, n, std::move(edges));
}

Topology Topology::leader_star(std::size_t n, double weight) {
    std::vector<Edge> edges;
    for (std::size_t j = 2; j <= n; ++j) edges.push_back({1, j, weight});
    return Topology(TopologyKind::LeaderFollowing, n, std::move(edges));
}

Mat laplacian(const Topology& t) {
    const std::size_t n = t.agent_count();
    Mat l(n, n);
    for (std::size_t j = 0; j < n; ++j)
        for (const auto& [i, w] : t.in_neighbors(j)) {
            l(j, i) -= w;
            l(j, j) += w;
        }
    return l;
}

namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

private:
    std::vector<std::size_t> parent_;
};

} // namespace

Admissibility is_admissible(const Topology& t) {
    const std::size_t n = t.agent_count();
    if (t.kind() == TopologyKind::Leaderless) {
        DisjointSets sets(n);
        for (const auto& e : t.edges()) sets.unite(e.from - 1, e.to - 1);
        std::size_t components = 0;
        for (std::size_t k = 0; k < n; ++k)
            if (sets.find(k) == k) ++components;
        if (components != 1)
            return {false, "disconnected (" + std::to_string(components) + " components)"};
        const auto eig = sym_eig(laplacian(t));
        if (!(eig.values[1] > 1e-9))
            return {false, "connected by edge list but lambda2 is numerically zero"};
        return {true, "connected"};
    }

    // Spanning tree rooted at the leader: every follower reachable along edges.
    std::vector<bool> reached(n, false);
    std::queue<std::size_t> frontier;
    reached[0] = true;
    frontier.push(0);
    while (!frontier.empty()) {
        const std::size_t a = frontier.front();
        frontier.pop();
        for (std::size_t b = 0; b < n; ++b) {
            if (reached[b]) continue;
            for (const auto& [src, w] : t.in_neighbors(b)) {
                if (src == a) {
                    reached[b] = true;
                    frontier.push(b);
                    break;
                }
            }
        }
    }
    std::string missing;
    for (std::size_t k = 1; k < n; ++k)
        if (!reached[k]) missing += (missing.empty() ? "" : ",") + std::to_string(k + 1);
    if (!missing.empty()) return {false, "no spanning tree from leader; unreachable followers: " + missing};
    return {true, "spanning tree rooted at leader"};
}

Mat follower_matrix(const Topology& t) {
    if (t.kind() != TopologyKind::LeaderFollowing)
        throw Error(Errc::WrongKind, "follower_matrix requires a leader-following topology");
    const std::size_t n = t.agent_count();
    return laplacian(t).block(1, 1, n - 1, n - 1);
}

Spectrum spectrum(const Topology& t) {
    if (const auto adm = is_admissible(t); !adm.admissible) throw Error(Errc::NotAdmissible, adm.diagnosis);
    const std::size_t n = t.agent_count();
    Spectrum s;
    if (t.kind() == TopologyKind::Leaderless) {
        auto eig = sym_eig(laplacian(t));
        eig.values[0] = std::abs(eig.values[0]) < 1e-9 ? 0.0 : eig.values[0];
        // The null space is simple, so the first eigenvector is +-1/sqrt(N); pin it exactly.
        const double c = 1.0 / std::sqrt(static_cast<double>(n));
        for (std::size_t i = 0; i < n; ++i) eig.vectors(i, 0) = c;
        s.eigenvalues = std::move(eig.values);
        s.basis = std::move(eig.vectors);
        s.lambda2 = s.eigenvalues[1];
        s.lambdaN = s.eigenvalues.back();
    } else {
        auto eig = sym_eig(follower_matrix(t));
        s.eigenvalues.push_back(0.0);
        s.eigenvalues.insert(s.eigenvalues.end(), eig.values.begin(), eig.values.end());
        s.basis = std::move(eig.vectors);
        s.lambda2 = eig.values.front();
        s.lambdaN = eig.values.back();
    }
    return s;
}

Mat relationship_matrix(TopologyKind kind, std::size_t agent_count) {
    if (agent_count < 2) throw Error(Errc::InvalidTopology, "relationship matrix needs N >= 2");
    const std::size_t n = agent_count;
    const double nd = static_cast<double>(n);
    Mat m(n, n);
    if (kind == TopologyKind::Leaderless) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) m(i, j) = (i == j ? 1.0 : 0.0) - 1.0 / nd;
    } else {
        m(0, 0) = nd - 1.0;
        for (std::size_t j = 1; j < n; ++j) {
            m(0, j) = m(j, 0) = -1.0;
            m(j, j) = 1.0;
        }
    }
    return m;
}

} // namespace gcsync
