#pragma once

#include <random>

#include "gcsync/sim.hpp"
#include "gcsync/synthesis.hpp"
#include "gcsync/topology.hpp"

namespace testdata {

using namespace gcsync;

inline AgentModel model() {
    return {{{0.2, 3.5, 0}, {-1.5, 0.8, -1.3}, {1, 0, -2.6}},
            {{2, 0}, {-1.5, 4}, {0, -0.4}},
            {{2, 0, 2}, {-1.5, 3, 0}}};
}

inline Vec x0() { return {-13, 20, -3, -16, -8, 15, 26, 10, -12, -3, -8, 19, 12, 22, -6, 8, -13, 16}; }

inline CostWeights weights1() {
    return {{{.3, .06, 0}, {.06, .3, .06}, {0, .06, .3}}, {{.8, .08}, {.08, .8}}};
}
inline CostWeights weights2() {
    return {{{.25, .05, .05}, {.05, .25, 0}, {.05, 0, .25}}, {{.75, .15}, {.15, .75}}};
}

inline Topology topology1() { return Topology::cycle(6); }
inline Topology topology2() {
    return Topology(TopologyKind::LeaderFollowing, 6,
                    {{1, 2, 1}, {1, 6, 1}, {2, 3, 1}, {3, 4, 1}, {4, 5, 1}, {5, 6, 1}});
}

inline ProtocolGains reference_gains1() {
    return {{{5.1141, 8.0251, -0.5324}, {-44.4484, -63.8269, 3.1964}},
            {{-2.1446, 1.1269}, {-0.3219, -1.6096}, {-1.1376, -0.0013}}};
}
inline ProtocolGains reference_gains2() {
    return {{{1.5586, 2.8988, -0.2717}, {-8.8966, -12.9081, 0.6719}},
            {{-2.5652, 1.6794}, {-0.3525, -1.9704}, {-1.0104, -0.2843}}};
}

constexpr double budget1 = 6000.0;
constexpr double budget2 = 10000.0;

/// Fixed-seed source for property tests.
class Gen {
public:
    explicit Gen(unsigned seed) : rng_(seed) {}
    double uniform(double lo = -1.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    std::size_t index(std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
    }
    Mat matrix(std::size_t r, std::size_t c) {
        Mat m(r, c);
        for (auto& v : m.entries()) v = uniform();
        return m;
    }
    Vec vector(std::size_t n) {
        Vec v(n);
        for (auto& x : v) x = uniform(-10.0, 10.0);
        return v;
    }
    Mat symmetric(std::size_t n) { return matrix(n, n).sym(); }
    Mat spd(std::size_t n) {
        const Mat g = matrix(n, n);
        return g * g.transpose() + Mat::identity(n) * 0.5;
    }
    /// Connected leaderless graph: random spanning tree plus extra edges.
    Topology connected(std::size_t n) {
        std::vector<Edge> edges;
        std::vector<std::vector<bool>> used(n + 1, std::vector<bool>(n + 1, false));
        auto add = [&](std::size_t a, std::size_t b) {
            if (a == b || used[a][b]) return;
            used[a][b] = used[b][a] = true;
            edges.push_back({a, b, uniform(0.2, 2.0)});
        };
        for (std::size_t k = 2; k <= n; ++k) add(index(1, k - 1), k);
        for (std::size_t e = 0; e < n; ++e) add(index(1, n), index(1, n));
        return Topology(TopologyKind::Leaderless, n, std::move(edges));
    }

private:
    std::mt19937_64 rng_;
};

inline double max_abs_diff(const Mat& a, const Mat& b) { return (a - b).max_abs(); }

} // namespace testdata
