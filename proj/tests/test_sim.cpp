#include <doctest.h>

#include <cmath>
#include <sstream>

#include "example_data.hpp"

using namespace gcsync;
using testdata::Gen;
using testdata::max_abs_diff;

namespace {

sim::Scenario example1(const ProtocolGains& g) {
    return {testdata::model(), testdata::topology1(), testdata::weights1(), g, testdata::x0(), {}, 1e-3, 10.0};
}

sim::Scenario example2(const ProtocolGains& g) {
    return {testdata::model(), testdata::topology2(), testdata::weights2(), g, testdata::x0(), {}, 1e-3, 10.0};
}

const ProtocolGains& designed1() {
    static const ProtocolGains g =
        design(testdata::model(), testdata::topology1(), testdata::weights1(), testdata::x0(), testdata::budget1).gains;
    return g;
}

const ProtocolGains& designed2() {
    static const ProtocolGains g =
        design(testdata::model(), testdata::topology2(), testdata::weights2(), testdata::x0(), testdata::budget2).gains;
    return g;
}

} // namespace

TEST_CASE("derivative examples") {
    const auto s = example1(testdata::reference_gains1());
    const Vec x = testdata::x0();
    const Vec zero(18, 0.0);
    auto d = sim::derivative(s, x, zero);
    const Vec ax = kron(Mat::identity(6), s.model.A) * x;
    for (std::size_t i = 0; i < 18; ++i) CHECK(d.dx[i] == doctest::Approx(ax[i]).epsilon(1e-14));

    d = sim::derivative(s, x, x);
    const Vec cl = kron(Mat::identity(6), s.model.A + s.model.B * s.gains.Ku) * x;
    for (std::size_t i = 0; i < 18; ++i) CHECK(std::abs(d.dphi[i] - cl[i]) <= 1e-12 * (1.0 + std::abs(cl[i])));
}

TEST_CASE("derivative matches the per-agent sum on a single edge") {
    Gen g(47);
    const AgentModel m = testdata::model();
    const ProtocolGains gains{g.matrix(2, 3), g.matrix(3, 2)};
    const sim::Scenario s{m, Topology(TopologyKind::Leaderless, 2, {{1, 2, 0.7}}), testdata::weights1(), gains,
                          g.vector(6), {}, 1e-3, 1.0};
    const Vec x = g.vector(6), phi = g.vector(6);
    const auto d = sim::derivative(s, x, phi);
    const Mat BK = m.B * gains.Ku, KC = gains.Kphi * m.C;
    for (std::size_t j = 0; j < 2; ++j) {
        const std::size_t i = 1 - j;
        Vec xj(x.begin() + j * 3, x.begin() + j * 3 + 3), pj(phi.begin() + j * 3, phi.begin() + j * 3 + 3);
        Vec rel(3);
        for (std::size_t k = 0; k < 3; ++k) rel[k] = 0.7 * ((x[i * 3 + k] - x[j * 3 + k]) - (phi[i * 3 + k] - phi[j * 3 + k]));
        const Vec dx = m.A * xj, bu = BK * pj, dp = (m.A + BK) * pj, inj = KC * rel;
        for (std::size_t k = 0; k < 3; ++k) {
            CHECK(std::abs(d.dx[j * 3 + k] - (dx[k] + bu[k])) <= 1e-12);
            CHECK(std::abs(d.dphi[j * 3 + k] - (dp[k] + inj[k])) <= 1e-12);
        }
    }
}

TEST_CASE("autonomous agents with zero dynamics") {
    AgentModel m{Mat::zeros(3, 3), testdata::model().B, testdata::model().C};
    const ProtocolGains zero{Mat::zeros(2, 3), Mat::zeros(3, 2)};
    const sim::Scenario s{m, testdata::topology1(), testdata::weights1(), zero, testdata::x0(), {}, 1e-2, 2.0};
    const auto tr = sim::integrate(s);
    CHECK(tr.states.back() == testdata::x0());
    const double slope = quad_form(kron(laplacian(s.topology) * 2.0, s.weights.Q), testdata::x0());
    for (std::size_t k = 0; k < tr.times.size(); k += 50)
        CHECK(tr.cost_running[k] == doctest::Approx(slope * tr.times[k]).epsilon(1e-12));
}

TEST_CASE("RK4 order check on a scalar decay") {
    AgentModel m{Mat{{-1.0}}, Mat{{0.0}}, Mat{{1.0}}};
    const sim::Scenario s{m, Topology(TopologyKind::Leaderless, 2, {{1, 2, 1}}), {Mat{{1.0}}, Mat{{1.0}}},
                          {Mat{{0.0}}, Mat{{0.0}}}, {1.0, 2.0}, {}, 0.01, 1.0};
    const auto tr = sim::integrate(s);
    CHECK(tr.times.size() == 101);
    CHECK(std::abs(tr.states.back()[0] - std::exp(-1.0)) <= 1e-9);
    CHECK(std::abs(tr.states.back()[1] - 2.0 * std::exp(-1.0)) <= 1e-9);
}

TEST_CASE("unstabilized agents trip the blowup guard") {
    auto s = example1({Mat::zeros(2, 3), Mat::zeros(3, 2)});
    s.horizon = 60.0;
    try {
        static_cast<void>(sim::integrate(s));
        FAIL("expected NumericalBlowup");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::NumericalBlowup);
    }
}

TEST_CASE("cost term examples and identity") {
    const auto t = testdata::topology1();
    const auto w = testdata::weights1();
    const auto g = testdata::reference_gains1();
    const Vec x = testdata::x0(), zero(18, 0.0);
    auto [ju, jx] = sim::cost_terms(t, x, zero, w, g);
    CHECK(ju == 0.0);
    CHECK(jx == doctest::Approx(quad_form(kron(laplacian(t) * 2.0, w.Q), x)).epsilon(1e-12));
    std::tie(ju, jx) = sim::cost_terms(t, x, x, w, g);
    CHECK(jx == 0.0);
    CHECK(ju > 0.0);

    Gen r(53);
    for (int trial = 0; trial < 200; ++trial) {
        const Vec xs = r.vector(18), ps = r.vector(18);
        const double pair = sim::cost_terms(t, xs, ps, w, g).second;
        const double quad = sim::disagreement_cost_quadratic(t, xs, ps, w.Q);
        CHECK(std::abs(pair - quad) <= 1e-10 * std::abs(quad));
    }
}

TEST_CASE("integrator cost terms match the pairwise definition") {
    Gen r(59);
    for (const auto& t : {testdata::topology1(), testdata::topology2()}) {
        const sim::Scenario s{testdata::model(), t, testdata::weights2(), testdata::reference_gains2(), testdata::x0(),
                              {}, 1e-3, 1.0};
        const sim::ClosedLoop loop(s);
        for (int trial = 0; trial < 50; ++trial) {
            const Vec x = r.vector(18), phi = r.vector(18);
            const auto [ju, jx] = loop.cost_terms(x, phi);
            const auto [ou, ox] = sim::cost_terms(t, x, phi, s.weights, s.gains);
            CHECK(std::abs(ju - ou) <= 1e-10 * ou);
            CHECK(std::abs(jx - ox) <= 1e-10 * ox);
            Vec e(18);
            for (std::size_t i = 0; i < 18; ++i) e[i] = phi[i] - x[i];
            CHECK(std::abs(quad_form(kron(sim::pairwise_weight_matrix(t), s.weights.Q), e) - ox) <= 1e-10 * ox);
        }
        const Mat root = sim::sqrt_psd(s.weights.Q);
        CHECK(max_abs_diff(root * root, s.weights.Q) <= 1e-12);
    }
}

TEST_CASE("sync function") {
    const Vec c0 = sim::sync_function(testdata::model().A, testdata::x0(), 6, 0.0);
    const Vec expected{2.3333, 3.8333, 4.8333};
    for (std::size_t k = 0; k < 3; ++k) CHECK(std::round(c0[k] * 1e4) / 1e4 == doctest::Approx(expected[k]));
    const Vec still = sim::sync_function(Mat::zeros(3, 3), testdata::x0(), 6, 7.5);
    CHECK(still == sim::mean_state(testdata::x0(), 6));
}

TEST_CASE("error metric examples") {
    const Vec same{1, 2, 1, 2, 1, 2};
    CHECK(sim::disagreement(same, 3, TopologyKind::Leaderless) == 0.0);
    CHECK(sim::disagreement(same, 3, TopologyKind::LeaderFollowing) == 0.0);
    const Vec opposite{3, 4, -3, -4};
    CHECK(sim::disagreement(opposite, 2, TopologyKind::Leaderless) == doctest::Approx(5.0));
}

TEST_CASE("leaderless designed run") {
    const auto s = example1(designed1());
    const auto tr = sim::integrate(s);
    const auto metric = sim::error_metrics(tr);
    CHECK(tr.cost_running.back() <= testdata::budget1);
    CHECK(metric.back() <= 1e-3 * metric.front());
    for (std::size_t k = 1; k < tr.cost_running.size(); ++k) CHECK(tr.cost_running[k] >= tr.cost_running[k - 1]);
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        CHECK(tr.cost_u[k] >= 0.0);
        CHECK(tr.cost_xphi[k] >= 0.0);
    }

    // agreement part plus error part rebuilds the state; first protocol mode stays zero
    const Spectrum sp = spectrum(s.topology);
    Mat U1(6, 1), Uhat(6, 5);
    for (std::size_t i = 0; i < 6; ++i) {
        U1(i, 0) = sp.basis(i, 0);
        for (std::size_t k = 1; k < 6; ++k) Uhat(i, k - 1) = sp.basis(i, k);
    }
    const Mat Ps = kron(U1 * U1.transpose(), Mat::identity(3));
    const Mat Pe = kron(Uhat * Uhat.transpose(), Mat::identity(3));
    const Mat mode1 = kron(U1.transpose(), Mat::identity(3));
    double worst_split = 0.0, worst_mode = 0.0;
    for (std::size_t k = 0; k < tr.times.size(); k += 10) {
        const Vec xs = Ps * tr.states[k], xe = Pe * tr.states[k];
        for (std::size_t i = 0; i < 18; ++i) worst_split = std::max(worst_split, std::abs(xs[i] + xe[i] - tr.states[k][i]));
        worst_mode = std::max(worst_mode, norm2(mode1 * tr.protocol_states[k]));
    }
    CHECK(worst_split <= 1e-9);
    CHECK(worst_mode <= 1e-9);

    auto half = s;
    half.dt = s.dt / 2;
    const double fine = sim::integrate(half).cost_running.back();
    CHECK(std::abs(fine - tr.cost_running.back()) <= 1e-6 * fine);
}

TEST_CASE("leader-following designed run") {
    const auto s = example2(designed2());
    const auto tr = sim::integrate(s);
    const auto metric = sim::error_metrics(tr);
    CHECK(tr.cost_running.back() <= testdata::budget2);
    CHECK(metric.back() <= 1e-3 * metric.front());
    bool zero = true;
    for (const auto& phi : tr.protocol_states) {
        for (std::size_t k = 0; k < 3; ++k) zero = zero && phi[k] == 0.0 && !std::signbit(phi[k]);
        const Vec u1 = s.gains.Ku * std::span<const double>(phi.data(), 3);
        for (double v : u1) zero = zero && v == 0.0;
    }
    CHECK(zero);
}

TEST_CASE("different connected topologies share the agreement motion") {
    const Topology path(TopologyKind::Leaderless, 6, {{1, 2, 1}, {2, 3, 1}, {3, 4, 1}, {4, 5, 1}, {5, 6, 1}});
    const auto other = design(testdata::model(), path, testdata::weights1(), testdata::x0(), testdata::budget1);
    REQUIRE(other.certified);
    sim::Scenario a = example1(designed1());
    sim::Scenario b{testdata::model(), path, testdata::weights1(), other.gains, testdata::x0(), {}, 1e-3, 10.0};
    const auto ta = sim::integrate(a), tb = sim::integrate(b);
    const Vec c = sim::sync_function(testdata::model().A, testdata::x0(), 6, 10.0);
    const Vec ma = sim::mean_state(ta.states.back(), 6), mb = sim::mean_state(tb.states.back(), 6);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(std::abs(ma[k] - c[k]) <= 1e-6 * (1.0 + norm2(c)));
        CHECK(std::abs(mb[k] - c[k]) <= 1e-6 * (1.0 + norm2(c)));
    }
}

TEST_CASE("nonzero protocol initial states void the budget") {
    auto s = example1(designed1());
    s.phi0 = Vec(18, 0.0);
    CHECK_FALSE(s.budget_void());
    s.phi0[4] = 0.5;
    s.horizon = 0.01;
    CHECK(sim::integrate(s).budget_void);
}

TEST_CASE("scenario validation") {
    auto s = example1(testdata::reference_gains1());
    s.x0.pop_back();
    CHECK_THROWS_AS(static_cast<void>(sim::integrate(s)), Error);
    s = example1(testdata::reference_gains1());
    s.dt = 0.0;
    CHECK_THROWS_AS(static_cast<void>(sim::integrate(s)), Error);
}

TEST_CASE("trajectory CSV layout") {
    auto s = example1(testdata::reference_gains1());
    s.horizon = 0.002;
    const auto tr = sim::integrate(s);
    std::ostringstream os;
    sim::write_csv(os, tr);
    std::istringstream in(os.str());
    std::string header, row;
    std::getline(in, header);
    CHECK(header.rfind("t,x1,x2,", 0) == 0);
    CHECK(header.find(",x18,phi1,") != std::string::npos);
    CHECK(header.ends_with(",phi18,Ju,Jxphi,Js"));
    int rows = 0;
    while (std::getline(in, row)) ++rows;
    CHECK(rows == 3);
}
