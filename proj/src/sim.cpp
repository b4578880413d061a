#include "gcsync/sim.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>

namespace gcsync::sim {

namespace {

constexpr double blowup_norm = 1e12;

void axpy(Vec& y, double a, std::span<const double> x) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

Vec add_scaled(std::span<const double> y, double a, std::span<const double> x) {
    Vec out(y.begin(), y.end());
    axpy(out, a, x);
    return out;
}

Vec difference(std::span<const double> a, std::span<const double> b) {
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

void require(bool ok, const char* what) {
    if (!ok) throw Error(Errc::ShapeMismatch, what);
}

} // namespace

void Scenario::validate() const {
    model.validate();
    weights.validate(model);
    gains.validate(model);
    const std::size_t total = topology.agent_count() * model.n();
    require(x0.size() == total, "x0 must have N·n entries");
    require(phi0.empty() || phi0.size() == total, "phi0 must have N·n entries");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(Errc::InvalidConfig, "dt must be positive");
    if (!(horizon >= dt) || !std::isfinite(horizon)) throw Error(Errc::InvalidConfig, "horizon must be at least dt");
}

bool Scenario::budget_void() const {
    return std::any_of(phi0.begin(), phi0.end(), [](double v) { return v != 0.0; });
}

Mat pairwise_weight_matrix(const Topology& t) {
    const std::size_t N = t.agent_count();
    Mat g(N, N);
    for (std::size_t j = 0; j < N; ++j)
        for (const auto& [i, w] : t.in_neighbors(j)) {
            g(i, i) += w;
            g(j, j) += w;
            g(i, j) -= w;
            g(j, i) -= w;
        }
    return g;
}

ClosedLoop::ClosedLoop(const Scenario& s) {
    s.validate();
    const std::size_t N = s.topology.agent_count();
    const Mat I = Mat::identity(N);
    const Mat L = laplacian(s.topology);
    const Mat& A = s.model.A;
    const Mat BK = s.model.B * s.gains.Ku;
    const Mat KC = s.gains.Kphi * s.model.C;
    xx_ = kron(I, A);
    xphi_ = kron(I, BK);
    phiphi_ = kron(I, A + BK) + kron(L, KC);
    phix_ = -kron(L, KC);
    energy_ = sqrt_psd(s.weights.R) * s.gains.Ku;
    q_root_ = sqrt_psd(s.weights.Q);
    agents_ = N;
    for (std::size_t j = 0; j < N; ++j)
        for (const auto& [i, w] : s.topology.in_neighbors(j)) links_.push_back({i, j, w});
}

Mat sqrt_psd(const Mat& s) {
    const SymEig e = sym_eig(s);
    Mat root(s.rows(), s.cols());
    for (std::size_t k = 0; k < e.values.size(); ++k) {
        const double r = std::sqrt(std::max(e.values[k], 0.0));
        for (std::size_t i = 0; i < s.rows(); ++i)
            for (std::size_t j = 0; j < s.cols(); ++j) root(i, j) += r * e.vectors(i, k) * e.vectors(j, k);
    }
    return root.sym();
}

Derivative ClosedLoop::derivative(std::span<const double> x, std::span<const double> phi) const {
    require(x.size() == xx_.rows() && phi.size() == xx_.rows(), "state length");
    Derivative d{xx_ * x, phiphi_ * phi};
    axpy(d.dx, 1.0, xphi_ * phi);
    axpy(d.dphi, 1.0, phix_ * x);
    return d;
}

// Both terms are sums of squares, so rounding never makes them negative.
std::pair<double, double> ClosedLoop::cost_terms(std::span<const double> x, std::span<const double> phi) const {
    const std::size_t n = q_root_.rows();
    double ju = 0.0, jx = 0.0;
    for (std::size_t j = 0; j < agents_; ++j) {
        const Vec v = energy_ * phi.subspan(j * n, n);
        ju += dot(v, v);
    }
    Vec e(n);
    for (const auto& l : links_) {
        for (std::size_t k = 0; k < n; ++k)
            e[k] = (x[l.from * n + k] - x[l.to * n + k]) - (phi[l.from * n + k] - phi[l.to * n + k]);
        const Vec v = q_root_ * e;
        jx += l.weight * dot(v, v);
    }
    return {ju, jx};
}

Derivative derivative(const Scenario& s, std::span<const double> x, std::span<const double> phi) {
    return ClosedLoop(s).derivative(x, phi);
}

Trajectory integrate(const Scenario& s) {
    const ClosedLoop loop(s);
    const std::size_t N = s.topology.agent_count(), n = s.model.n();
    const auto steps = static_cast<std::size_t>(std::llround(s.horizon / s.dt));

    Trajectory tr;
    tr.agents = N;
    tr.order = n;
    tr.kind = s.topology.kind();
    tr.budget_void = s.budget_void();
    tr.times.reserve(steps + 1);

    Vec x = s.x0;
    Vec phi = s.phi0.empty() ? Vec(N * n, 0.0) : s.phi0;
    double J = 0.0;
    auto record = [&](double t) {
        const auto [ju, jx] = loop.cost_terms(x, phi);
        tr.times.push_back(t);
        tr.states.push_back(x);
        tr.protocol_states.push_back(phi);
        tr.cost_running.push_back(J);
        tr.cost_u.push_back(ju);
        tr.cost_xphi.push_back(jx);
    };
    auto rate = [&](std::span<const double> xs, std::span<const double> ps) {
        const auto [ju, jx] = loop.cost_terms(xs, ps);
        return ju + jx;
    };

    record(0.0);
    const double h = s.dt;
    for (std::size_t k = 1; k <= steps; ++k) {
        const auto k1 = loop.derivative(x, phi);
        const double c1 = rate(x, phi);
        const Vec x2 = add_scaled(x, h / 2, k1.dx), p2 = add_scaled(phi, h / 2, k1.dphi);
        const auto k2 = loop.derivative(x2, p2);
        const double c2 = rate(x2, p2);
        const Vec x3 = add_scaled(x, h / 2, k2.dx), p3 = add_scaled(phi, h / 2, k2.dphi);
        const auto k3 = loop.derivative(x3, p3);
        const double c3 = rate(x3, p3);
        const Vec x4 = add_scaled(x, h, k3.dx), p4 = add_scaled(phi, h, k3.dphi);
        const auto k4 = loop.derivative(x4, p4);
        const double c4 = rate(x4, p4);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] += h / 6 * (k1.dx[i] + 2 * k2.dx[i] + 2 * k3.dx[i] + k4.dx[i]);
            phi[i] += h / 6 * (k1.dphi[i] + 2 * k2.dphi[i] + 2 * k3.dphi[i] + k4.dphi[i]);
        }
        J += h / 6 * (c1 + 2 * c2 + 2 * c3 + c4);

        const double size = std::max(norm2(x), norm2(phi));
        if (!(size <= blowup_norm) || !std::isfinite(J))
            throw Error(Errc::NumericalBlowup,
                        "state norm exceeded 1e12 at t = " + std::to_string(static_cast<double>(k) * h));
        record(static_cast<double>(k) * h);
    }
    return tr;
}

std::pair<double, double> cost_terms(const Topology& t, std::span<const double> x, std::span<const double> phi,
                                     const CostWeights& weights, const ProtocolGains& gains) {
    const std::size_t N = t.agent_count(), n = weights.Q.rows();
    require(x.size() == N * n && phi.size() == N * n, "state length");
    require(gains.Ku.cols() == n && gains.Ku.rows() == weights.R.rows(), "gain shape");
    const Mat KRK = gains.Ku.transpose() * weights.R * gains.Ku;
    double ju = 0.0, jx = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
        const auto pj = phi.subspan(j * n, n);
        ju += quad_form(KRK, pj);
        for (const auto& [i, w] : t.in_neighbors(j)) {
            Vec e(n);
            for (std::size_t k = 0; k < n; ++k) e[k] = (x[i * n + k] - x[j * n + k]) - (phi[i * n + k] - phi[j * n + k]);
            jx += w * quad_form(weights.Q, e);
        }
    }
    return {ju, jx};
}

double disagreement_cost_quadratic(const Topology& t, std::span<const double> x, std::span<const double> phi,
                                   const Mat& Q) {
    if (t.kind() != TopologyKind::Leaderless)
        throw Error(Errc::WrongKind, "the 2L ⊗ Q identity holds for leaderless networks");
    return quad_form(kron(laplacian(t) * 2.0, Q), difference(phi, x));
}

Vec mean_state(std::span<const double> stacked, std::size_t agent_count) {
    require(agent_count > 0 && stacked.size() % agent_count == 0, "state length");
    const std::size_t n = stacked.size() / agent_count;
    Vec mean(n, 0.0);
    for (std::size_t j = 0; j < agent_count; ++j)
        for (std::size_t k = 0; k < n; ++k) mean[k] += stacked[j * n + k];
    for (auto& v : mean) v /= static_cast<double>(agent_count);
    return mean;
}

Vec sync_function(const Mat& A, std::span<const double> x0, std::size_t agent_count, double t) {
    return expm(A, t) * mean_state(x0, agent_count);
}

double disagreement(std::span<const double> stacked, std::size_t agent_count, TopologyKind kind) {
    const std::size_t n = stacked.size() / agent_count;
    const Vec ref = kind == TopologyKind::Leaderless ? mean_state(stacked, agent_count)
                                                     : Vec(stacked.begin(), stacked.begin() + static_cast<long>(n));
    double worst = 0.0;
    for (std::size_t j = kind == TopologyKind::Leaderless ? 0 : 1; j < agent_count; ++j)
        worst = std::max(worst, norm2(difference(stacked.subspan(j * n, n), ref)));
    return worst;
}

std::vector<double> error_metrics(const Trajectory& tr) {
    std::vector<double> out;
    out.reserve(tr.states.size());
    for (const auto& x : tr.states) out.push_back(disagreement(x, tr.agents, tr.kind));
    return out;
}

void write_csv(std::ostream& os, const Trajectory& tr) {
    const std::size_t total = tr.agents * tr.order;
    os << "t";
    for (std::size_t i = 1; i <= total; ++i) os << ",x" << i;
    for (std::size_t i = 1; i <= total; ++i) os << ",phi" << i;
    os << ",Ju,Jxphi,Js\n";
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        os << tr.times[k];
        for (double v : tr.states[k]) os << ',' << v;
        for (double v : tr.protocol_states[k]) os << ',' << v;
        os << ',' << tr.cost_u[k] << ',' << tr.cost_xphi[k] << ',' << tr.cost_running[k] << '\n';
    }
}

void write_sync_csv(std::ostream& os, const Trajectory& tr, const Mat& A, std::span<const double> x0) {
    os << "t";
    for (std::size_t k = 1; k <= A.rows(); ++k) os << ",c" << k;
    os << '\n' << std::setprecision(std::numeric_limits<double>::max_digits10);
    const Vec mean = mean_state(x0, tr.agents);
    for (double t : tr.times) {
        os << t;
        for (double v : expm(A, t) * mean) os << ',' << v;
        os << '\n';
    }
}

} // namespace gcsync::sim
