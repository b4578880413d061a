#include "gcsync/lmi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gcsync::lmi {

std::string_view to_string(Status s) {
    switch (s) {
    case Status::Feasible: return "feasible";
    case Status::InfeasibleBestEffort: return "infeasible_best_effort";
    case Status::MaxIterations: return "max_iterations";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Construction helpers

BlockBuilder::BlockBuilder(std::string label, std::vector<std::size_t> partition, Sense sense) : sizes_(std::move(partition)) {
    std::size_t total = 0;
    for (std::size_t s : sizes_) {
        offsets_.push_back(total);
        total += s;
    }
    block_.label = std::move(label);
    block_.constant = Mat(total, total);
    block_.sense = sense;
}

Mat BlockBuilder::selector(std::size_t part) const {
    if (part >= sizes_.size()) throw Error(Errc::ShapeMismatch, "block partition index out of range");
    Mat e(block_.constant.rows(), sizes_[part]);
    for (std::size_t k = 0; k < sizes_[part]; ++k) e(offsets_[part] + k, k) = 1.0;
    return e;
}

BlockBuilder& BlockBuilder::constant(std::size_t i, std::size_t j, const Mat& c) {
    if (i >= sizes_.size() || j >= sizes_.size() || c.rows() != sizes_[i] || c.cols() != sizes_[j])
        throw Error(Errc::ShapeMismatch, "constant does not fit partition in block " + block_.label);
    for (std::size_t r = 0; r < c.rows(); ++r)
        for (std::size_t s = 0; s < c.cols(); ++s) {
            block_.constant(offsets_[i] + r, offsets_[j] + s) += c(r, s);
            if (i != j) block_.constant(offsets_[j] + s, offsets_[i] + r) += c(r, s);
        }
    return *this;
}

BlockBuilder& BlockBuilder::term(std::size_t i, std::size_t j, const Mat& left, const std::string& var, bool transpose,
                                 const Mat& right, double scale) {
    const Mat ei = selector(i), ej = selector(j);
    if (left.rows() != sizes_[i] || right.cols() != sizes_[j])
        throw Error(Errc::ShapeMismatch, "term does not fit partition in block " + block_.label);
    block_.terms.push_back({ei * left, var, transpose, right * ej.transpose(), scale});
    if (i != j) block_.terms.push_back({ej * right.transpose(), var, !transpose, left.transpose() * ei.transpose(), scale});
    return *this;
}

BlockBuilder& BlockBuilder::sym_term(std::size_t i, const Mat& left, const std::string& var, bool transpose,
                                     const Mat& right, double scale) {
    const Mat ei = selector(i);
    if (left.rows() != sizes_[i] || right.cols() != sizes_[i])
        throw Error(Errc::ShapeMismatch, "term does not fit partition in block " + block_.label);
    block_.terms.push_back({ei * left, var, transpose, right * ei.transpose(), scale});
    block_.terms.push_back({ei * right.transpose(), var, !transpose, left.transpose() * ei.transpose(), scale});
    return *this;
}

const MatVar* LmiProblem::find(const std::string& name) const {
    for (const auto& v : variables)
        if (v.name == name) return &v;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Evaluation and certification

namespace {

Mat assemble(const AffineBlock& block, const Assignment& assignment) {
    Mat f = block.constant;
    for (const auto& t : block.terms) {
        const auto it = assignment.find(t.var);
        if (it == assignment.end()) throw Error(Errc::MissingVariable, "'" + t.var + "' in block " + block.label);
        const Mat& x = it->second;
        const Mat xt = t.transpose ? x.transpose() : x;
        if (t.left.cols() != xt.rows() || t.right.rows() != xt.cols() || t.left.rows() != f.rows() ||
            t.right.cols() != f.cols())
            throw Error(Errc::ShapeMismatch, "'" + t.var + "' in block " + block.label);
        f += (t.left * xt * t.right) * t.scale;
    }
    return f;
}

void require_symmetric(const Mat& f, const std::string& label) {
    const double scale = std::max(1.0, f.max_abs());
    for (std::size_t i = 0; i < f.rows(); ++i)
        for (std::size_t j = i + 1; j < f.cols(); ++j)
            if (std::abs(f(i, j) - f(j, i)) > 1e-10 * scale)
                throw Error(Errc::IllPosed, "block " + label + " is not symmetric as constructed");
}

} // namespace

Evaluation evaluate(const AffineBlock& block, const Assignment& assignment) {
    Mat f = assemble(block, assignment);
    require_symmetric(f, block.label);
    f = f.sym();
    const auto eig = sym_eig(f);
    const double margin = is_negative(block.sense) ? eig.values.back() : eig.values.front();
    return {std::move(f), margin};
}

bool block_satisfied(Sense sense, double extreme, const SolverOptions& opts) {
    const double signed_margin = is_negative(sense) ? -extreme : extreme;
    return is_strict(sense) ? signed_margin >= opts.margin : signed_margin >= -opts.psd_tolerance;
}

std::vector<BlockMargin> certify(const LmiProblem& p, const Assignment& a, const SolverOptions& opts) {
    std::vector<BlockMargin> out;
    for (const auto& b : p.blocks) {
        const auto ev = evaluate(b, a);
        const Mat signed_value = is_negative(b.sense) ? -ev.value : ev.value;
        const double threshold = is_strict(b.sense) ? opts.margin : -opts.psd_tolerance;
        out.push_back({b.label, b.sense, ev.margin, is_pd(signed_value, threshold).holds});
    }
    return out;
}

double objective_value(const TraceObjective& obj, const Assignment& a) {
    double v = 0.0;
    for (const auto& e : obj.entries) {
        const auto it = a.find(e.var);
        if (it == a.end()) throw Error(Errc::MissingVariable, "'" + e.var + "' in objective");
        v += (e.weight * it->second).trace();
    }
    return v;
}

// ---------------------------------------------------------------------------
// Vectorized form: each block becomes G(x) = G0 + sum_k x_k G_k that must stay
// positive definite, with sign and strict margin folded in.

namespace {

// Strict blocks are solved against a slightly larger shift so that the
// independent re-check at opts.margin always has room.
constexpr double kInternalMarginFactor = 1.1;

struct Slot {
    std::string name;
    std::size_t offset = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    bool symmetric = true;

    [[nodiscard]] std::size_t count() const { return symmetric ? rows * (rows + 1) / 2 : rows * cols; }
};

struct CompiledBlock {
    Mat g0;
    std::vector<std::pair<std::size_t, Mat>> coeffs; // coordinate, G_k (nonzero only)
};

struct Compiled {
    std::vector<Slot> slots;
    std::vector<CompiledBlock> blocks;
    std::size_t dim = 0;
    std::size_t barrier_degree = 0; // sum of block sizes plus the radius constraint
    Vec cost;                       // empty when no objective
};

Mat basis_matrix(const Slot& s, std::size_t local) {
    Mat e(s.rows, s.cols);
    if (s.symmetric) {
        std::size_t k = 0;
        for (std::size_t i = 0; i < s.rows; ++i)
            for (std::size_t j = i; j < s.rows; ++j, ++k)
                if (k == local) {
                    e(i, j) = 1.0;
                    e(j, i) = 1.0;
                    return e;
                }
    }
    e(local / s.cols, local % s.cols) = 1.0;
    return e;
}

Compiled compile(const LmiProblem& p, const SolverOptions& opts) {
    Compiled c;
    for (const auto& v : p.variables) {
        if (v.rows == 0 || v.cols == 0) throw Error(Errc::IllPosed, "variable '" + v.name + "' has zero dimension");
        if (v.symmetric && v.rows != v.cols)
            throw Error(Errc::ShapeMismatch, "symmetric variable '" + v.name + "' must be square");
        Slot s{v.name, c.dim, v.rows, v.cols, v.symmetric};
        c.dim += s.count();
        c.slots.push_back(s);
    }
    auto slot_of = [&](const std::string& name) -> const Slot& {
        for (const auto& s : c.slots)
            if (s.name == name) return s;
        throw Error(Errc::MissingVariable, "'" + name + "' is not declared");
    };

    for (const auto& b : p.blocks) {
        if (b.dim() == 0) throw Error(Errc::IllPosed, "block " + b.label + " has zero dimension");
        if (!b.constant.square()) throw Error(Errc::ShapeMismatch, "block " + b.label + " constant not square");
        require_symmetric(b.constant, b.label);
        const double sign = is_negative(b.sense) ? -1.0 : 1.0;
        const double shift = is_strict(b.sense) ? kInternalMarginFactor * opts.margin : 0.0;

        CompiledBlock cb;
        cb.g0 = b.constant.sym() * sign - Mat::identity(b.dim()) * shift;
        std::map<std::size_t, Mat> coeffs;
        for (const auto& t : b.terms) {
            const Slot& s = slot_of(t.var);
            const std::size_t xr = t.transpose ? s.cols : s.rows;
            const std::size_t xc = t.transpose ? s.rows : s.cols;
            if (t.left.rows() != b.dim() || t.left.cols() != xr || t.right.rows() != xc || t.right.cols() != b.dim())
                throw Error(Errc::ShapeMismatch, "term on '" + t.var + "' in block " + b.label);
            for (std::size_t local = 0; local < s.count(); ++local) {
                const Mat e = basis_matrix(s, local);
                Mat g = t.left * (t.transpose ? e.transpose() : e) * t.right * (t.scale * sign);
                if (g.max_abs() == 0.0) continue;
                auto [it, fresh] = coeffs.try_emplace(s.offset + local, std::move(g));
                if (!fresh) it->second += g;
            }
        }
        for (auto& [k, g] : coeffs) {
            require_symmetric(g, b.label);
            cb.coeffs.emplace_back(k, g.sym());
        }
        c.barrier_degree += b.dim();
        c.blocks.push_back(std::move(cb));
    }
    c.barrier_degree += 1;

    if (p.objective) {
        c.cost.assign(c.dim, 0.0);
        for (const auto& e : p.objective->entries) {
            const Slot& s = slot_of(e.var);
            if (e.weight.rows() != s.cols || e.weight.cols() != s.rows)
                throw Error(Errc::ShapeMismatch, "objective weight for '" + e.var + "'");
            for (std::size_t local = 0; local < s.count(); ++local)
                c.cost[s.offset + local] += (e.weight * basis_matrix(s, local)).trace();
        }
    }
    return c;
}

Vec flatten(const Compiled& c, const Assignment& a) {
    Vec x(c.dim, 0.0);
    for (const auto& s : c.slots) {
        const auto it = a.find(s.name);
        if (it == a.end()) throw Error(Errc::MissingVariable, "'" + s.name + "' missing from assignment");
        const Mat& m = it->second;
        if (m.rows() != s.rows || m.cols() != s.cols) throw Error(Errc::ShapeMismatch, "assignment for '" + s.name + "'");
        std::size_t k = s.offset;
        if (s.symmetric) {
            for (std::size_t i = 0; i < s.rows; ++i)
                for (std::size_t j = i; j < s.rows; ++j) x[k++] = 0.5 * (m(i, j) + m(j, i));
        } else {
            for (double v : m.entries()) x[k++] = v;
        }
    }
    return x;
}

Assignment unflatten(const Compiled& c, std::span<const double> x) {
    Assignment a;
    for (const auto& s : c.slots) {
        Mat m(s.rows, s.cols);
        std::size_t k = s.offset;
        if (s.symmetric) {
            for (std::size_t i = 0; i < s.rows; ++i)
                for (std::size_t j = i; j < s.rows; ++j) m(i, j) = m(j, i) = x[k++];
        } else {
            for (double& v : m.entries()) v = x[k++];
        }
        a.emplace(s.name, std::move(m));
    }
    return a;
}

std::optional<Mat> cholesky(const Mat& a) {
    const std::size_t n = a.rows();
    Mat l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0.0) || !std::isfinite(d)) return std::nullopt;
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

Vec cholesky_solve(const Mat& l, std::span<const double> b) {
    const std::size_t n = l.rows();
    Vec y(b.begin(), b.end());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < i; ++k) y[i] -= l(i, k) * y[k];
        y[i] /= l(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t k = i + 1; k < n; ++k) y[i] -= l(k, i) * y[k];
        y[i] /= l(i, i);
    }
    return y;
}

Mat cholesky_inverse(const Mat& l) {
    const std::size_t n = l.rows();
    Mat inv(n, n);
    Vec e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        std::fill(e.begin(), e.end(), 0.0);
        e[j] = 1.0;
        const Vec col = cholesky_solve(l, e);
        for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
    }
    return inv;
}

/// Log-barrier objective over z = x (or z = (x, t) in phase 1, where every
/// block is relaxed to G(x) - t·I).
class Barrier {
public:
    Barrier(const Compiled& c, double radius, bool phase1) : c_(c), radius2_(radius * radius), phase1_(phase1) {}

    [[nodiscard]] std::size_t size() const { return c_.dim + (phase1_ ? 1 : 0); }

    Mat block_value(std::size_t b, std::span<const double> z) const {
        const auto& cb = c_.blocks[b];
        Mat g = cb.g0;
        for (const auto& [k, gk] : cb.coeffs) {
            const double xk = z[k];
            if (xk == 0.0) continue;
            auto dst = g.entries();
            auto src = gk.entries();
            for (std::size_t q = 0; q < dst.size(); ++q) dst[q] += xk * src[q];
        }
        if (phase1_) {
            const double t = z[c_.dim];
            for (std::size_t i = 0; i < g.rows(); ++i) g(i, i) -= t;
        }
        return g;
    }

    double radius_slack(std::span<const double> z) const {
        double s = radius2_;
        for (std::size_t k = 0; k < c_.dim; ++k) s -= z[k] * z[k];
        return s;
    }

    /// Barrier value, or +inf outside the domain.
    double value(std::span<const double> z) const {
        double f = 0.0;
        for (std::size_t b = 0; b < c_.blocks.size(); ++b) {
            const auto l = cholesky(block_value(b, z));
            if (!l) return std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < l->rows(); ++i) f -= 2.0 * std::log((*l)(i, i));
        }
        const double s = radius_slack(z);
        if (!(s > 0.0)) return std::numeric_limits<double>::infinity();
        return f - std::log(s);
    }

    bool inside(std::span<const double> z) const { return std::isfinite(value(z)); }

    /// Gradient and Hessian of the barrier at an interior point.
    void derivatives(std::span<const double> z, Vec& grad, Mat& hess) const {
        const std::size_t n = size();
        grad.assign(n, 0.0);
        hess = Mat(n, n);
        for (std::size_t b = 0; b < c_.blocks.size(); ++b) {
            const auto& cb = c_.blocks[b];
            const auto l = cholesky(block_value(b, z));
            if (!l) throw Error(Errc::IllPosed, "barrier derivatives requested outside the domain");
            const Mat ginv = cholesky_inverse(*l);
            std::vector<std::pair<std::size_t, Mat>> m;
            m.reserve(cb.coeffs.size() + 1);
            for (const auto& [k, gk] : cb.coeffs) m.emplace_back(k, ginv * gk);
            if (phase1_) m.emplace_back(c_.dim, -ginv);
            const std::size_t d = ginv.rows();
            for (std::size_t p = 0; p < m.size(); ++p) {
                const auto& [kp, mp] = m[p];
                grad[kp] -= mp.trace();
                for (std::size_t q = p; q < m.size(); ++q) {
                    const auto& [kq, mq] = m[q];
                    double h = 0.0;
                    for (std::size_t a = 0; a < d; ++a)
                        for (std::size_t bb = 0; bb < d; ++bb) h += mp(a, bb) * mq(bb, a);
                    hess(kp, kq) += h;
                    if (kp != kq) hess(kq, kp) += h;
                }
            }
        }
        const double s = radius_slack(z);
        for (std::size_t k = 0; k < c_.dim; ++k) {
            grad[k] += 2.0 * z[k] / s;
            hess(k, k) += 2.0 / s;
            for (std::size_t j = 0; j < c_.dim; ++j) hess(k, j) += 4.0 * z[k] * z[j] / (s * s);
        }
    }

private:
    const Compiled& c_;
    double radius2_;
    bool phase1_;
};

struct CenteringOutcome {
    int steps = 0;
    bool stalled = false;
};

/// Damped Newton on tau·costᵀz + barrier(z), starting from an interior z.
CenteringOutcome center(const Barrier& barrier, std::span<const double> cost, double tau, Vec& z, int max_steps) {
    CenteringOutcome out;
    const std::size_t n = barrier.size();
    auto total = [&](std::span<const double> p) {
        double v = barrier.value(p);
        if (!std::isfinite(v)) return v;
        for (std::size_t k = 0; k < cost.size(); ++k) v += tau * cost[k] * p[k];
        return v;
    };

    double f = total(z);
    Vec grad;
    Mat hess;
    for (; out.steps < max_steps; ++out.steps) {
        barrier.derivatives(z, grad, hess);
        for (std::size_t k = 0; k < cost.size(); ++k) grad[k] += tau * cost[k];

        std::optional<Mat> l;
        double jitter = 0.0;
        const double diag_scale = std::max(hess.trace() / static_cast<double>(n), 1e-300);
        for (int attempt = 0; attempt < 12 && !l; ++attempt) {
            Mat h = hess;
            for (std::size_t k = 0; k < n; ++k) h(k, k) += jitter;
            l = cholesky(h);
            jitter = jitter == 0.0 ? 1e-14 * diag_scale : jitter * 100.0;
        }
        if (!l) {
            out.stalled = true;
            break;
        }
        Vec step = cholesky_solve(*l, grad);
        for (double& v : step) v = -v;
        const double decrement2 = -dot(grad, step);
        if (!(decrement2 > 0.0) || decrement2 < 1e-12) break;

        double alpha = 1.0;
        Vec trial(n);
        bool accepted = false;
        while (alpha > 1e-14) {
            for (std::size_t k = 0; k < n; ++k) trial[k] = z[k] + alpha * step[k];
            const double ft = total(trial);
            if (std::isfinite(ft) && ft <= f - 0.25 * alpha * decrement2) {
                z = trial;
                f = ft;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            out.stalled = true;
            break;
        }
    }
    return out;
}

struct PhaseOneOutcome {
    bool feasible = false;
    Vec x;
    int steps = 0;
};

PhaseOneOutcome phase_one(const Compiled& c, const SolverOptions& opts, const Vec& x0) {
    Barrier barrier(c, opts.feasibility_radius, true);
    Vec z = x0;
    z.push_back(0.0);

    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < c.blocks.size(); ++b) {
        const auto eig = sym_eig(barrier.block_value(b, z));
        worst = std::min(worst, eig.values.front());
    }
    z.back() = worst - 1.0;

    PhaseOneOutcome out;
    Vec cost(barrier.size(), 0.0);
    cost.back() = -1.0;
    const double degree = static_cast<double>(c.barrier_degree);
    for (double mu = opts.mu_initial;; mu /= opts.mu_factor) {
        const auto step = center(barrier, cost, 1.0 / mu, z, opts.max_newton_steps);
        out.steps += step.steps;
        if (z.back() > 0.0) {
            out.feasible = true;
            break;
        }
        // Central-path gap bound: t* <= t + degree·mu.
        if (z.back() + degree * mu < 0.0 || mu <= opts.mu_final || step.stalled) break;
    }
    out.x.assign(z.begin(), z.end() - 1);
    return out;
}

FeasibilityResult finish(const LmiProblem& p, const Compiled& c, const Vec& x, bool solver_ok,
                         const SolverOptions& opts, int steps) {
    FeasibilityResult r;
    r.assignment = unflatten(c, x);
    r.margins = certify(p, r.assignment, opts);
    r.newton_steps = steps;
    const bool all_ok = std::all_of(r.margins.begin(), r.margins.end(), [](const auto& m) { return m.satisfied; });
    r.status = solver_ok && all_ok ? Status::Feasible : Status::InfeasibleBestEffort;
    if (p.objective) r.objective_value = objective_value(*p.objective, r.assignment);
    return r;
}

void require_nonempty(const LmiProblem& p) {
    if (p.blocks.empty()) throw Error(Errc::IllPosed, "problem has no blocks");
}

} // namespace

FeasibilityResult solve_feasibility(const LmiProblem& p, const SolverOptions& opts) {
    require_nonempty(p);
    const Compiled c = compile(p, opts);
    auto ph1 = phase_one(c, opts, Vec(c.dim, 0.0));
    if (!ph1.feasible) return finish(p, c, ph1.x, false, opts, ph1.steps);

    // Move to the analytic center of the feasible set intersected with the radius ball.
    Barrier barrier(c, opts.feasibility_radius, false);
    const auto centered = center(barrier, {}, 0.0, ph1.x, opts.max_newton_steps);
    return finish(p, c, ph1.x, true, opts, ph1.steps + centered.steps);
}

FeasibilityResult solve_min_trace(const LmiProblem& p, const SolverOptions& opts, const std::optional<Assignment>& start) {
    require_nonempty(p);
    if (!p.objective) throw Error(Errc::IllPosed, "solve_min_trace requires a trace objective");
    const Compiled c = compile(p, opts);
    Barrier barrier(c, opts.feasibility_radius, false);

    Vec x0;
    int steps = 0;
    if (start) {
        x0 = flatten(c, *start);
        if (!barrier.inside(x0)) throw Error(Errc::NoFeasibleStart, "start point is not strictly feasible");
    } else {
        LmiProblem plain = p;
        plain.objective.reset();
        const auto feas = solve_feasibility(plain, opts);
        if (feas.status != Status::Feasible) throw Error(Errc::NoFeasibleStart, "feasibility phase failed");
        x0 = flatten(c, feas.assignment);
        steps += feas.newton_steps;
        if (!barrier.inside(x0)) throw Error(Errc::NoFeasibleStart, "feasible point not interior");
    }

    Vec x = x0;
    for (double mu = opts.mu_initial;; mu /= opts.mu_factor) {
        const auto step = center(barrier, c.cost, 1.0 / mu, x, opts.max_newton_steps);
        steps += step.steps;
        if (mu <= opts.mu_final || step.stalled) break;
    }
    if (dot(c.cost, x) > dot(c.cost, x0)) x = x0;
    return finish(p, c, x, true, opts, steps);
}

// ---------------------------------------------------------------------------
// Cone complementarity

CclResult cone_complementarity(const LmiProblem& p_core, const CclCoupling& coupling, const SolverOptions& opts,
                               const CclAccept& accept, const CclProgress& progress) {
    const MatVar* vx = p_core.find(coupling.x);
    const MatVar* vh = p_core.find(coupling.xhat);
    if (!vx || !vh) throw Error(Errc::MissingVariable, "coupling variables not declared");
    if (!vx->symmetric || !vh->symmetric || vx->rows != vh->rows)
        throw Error(Errc::ShapeMismatch, "coupling variables must be symmetric and of equal size");
    const std::size_t n = vx->rows;

    LmiProblem plain = p_core;
    plain.objective.reset();
    const auto step1 = solve_feasibility(plain, opts);
    if (step1.status != Status::Feasible) throw Error(Errc::Step1Infeasible, "initial feasibility check failed");

    CclResult out;
    out.result = step1;
    Assignment previous = step1.assignment; // x_{k-1}
    Assignment current = step1.assignment;  // x_k
    const Mat id = Mat::identity(n);

    for (int k = 0; k < opts.max_iters; ++k) {
        LmiProblem linearized = plain;
        linearized.objective = TraceObjective{{{current.at(coupling.xhat), coupling.x}, {current.at(coupling.x), coupling.xhat}}};
        // Starting from x_{k-1} keeps the linearized objective sequence non-increasing.
        auto next = solve_min_trace(linearized, opts, previous);

        const Mat& px = next.assignment.at(coupling.x);
        const Mat& ph = next.assignment.at(coupling.xhat);
        const Mat prod = px * ph;
        CclIteration it{k, *next.objective_value, prod.trace(), (prod - id).norm_fro()};
        out.history.push_back(it);
        if (progress) progress(it);

        previous = std::move(current);
        current = next.assignment;
        out.result = std::move(next);

        if (it.residual < opts.delta && (!accept || accept(current))) {
            out.converged = true;
            break;
        }
    }
    if (!out.converged && out.result.status == Status::Feasible) out.result.status = Status::MaxIterations;
    return out;
}

} // namespace gcsync::lmi
