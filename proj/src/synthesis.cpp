#include "gcsync/synthesis.hpp"

#include <algorithm>
#include <cmath>

namespace gcsync {

void AgentModel::validate() const {
    if (A.empty() || !A.square()) throw Error(Errc::ShapeMismatch, "A must be square and non-empty");
    if (B.rows() != A.rows() || B.cols() == 0) throw Error(Errc::ShapeMismatch, "B must have n rows");
    if (C.cols() != A.rows() || C.rows() == 0) throw Error(Errc::ShapeMismatch, "C must have n columns");
    if (!A.all_finite() || !B.all_finite() || !C.all_finite())
        throw Error(Errc::ShapeMismatch, "model matrices must be finite");
}

void CostWeights::validate(const AgentModel& model) const {
    if (Q.rows() != model.n() || Q.cols() != model.n()) throw Error(Errc::ShapeMismatch, "Q must be n x n");
    if (R.rows() != model.m() || R.cols() != model.m()) throw Error(Errc::ShapeMismatch, "R must be m x m");
    if (!is_pd(Q, 0.0).holds) throw Error(Errc::IllPosed, "Q must be positive definite");
    if (!is_pd(R, 0.0).holds) throw Error(Errc::IllPosed, "R must be positive definite");
}

void ProtocolGains::validate(const AgentModel& model) const {
    if (Ku.rows() != model.m() || Ku.cols() != model.n()) throw Error(Errc::ShapeMismatch, "Ku must be m x n");
    if (Kphi.rows() != model.n() || Kphi.cols() != model.d()) throw Error(Errc::ShapeMismatch, "Kphi must be n x d");
    if (!Ku.all_finite() || !Kphi.all_finite()) throw Error(Errc::ShapeMismatch, "gains must be finite");
}

namespace {

// Rows of the returned matrix are the agents' initial states.
Mat stacked_to_rows(std::span<const double> x0, std::size_t agent_count) {
    if (agent_count == 0 || x0.size() % agent_count != 0)
        throw Error(Errc::ShapeMismatch, "initial state length is not a multiple of the agent count");
    const std::size_t n = x0.size() / agent_count;
    return Mat(agent_count, n, std::vector<double>(x0.begin(), x0.end()));
}

double max_disagreement(const Mat& rows, TopologyKind kind) {
    const std::size_t N = rows.rows(), n = rows.cols();
    Vec ref(n, 0.0);
    if (kind == TopologyKind::Leaderless) {
        for (std::size_t j = 0; j < N; ++j)
            for (std::size_t k = 0; k < n; ++k) ref[k] += rows(j, k) / static_cast<double>(N);
    } else {
        for (std::size_t k = 0; k < n; ++k) ref[k] = rows(0, k);
    }
    double worst = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += (rows(j, k) - ref[k]) * (rows(j, k) - ref[k]);
        worst = std::max(worst, std::sqrt(s));
    }
    return worst;
}

void require_gamma(double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw Error(Errc::IllPosed, "gamma must be positive and finite");
}

void require_spectrum(double lambda2, double lambdaN) {
    if (!(lambda2 > 0.0) || lambdaN < lambda2) throw Error(Errc::BadSpectrum, "need 0 < lambda2 <= lambdaN");
}

lmi::AffineBlock positivity(const char* name, std::size_t n) {
    return lmi::BlockBuilder(std::string(name) + " > 0", {n}, lmi::Sense::PositiveDefinite)
        .term(0, 0, Mat::identity(n), name, false, Mat::identity(n))
        .build();
}

lmi::AffineBlock budget_block(std::size_t n, double gamma) {
    return lmi::BlockBuilder("budget: Px <= gamma I", {n}, lmi::Sense::NegativeSemidefinite)
        .term(0, 0, Mat::identity(n), var::Px, false, Mat::identity(n))
        .constant(0, 0, Mat::identity(n) * -gamma)
        .build();
}

lmi::AffineBlock design_block(const AgentModel& model, double lambda, const CostWeights& w, const std::string& label) {
    const std::size_t n = model.n(), m = model.m();
    const Mat In = Mat::identity(n);
    const Mat CtC = model.C.transpose() * model.C;
    return lmi::BlockBuilder(label, {n, n, m}, lmi::Sense::NegativeDefinite)
        .sym_term(0, model.A, var::PhatPhi, false, In)
        .sym_term(0, model.B, var::KhatU, false, In)
        .term(0, 1, In, var::PhatX, false, CtC, -lambda)
        .term(0, 2, In, var::KhatU, true, w.R)
        .sym_term(1, In, var::Px, false, model.A)
        .constant(1, 1, CtC * (-2.0 * lambda) + w.Q * (2.0 * lambda))
        .constant(2, 2, -w.R)
        .build();
}

} // namespace

double budget_coefficient(std::span<const double> x0, TopologyKind kind, std::size_t agent_count) {
    const Mat rows = stacked_to_rows(x0, agent_count);
    if (max_disagreement(rows, kind) < 1e-9)
        throw Error(Errc::AgreementInitialStates, "initial states are in agreement; the budget relation is undefined");
    const Mat M = relationship_matrix(kind, agent_count);
    const double coef = quad_form(kron(M, Mat::identity(rows.cols())), x0);
    if (!(coef > 0.0)) throw Error(Errc::AgreementInitialStates, "budget coefficient is not positive");
    return coef;
}

double cost_bound(std::span<const double> x0, TopologyKind kind, std::size_t agent_count, const Mat& Px) {
    const Mat rows = stacked_to_rows(x0, agent_count);
    if (Px.rows() != rows.cols() || !Px.square()) throw Error(Errc::ShapeMismatch, "Px must be n x n");
    return quad_form(kron(relationship_matrix(kind, agent_count), Px), x0);
}

lmi::LmiProblem assemble_design(const AgentModel& model, double lambda2, double lambdaN, const CostWeights& weights,
                                double gamma) {
    model.validate();
    weights.validate(model);
    require_spectrum(lambda2, lambdaN);
    require_gamma(gamma);
    const std::size_t n = model.n(), m = model.m();

    lmi::LmiProblem p;
    p.variables = {{var::Px, n, n, true}, {var::PhatX, n, n, true}, {var::PhatPhi, n, n, true}, {var::KhatU, m, n, false}};
    p.blocks.push_back(budget_block(n, gamma));
    p.blocks.push_back(design_block(model, lambda2, weights, "Xi_j at lambda2"));
    p.blocks.push_back(design_block(model, lambdaN, weights, "Xi_j at lambdaN"));
    p.blocks.push_back(lmi::BlockBuilder("coupling [[Px, I], [I, Phat_x]] >= 0", {n, n}, lmi::Sense::PositiveSemidefinite)
                           .term(0, 0, Mat::identity(n), var::Px, false, Mat::identity(n))
                           .term(1, 1, Mat::identity(n), var::PhatX, false, Mat::identity(n))
                           .constant(0, 1, Mat::identity(n))
                           .build());
    p.blocks.push_back(positivity(var::Px, n));
    p.blocks.push_back(positivity(var::PhatX, n));
    p.blocks.push_back(positivity(var::PhatPhi, n));
    return p;
}

lmi::AffineBlock analysis_block(const AgentModel& model, double lambda, const CostWeights& w, const ProtocolGains& g) {
    const std::size_t n = model.n(), m = model.m();
    const Mat In = Mat::identity(n);
    const Mat closed = model.A + model.B * g.Ku;
    const Mat KphiC = g.Kphi * model.C;
    const Mat error = model.A + KphiC * lambda;
    return lmi::BlockBuilder("Theta_j at lambda=" + std::to_string(lambda), {n, n, m}, lmi::Sense::NegativeDefinite)
        .sym_term(0, In, var::Pphi, false, closed)
        .term(0, 1, In, var::Pphi, false, KphiC, lambda)
        .constant(0, 2, g.Ku.transpose() * w.R)
        .sym_term(1, In, var::Px, false, error)
        .constant(1, 1, w.Q * (2.0 * lambda))
        .constant(2, 2, -w.R)
        .build();
}

lmi::LmiProblem assemble_analysis(const AgentModel& model, double lambda2, double lambdaN, const CostWeights& weights,
                                  const ProtocolGains& gains, double gamma) {
    model.validate();
    weights.validate(model);
    gains.validate(model);
    require_spectrum(lambda2, lambdaN);
    require_gamma(gamma);
    const std::size_t n = model.n();

    lmi::LmiProblem p;
    p.variables = {{var::Px, n, n, true}, {var::Pphi, n, n, true}};
    p.blocks.push_back(budget_block(n, gamma));
    auto lo = analysis_block(model, lambda2, weights, gains);
    lo.label = "Theta_j at lambda2";
    auto hi = analysis_block(model, lambdaN, weights, gains);
    hi.label = "Theta_j at lambdaN";
    p.blocks.push_back(std::move(lo));
    p.blocks.push_back(std::move(hi));
    p.blocks.push_back(positivity(var::Px, n));
    p.blocks.push_back(positivity(var::Pphi, n));
    return p;
}

lmi::LmiProblem assemble_controller(const AgentModel& model, double lambda2, double lambdaN,
                                    const CostWeights& weights, const Mat& Kphi, double gamma) {
    model.validate();
    weights.validate(model);
    require_spectrum(lambda2, lambdaN);
    require_gamma(gamma);
    const std::size_t n = model.n(), m = model.m();
    if (Kphi.rows() != n || Kphi.cols() != model.d()) throw Error(Errc::ShapeMismatch, "Kphi must be n x d");
    const Mat In = Mat::identity(n);
    const Mat KphiC = Kphi * model.C;

    lmi::LmiProblem p;
    p.variables = {{var::Px, n, n, true}, {var::PhatPhi, n, n, true}, {var::KhatU, m, n, false}};
    p.blocks.push_back(budget_block(n, gamma));
    for (const auto& [lambda, label] : {std::pair{lambda2, "controller at lambda2"}, {lambdaN, "controller at lambdaN"}})
        p.blocks.push_back(lmi::BlockBuilder(label, {n, n, m}, lmi::Sense::NegativeDefinite)
                               .sym_term(0, model.A, var::PhatPhi, false, In)
                               .sym_term(0, model.B, var::KhatU, false, In)
                               .constant(0, 1, KphiC * lambda)
                               .term(0, 2, In, var::KhatU, true, weights.R)
                               .sym_term(1, In, var::Px, false, model.A + KphiC * lambda)
                               .constant(1, 1, weights.Q * (2.0 * lambda))
                               .constant(2, 2, -weights.R)
                               .build());
    p.blocks.push_back(positivity(var::Px, n));
    p.blocks.push_back(positivity(var::PhatPhi, n));
    return p;
}

ProtocolGains gain_extraction(const Mat& Khat_u, const Mat& Phat_phi, const Mat& Phat_x, const Mat& C) {
    if (Phat_phi.rows() != Khat_u.cols() || Phat_x.rows() != C.cols())
        throw Error(Errc::ShapeMismatch, "gain extraction operand sizes");
    // Ku = Khat_u Phat_phi^{-1}  <=>  Phat_phiᵀ Kuᵀ = Khat_uᵀ
    const Mat KuT = solve(Phat_phi.transpose(), Khat_u.transpose());
    return {KuT.transpose(), -(Phat_x * C.transpose())};
}

namespace {

struct Network {
    Spectrum spectrum;
    double coefficient = 0.0;
    double gamma = 0.0;
};

Network prepare(const Topology& topology, std::span<const double> x0, double budget, const AgentModel& model) {
    if (!(budget > 0.0) || !std::isfinite(budget)) throw Error(Errc::IllPosed, "budget must be positive");
    if (x0.size() != topology.agent_count() * model.n())
        throw Error(Errc::ShapeMismatch, "initial states must have N·n entries");
    Network net;
    net.spectrum = spectrum(topology);
    net.coefficient = budget_coefficient(x0, topology.kind(), topology.agent_count());
    net.gamma = budget / net.coefficient;
    return net;
}

bool all_satisfied(const std::vector<lmi::BlockMargin>& margins) {
    return std::all_of(margins.begin(), margins.end(), [](const auto& m) { return m.satisfied; });
}

} // namespace

AnalysisCertificate analyze(const AgentModel& model, const Topology& topology, const CostWeights& weights,
                            const ProtocolGains& gains, std::span<const double> x0, double budget,
                            const lmi::SolverOptions& opts) {
    const Network net = prepare(topology, x0, budget, model);
    auto problem = assemble_analysis(model, net.spectrum.lambda2, net.spectrum.lambdaN, weights, gains, net.gamma);
    const std::size_t n = model.n();

    AnalysisCertificate cert;
    cert.budget = budget;
    cert.gamma = net.gamma;
    cert.budget_coefficient = net.coefficient;
    cert.lambda2 = net.spectrum.lambda2;
    cert.lambdaN = net.spectrum.lambdaN;

    // Cheap warm start: Px = Pphi = s·I along a geometric line search.
    std::optional<lmi::Assignment> start;
    for (double s = net.gamma; s > net.gamma * 1e-6 && !start; s *= 0.5) {
        lmi::Assignment a{{var::Px, Mat::identity(n) * s}, {var::Pphi, Mat::identity(n) * s}};
        lmi::SolverOptions strict = opts;
        strict.margin *= 1.2; // the barrier needs strict interiority
        strict.psd_tolerance = 0.0;
        if (all_satisfied(lmi::certify(problem, a, strict)) &&
            is_pd(Mat::identity(n) * net.gamma - a.at(var::Px), 0.0).holds)
            start = std::move(a);
    }
    if (!start) {
        const auto feas = lmi::solve_feasibility(problem, opts);
        cert.margins = feas.margins;
        if (feas.status != lmi::Status::Feasible) {
            cert.Px = feas.assignment.at(var::Px);
            cert.Pphi = feas.assignment.at(var::Pphi);
            return cert;
        }
        start = feas.assignment;
    }

    // Tighten the certificate: minimize the guaranteed cost tr(Px · X0ᵀ M X0).
    const Mat rows = stacked_to_rows(x0, topology.agent_count());
    const Mat W = rows.transpose() * relationship_matrix(topology.kind(), topology.agent_count()) * rows;
    problem.objective = lmi::TraceObjective{{{W, var::Px}}};
    const auto best = lmi::solve_min_trace(problem, opts, start);

    cert.Px = best.assignment.at(var::Px);
    cert.Pphi = best.assignment.at(var::Pphi);
    cert.margins = best.margins;
    cert.cost_bound = cost_bound(x0, topology.kind(), topology.agent_count(), cert.Px);
    cert.feasible = best.status == lmi::Status::Feasible && cert.cost_bound <= budget;
    return cert;
}

DesignReport design(const AgentModel& model, const Topology& topology, const CostWeights& weights,
                    std::span<const double> x0, double budget, const lmi::SolverOptions& opts,
                    const DesignProgress& progress) {
    const Network net = prepare(topology, x0, budget, model);
    const auto problem = assemble_design(model, net.spectrum.lambda2, net.spectrum.lambdaN, weights, net.gamma);

    DesignReport report;
    report.gamma = net.gamma;
    report.budget_coefficient = net.coefficient;
    report.lambda2 = net.spectrum.lambda2;
    report.lambdaN = net.spectrum.lambdaN;

    // With Kphi fixed by the coupled iterate, the controller half is convex in
    // (Px, Phat_phi, Khat_u); its analytic center gives well-conditioned Ku.
    std::optional<lmi::Assignment> refined;
    auto accept = [&](const lmi::Assignment& a) {
        try {
            const Mat Kphi = -(a.at(var::PhatX) * model.C.transpose());
            const auto ctrl = assemble_controller(model, net.spectrum.lambda2, net.spectrum.lambdaN, weights, Kphi,
                                                  net.gamma);
            auto feas = lmi::solve_feasibility(ctrl, opts);
            if (feas.status != lmi::Status::Feasible) return false;
            const auto gains =
                gain_extraction(feas.assignment.at(var::KhatU), feas.assignment.at(var::PhatPhi), a.at(var::PhatX),
                                model.C);
            report.certificate = analyze(model, topology, weights, gains, x0, budget, opts);
            if (!report.certificate.feasible) return false;
            report.gains = gains;
            refined = std::move(feas.assignment);
        } catch (const Error&) {
            return false;
        }
        return true;
    };

    lmi::CclResult ccl;
    try {
        ccl = lmi::cone_complementarity(problem, {var::Px, var::PhatX}, opts, accept, progress);
    } catch (const Error& e) {
        if (e.code() != Errc::Step1Infeasible) throw;
        // Decide whether the budget block is the binding obstruction.
        lmi::LmiProblem relaxed = problem;
        relaxed.blocks.erase(relaxed.blocks.begin());
        if (lmi::solve_feasibility(relaxed, opts).status == lmi::Status::Feasible)
            throw Error(Errc::BudgetTooSmall, "the cost budget cannot supply enough energy (budget block infeasible)");
        throw Error(Errc::Infeasible, "design criteria infeasible independent of the budget");
    }

    const auto& a = ccl.result.assignment;
    report.Px = a.at(var::Px);
    report.Phat_x = a.at(var::PhatX);
    report.Phat_phi = refined ? refined->at(var::PhatPhi) : a.at(var::PhatPhi);
    if (!refined) report.gains = gain_extraction(a.at(var::KhatU), a.at(var::PhatPhi), a.at(var::PhatX), model.C);
    report.history = ccl.history;
    report.iterations = static_cast<int>(ccl.history.size());
    report.margins = ccl.result.margins;
    if (!ccl.converged)
        throw Error(Errc::NotConverged, "cone complementarity did not converge in " + std::to_string(opts.max_iters) +
                                            " iterations");
    report.certified = report.certificate.feasible;
    return report;
}

} // namespace gcsync
