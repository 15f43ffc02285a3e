#include "orbitq/measures.hpp"

#include <algorithm>
#include <cmath>

namespace orbitq {

namespace {

// Relative size of mu mu2 - alpha lambda2 below which the closed E[Q2]
// formula loses too many digits to cancellation.
constexpr double kDegenerateRel = 1e-3;

struct OrientedMeasures {
    PerformanceMeasures m;
    bool eq2_fallback = false;
};

OrientedMeasures evaluate(const BvpSolution& sol) {
    const SystemParams& p = sol.params();
    OrientedMeasures out;
    out.m.p_busy = p.lambda() / p.mu;
    out.m.el = out.m.p_busy;
    out.m.p_q1_empty_idle = sol.H01();
    out.m.p_q2_empty_idle = sol.H10();
    out.m.p_empty = p_empty(sol);
    out.m.dH10 = dH10(sol);
    out.m.dH01 = dH01(sol);
    out.m.eq1 = expected_Q1(sol);
    out.eq2_fallback = eq2_formula_degenerate(sol);
    out.m.eq2 = out.eq2_fallback ? expected_total_diagonal(sol) - out.m.eq1 : expected_Q2_formula(sol);
    return out;
}

// For an exchangeable system the two orbit labels are the same quantity;
// averaging the two evaluations makes relabeling exact.
PerformanceMeasures symmetrize(PerformanceMeasures m) {
    const auto mean = [](double& a, double& b) { a = b = 0.5 * (a + b); };
    mean(m.p_q1_empty_idle, m.p_q2_empty_idle);
    mean(m.eq1, m.eq2);
    mean(m.dH10, m.dH01);
    return m;
}

}  // namespace

PerformanceMeasures PerformanceMeasures::swapped() const {
    PerformanceMeasures s = *this;
    std::swap(s.p_q1_empty_idle, s.p_q2_empty_idle);
    std::swap(s.eq1, s.eq2);
    std::swap(s.dH10, s.dH01);
    return s;
}

BoundaryValues closed_boundary_values(const SystemParams& p) {
    const StabilityReport report = check_stability(p);
    if (!report.stable()) throw NotStable(report);
    const double load = p.lambda() / p.mu;
    return {load, 1.0 - load * (1.0 + p.lambda1 / p.mu1), 1.0 - load * (1.0 + p.lambda2 / p.mu2)};
}

double dH10(const BvpSolution& sol) { return derivative_H10(sol); }

double dH01(const BvpSolution& sol) { return derivative_H01(sol); }

double expected_Q1(const BvpSolution& sol) {
    const SystemParams& p = sol.params();
    const double alpha = sol.derived().alpha;
    const double den = p.mu * p.mu1 - alpha * p.lambda1;
    return (alpha + p.mu) * p.lambda1 * p.mu1 / (den * den) *
               ((alpha - p.mu1) * sol.H01() - p.mu2 * sol.H10()) -
           p.mu2 * (p.lambda1 + p.mu1) / den * dH10(sol);
}

bool eq2_formula_degenerate(const BvpSolution& sol) {
    const SystemParams& p = sol.params();
    const double a = p.mu * p.mu2;
    const double b = sol.derived().alpha * p.lambda2;
    return std::abs(a - b) < kDegenerateRel * (a + b);
}

double expected_Q2_formula(const BvpSolution& sol) {
    if (eq2_formula_degenerate(sol)) {
        throw NumericalError("E[Q2] closed formula: mu*mu2 - alpha*lambda2 is numerically zero");
    }
    const SystemParams& p = sol.params();
    const double alpha = sol.derived().alpha;
    const double den = p.mu * p.mu2 - alpha * p.lambda2;
    return (alpha + p.mu) * p.lambda2 * p.mu2 / (den * den) *
               ((alpha - p.mu2) * sol.H10() - p.mu1 * sol.H01()) -
           p.mu1 * (p.lambda2 + p.mu2) / den * dH01(sol);
}

double expected_total_diagonal(const BvpSolution& sol) {
    // H0(t,t) = (lambda t - mu) g(t) / (hat_lambda t - hat_mu1 - hat_mu2),
    // g(t) = mu2 H0(t,0) + mu1 H0(0,t), and H1 follows from H0.
    const SystemParams& p = sol.params();
    const DerivedParams& dp = sol.derived();
    const double lam = p.lambda();
    const double den = dp.hat_lambda - dp.hat_mu1 - dp.hat_mu2;
    if (std::abs(den) < 1e-12 * (dp.hat_lambda + dp.hat_mu1 + dp.hat_mu2)) {
        throw NumericalError("diagonal identity: hat_lambda = hat_mu1 + hat_mu2");
    }
    const double g = p.mu2 * sol.H10() + p.mu1 * sol.H01();
    const double dg = p.mu2 * dH10(sol) + p.mu1 * dH01(sol);
    const double dh0 = (lam * g + (lam - p.mu) * dg) / den - (lam - p.mu) * g * dp.hat_lambda / (den * den);
    return (1.0 + dp.alpha / p.mu) * dh0 - dg / p.mu;
}

double expected_Q2(const BvpSolution& sol) {
    if (eq2_formula_degenerate(sol)) return expected_total_diagonal(sol) - expected_Q1(sol);
    return expected_Q2_formula(sol);
}

double p_empty(const BvpSolution& sol) {
    const auto& z = sol.nodes();
    const auto& lj = sol.log_J();
    const cplx s = contour::integrate(sol.exec(), z, [&](std::size_t k) { return lj[k] / (z[k] * (1.0 - z[k])); });
    double out = sol.H10() * std::exp(s.real());
    if (sol.r() == 1) out *= (sol.x0() - 1.0) / sol.x0();
    return out;
}

double single_orbit_EQ(double lambda2, double mu, double mu2) {
    const double den = mu * mu2 - lambda2 * lambda2 - lambda2 * mu2;
    if (!(den > 0.0)) {
        throw InvalidParams("single-orbit system is unstable: mu*mu2 - lambda2^2 - lambda2*mu2 <= 0");
    }
    return lambda2 * lambda2 * (lambda2 + mu + mu2) / (mu * den);
}

MeasureReport compute_measures(const SystemParams& p, const MeasureOptions& options) {
    MeasureReport report;
    report.stability = check_stability(p);
    const OrientedParams oriented = canonical_orientation(p);
    report.swapped = oriented.swapped;

    const BvpSolution sol = BvpSolution::solve(oriented.params, options.bvp);
    const OrientedMeasures base = evaluate(sol);
    report.node_count = sol.contour().node_count;

    PerformanceMeasures err;
    if (options.estimate_error) {
        BvpOptions fine = options.bvp;
        fine.node_count = 2 * sol.contour().node_count;
        fine.max_nodes = std::max(fine.max_nodes, fine.node_count);
        fine.fixed_nodes = true;
        const OrientedMeasures refined = evaluate(BvpSolution::solve(oriented.params, fine));
        const auto a = base.m.fields();
        const auto b = refined.m.fields();
        std::array<double, PerformanceMeasures::kFieldCount> d{};
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::abs(a[i].second - b[i].second);
        err = {d[0], d[1], d[2], d[3], d[4], d[5], d[6], d[7], d[8]};
    }

    PerformanceMeasures values = base.m;
    if (oriented.params == orbitq::swapped(oriented.params)) {
        values = symmetrize(values);
        err = symmetrize(err);
    }
    report.values = oriented.swapped ? values.swapped() : values;
    report.error = oriented.swapped ? err.swapped() : err;
    (oriented.swapped ? report.eq1_fallback : report.eq2_fallback) = base.eq2_fallback;
    return report;
}

}  // namespace orbitq
