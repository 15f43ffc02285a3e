#include "orbitq/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include <Eigen/SparseLU>

#ifdef ORBITQ_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

namespace orbitq {

void TruncationSpec::validate() const {
    if (m_max < 8 || n_max < 8) throw InvalidParams("truncation levels must be >= 8");
    if (!(tol > 0.0)) throw InvalidParams("truncation tol must be > 0");
    if (max_level < std::max(m_max, n_max)) {
        throw InvalidParams("truncation max_level must be >= m_max and n_max");
    }
}

double Generator::outflow(int m, int n, int k) const {
    const std::size_t i = index(m, n, k);
    return -q.coeff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
}

Generator build_generator(const SystemParams& p, int m_max, int n_max) {
    validate(p);
    Generator g;
    g.params = p;
    g.m_max = m_max;
    g.n_max = n_max;
    const std::size_t size = static_cast<std::size_t>(m_max + 1) * static_cast<std::size_t>(n_max + 1) * 2;
    g.dropped.assign(size, 0.0);

    std::vector<Eigen::Triplet<double>> t;
    t.reserve(size * 4);
    const auto add = [&](std::size_t from, std::size_t to, double rate, double& out) {
        t.emplace_back(static_cast<int>(from), static_cast<int>(to), rate);
        out += rate;
    };
    for (int m = 0; m <= m_max; ++m) {
        for (int n = 0; n <= n_max; ++n) {
            // Idle server: a fresh arrival is served, or an orbit head retries.
            const std::size_t s0 = g.index(m, n, 0);
            double out0 = 0.0;
            add(s0, g.index(m, n, 1), p.lambda1 + p.lambda2, out0);
            if (m > 0) add(s0, g.index(m - 1, n, 1), p.mu1, out0);
            if (n > 0) add(s0, g.index(m, n - 1, 1), p.mu2, out0);
            t.emplace_back(static_cast<int>(s0), static_cast<int>(s0), -out0);

            // Busy server: completion, or a blocked arrival joins its orbit.
            const std::size_t s1 = g.index(m, n, 1);
            double out1 = 0.0;
            add(s1, g.index(m, n, 0), p.mu, out1);
            if (m < m_max) {
                add(s1, g.index(m + 1, n, 1), p.lambda1, out1);
            } else {
                g.dropped[s1] += p.lambda1;
            }
            if (n < n_max) {
                add(s1, g.index(m, n + 1, 1), p.lambda2, out1);
            } else {
                g.dropped[s1] += p.lambda2;
            }
            t.emplace_back(static_cast<int>(s1), static_cast<int>(s1), -out1);
        }
    }
    g.q.resize(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(size));
    g.q.setFromTriplets(t.begin(), t.end());
    return g;
}

Generator build_generator(const SystemParams& p, const TruncationSpec& spec) {
    spec.validate();
    return build_generator(p, spec.m_max, spec.n_max);
}

double StationarySolution::marginal_m(int m, int k) const {
    double s = 0.0;
    for (int n = 0; n <= n_max; ++n) s += at(m, n, k);
    return s;
}

double StationarySolution::marginal_n(int n, int k) const {
    double s = 0.0;
    for (int m = 0; m <= m_max; ++m) s += at(m, n, k);
    return s;
}

TruncationError::TruncationError(const std::string& what, StationarySolution last)
    : Error(what), last_(std::move(last)) {}

StationarySolution solve_truncated(const Generator& gen) {
    // pi Q = 0 with pi_0 fixed to 1: drop the balance equation and the unknown
    // of state 0, solve the remaining nonsingular system, then normalize.
    const auto n = static_cast<Eigen::Index>(gen.size());
    const Eigen::SparseMatrix<double, Eigen::ColMajor> qt = gen.q.transpose();
    const Eigen::SparseMatrix<double, Eigen::ColMajor> a = qt.bottomRightCorner(n - 1, n - 1);
    const Eigen::VectorXd rhs = -Eigen::VectorXd(qt.col(0)).tail(n - 1);

    Eigen::VectorXd x;
#ifdef ORBITQ_HAVE_UMFPACK
    Eigen::UmfPackLU<Eigen::SparseMatrix<double>> lu;
#else
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
#endif
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw NumericalError("oracle: sparse LU factorization failed");
    x = lu.solve(rhs);
    if (lu.info() != Eigen::Success) throw NumericalError("oracle: sparse LU solve failed");

    StationarySolution ss;
    ss.params = gen.params;
    ss.m_max = gen.m_max;
    ss.n_max = gen.n_max;
    ss.probabilities.resize(gen.size());
    ss.probabilities[0] = 1.0;
    for (Eigen::Index i = 1; i < n; ++i) ss.probabilities[static_cast<std::size_t>(i)] = x[i - 1];
    double total = 0.0;
    for (double v : ss.probabilities) total += v;
    for (double& v : ss.probabilities) v /= total;

    const Eigen::Map<const Eigen::VectorXd> pi(ss.probabilities.data(), n);
    const Eigen::VectorXd balance = qt * pi;
    ss.residual = balance.cwiseAbs().maxCoeff();

    for (int m = 0; m <= ss.m_max; ++m) {
        for (int k = 0; k < 2; ++k) ss.rim_n += ss.at(m, ss.n_max, k);
    }
    for (int nn = 0; nn <= ss.n_max; ++nn) {
        for (int k = 0; k < 2; ++k) ss.rim_m += ss.at(ss.m_max, nn, k);
    }
    ss.boundary_mass = ss.rim_m + ss.rim_n;
    for (int k = 0; k < 2; ++k) ss.boundary_mass -= ss.at(ss.m_max, ss.n_max, k);
    return ss;
}

StationarySolution solve_stationary(const SystemParams& p, const TruncationSpec& spec) {
    spec.validate();
    int m_max = spec.m_max;
    int n_max = spec.n_max;
    StationarySolution ss = solve_truncated(build_generator(p, m_max, n_max));
    while (ss.boundary_mass >= spec.tol) {
        const bool grow_m = ss.rim_m >= 0.5 * spec.tol && m_max < spec.max_level;
        const bool grow_n = ss.rim_n >= 0.5 * spec.tol && n_max < spec.max_level;
        std::ostringstream diag;
        diag.precision(6);
        diag << "truncation insufficient: boundary mass " << ss.boundary_mass << " >= tol " << spec.tol
             << " at m_max=" << m_max << ", n_max=" << n_max << " (rim m " << ss.rim_m << ", rim n "
             << ss.rim_n << ", max_level " << spec.max_level << ")";
        if (!grow_m && !grow_n) throw TruncationError(diag.str() + "; level cap reached", ss);
        if (grow_m) m_max = std::min(2 * m_max, spec.max_level);
        if (grow_n) n_max = std::min(2 * n_max, spec.max_level);
        StationarySolution next = solve_truncated(build_generator(p, m_max, n_max));
        // A stable chain loses rim mass geometrically; an unstable one piles it up.
        if (next.boundary_mass > 0.5 * ss.boundary_mass) {
            throw TruncationError(diag.str() + "; rim mass not decaying (now " +
                                      std::to_string(next.boundary_mass) + " at m_max=" +
                                      std::to_string(m_max) + ", n_max=" + std::to_string(n_max) + ")",
                                  std::move(next));
        }
        ss = std::move(next);
    }
    return ss;
}

PerformanceMeasures oracle_measures(const StationarySolution& ss) {
    PerformanceMeasures om;
    for (int m = 0; m <= ss.m_max; ++m) {
        for (int n = 0; n <= ss.n_max; ++n) {
            const double p0 = ss.at(m, n, 0);
            const double p1 = ss.at(m, n, 1);
            om.p_busy += p1;
            om.eq1 += m * (p0 + p1);
            om.eq2 += n * (p0 + p1);
            if (m == 0) {
                om.p_q1_empty_idle += p0;
                om.dH01 += n * p0;
            }
            if (n == 0) {
                om.p_q2_empty_idle += p0;
                om.dH10 += m * p0;
            }
        }
    }
    om.p_empty = ss.at(0, 0, 0);
    om.el = om.p_busy;
    return om;
}

ComparisonReport compare(const PerformanceMeasures& analytic, const PerformanceMeasures& oracle, double rel_tol,
                         double boundary_mass, bool oracle_converged) {
    ComparisonReport rep;
    rep.rel_tol = rel_tol;
    rep.boundary_mass = boundary_mass;
    rep.pass = true;
    const auto a = analytic.fields();
    const auto o = oracle.fields();
    for (std::size_t i = 0; i < a.size(); ++i) {
        FieldComparison f;
        f.name = std::string(a[i].first);
        f.analytic = a[i].second;
        f.oracle = o[i].second;
        const double diff = std::abs(f.analytic - f.oracle);
        f.deviation = f.oracle != 0.0 ? diff / std::abs(f.oracle) : diff;
        f.pass = f.deviation <= rel_tol;
        if (!f.pass) rep.pass = false;
        if (rep.worst_field.empty() || f.deviation > rep.worst_deviation) {
            rep.worst_field = f.name;
            rep.worst_deviation = f.deviation;
        }
        rep.fields.push_back(std::move(f));
    }
    rep.elevated_uncertainty = !oracle_converged || boundary_mass > 1e-2 * rel_tol;
    return rep;
}

void write_distribution_csv(std::ostream& out, const StationarySolution& ss) {
    const auto old_precision = out.precision(17);
    out << "m,n,k,probability\n";
    for (int m = 0; m <= ss.m_max; ++m) {
        for (int n = 0; n <= ss.n_max; ++n) {
            for (int k = 0; k < 2; ++k) out << m << ',' << n << ',' << k << ',' << ss.at(m, n, k) << '\n';
        }
    }
    out.precision(old_precision);
}

}  // namespace orbitq
