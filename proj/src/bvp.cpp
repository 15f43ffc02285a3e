#include "orbitq/bvp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

namespace orbitq {

namespace {

constexpr double kPi = std::numbers::pi;
// Target for nodes * log(decay ratio): e^-40 ~ 4e-18.
constexpr double kDigits = 40.0;
// Below this distance from t = 1, V(t) is taken from its Taylor expansion.
constexpr double kVLimitRadius = 1e-5;
constexpr double kKernelZeroRel = 1e-9;

double kernel_scale(const DerivedParams& dp) { return dp.hat_lambda + dp.hat_mu1 + dp.hat_mu2; }

std::size_t round_up_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p *= 2;
    return p;
}

}  // namespace

BvpOptions default_bvp_options() {
    BvpOptions opt;
    if (const char* env = std::getenv("ORBITQ_NODES"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0' || v < contour::kMinNodes || v % 2 != 0) {
            throw InvalidParams(std::string("ORBITQ_NODES must be an even integer >= 256 (got '") +
                                env + "')");
        }
        opt.node_count = static_cast<std::size_t>(v);
        opt.max_nodes = std::max(opt.max_nodes, opt.node_count);
    }
    return opt;
}

double compute_x0(const SystemParams& p) {
    const double lam = p.lambda();
    const double a = lam * p.lambda1 * (lam + p.mu1);
    const double b = (lam + p.mu1 - p.mu) * lam * p.mu1;
    const double c = -p.mu * p.mu1 * p.mu1;
    const double s = std::sqrt(b * b - 4.0 * a * c);
    // c < 0, so the roots have opposite signs; pick the form without cancellation.
    return b > 0.0 ? -2.0 * c / (b + s) : (s - b) / (2.0 * a);
}

int compute_r(const SystemParams& p, const DerivedParams& dp, double x0) {
    const double lam = p.lambda();
    const bool inside = x0 <= dp.contour_radius;
    const bool second =
        (lam + p.mu1) * x0 / (lam * x0 + p.mu1) <= std::sqrt(dp.hat_mu2 / dp.hat_lambda2);
    return inside && second ? 1 : 0;
}

UContext UContext::make(const SystemParams& oriented) {
    const StabilityReport report = check_stability(oriented);
    if (!report.stable()) throw NotStable(report);
    if (report.swapped) {
        throw InvalidParams("BVP requires alpha*lambda1 < mu*mu1; call normalize_orientation() first");
    }
    UContext ctx;
    ctx.params = oriented;
    ctx.derived = derive(oriented);
    ctx.x0 = compute_x0(oriented);
    ctx.r = compute_r(oriented, ctx.derived, ctx.x0);
    return ctx;
}

cplx U_of(cplx x, const UContext& ctx) {
    const SystemParams& p = ctx.params;
    const cplx h = branch_h(x, ctx.derived);
    const cplx a = coeff_A(x, h, p);
    const cplx b = coeff_B(x, h, p);
    const double scale = (p.mu + p.lambda()) * std::max(p.mu1, p.mu2) * std::norm(1.0 + std::abs(x));
    const double floor = 1e-14 * scale;
    if (std::abs(b) < floor || std::abs(a) < floor) {
        std::ostringstream msg;
        msg.precision(15);
        msg << "U(x) degenerate at x=" << x << ": |A|=" << std::abs(a) << ", |B|=" << std::abs(b);
        throw NumericalError(msg.str());
    }
    cplx u = a / b;
    if (ctx.r == 1) u /= (x - ctx.x0);
    return u;
}

cplx J_of(cplx z, const UContext& ctx) {
    const cplx u = U_of(z, ctx);
    return std::conj(u) / u;
}

int index_chi(std::span<const cplx> u_samples) {
    const contour::UnwrappedArg ua = contour::unwrap_argument(u_samples);
    const double chi = -ua.total_variation / kPi;
    const double rounded = std::round(chi);
    if (std::abs(chi - rounded) > 1e-6) {
        throw NumericalError("index: winding of U is not a multiple of pi (" + std::to_string(chi) + ")");
    }
    return static_cast<int>(rounded);
}

BvpSolution BvpSolution::solve(const SystemParams& oriented, const BvpOptions& options) {
    auto st = std::make_shared<State>();
    st->ctx = UContext::make(oriented);
    st->branches = branch_points(st->ctx.derived);
    st->exec = options.exec;
    const DerivedParams& dp = st->ctx.derived;
    const double radius = dp.contour_radius;

    if (st->ctx.r == 1 && std::abs(st->ctx.x0 - radius) <= 1e-9 * radius) {
        std::ostringstream msg;
        msg.precision(15);
        msg << "zero x0=" << st->ctx.x0 << " of U lies on the contour |x|=" << radius
            << "; refusing to integrate through it";
        throw NumericalError(msg.str());
    }

    std::size_t n = options.node_count;
    contour::ContourSpec::with_nodes(radius, n).validate();
    if (!options.fixed_nodes) {
        // Geometric rate of the trapezoidal rule: evaluation points reach |x| = 1
        // and log J is analytic out to the cut starting at x3.
        const double ratio = std::min(radius, st->branches.x3 / radius);
        n = std::max(n, contour::nodes_for_decay(ratio, kDigits, n, options.max_nodes));
    }

    std::vector<cplx> u;
    contour::UnwrappedArg ua;
    for (;;) {
        st->spec = contour::ContourSpec::with_nodes(radius, n);
        st->nodes = contour::make_nodes(st->spec);
        u.assign(n, cplx{});
        const UContext& ctx = st->ctx;
        const std::vector<cplx>& z = st->nodes;
        contour::sample(options.exec, std::span<cplx>(u), [&](std::size_t k) { return U_of(z[k], ctx); });
        ua = contour::unwrap_argument(u);
        if (ua.max_jump <= kPi / 2.0) break;
        if (n * 2 > std::max(options.max_nodes, options.node_count)) {
            throw NumericalError("arg U jumps by " + std::to_string(ua.max_jump) +
                                 " between nodes at the node cap " + std::to_string(n));
        }
        n *= 2;
    }

    st->chi = index_chi(u);
    if (st->chi != 0) {
        throw NumericalError("index chi=" + std::to_string(st->chi) +
                             " != 0: stability/orientation violated or grid too coarse");
    }
    st->max_jump = ua.max_jump;
    st->arg_u = std::move(ua.arg);
    st->log_j.resize(n);
    for (std::size_t k = 0; k < n; ++k) st->log_j[k] = cplx{0.0, -2.0 * st->arg_u[k]};

    const SystemParams& p = st->ctx.params;
    const double load = p.lambda() / p.mu;
    st->h10 = 1.0 - load * (1.0 + p.lambda2 / p.mu2);
    st->h01 = 1.0 - load * (1.0 + p.lambda1 / p.mu1);

    if (options.unit_nodes != 0) {
        contour::ContourSpec::with_nodes(1.0, options.unit_nodes).validate();
        st->unit_nodes = options.unit_nodes;
    } else {
        // V is analytic for y2 < |t| < y3. Interior evaluation points up to
        // |y| = exp(-36/M) are served by the Cauchy sum; try to put that
        // switch above y2 so points beyond it can use V directly.
        const double y2 = st->branches.y2;
        const std::size_t want = static_cast<std::size_t>(std::ceil(72.0 / std::log(1.0 / y2)));
        st->unit_nodes = std::min<std::size_t>(
            options.max_nodes,
            std::max(contour::nodes_for_decay(st->branches.y3, kDigits, 2048, options.max_nodes),
                     round_up_pow2(want)));
        st->unit_nodes = std::max<std::size_t>(st->unit_nodes, 2048);
    }

    BvpSolution sol;
    sol.s_ = st;
    const cplx g1 = gamma_integral(1.0, sol);
    st->d = std::pow(1.0 - st->ctx.x0, st->ctx.r) * st->h10 * std::exp(-g1.real());
    return sol;
}

cplx gamma_integral(cplx x, const BvpSolution& sol) {
    const auto& z = sol.nodes();
    const auto& lj = sol.log_J();
    return contour::integrate(sol.exec(), z, [&](std::size_t k) { return lj[k] / (z[k] - x); });
}

namespace {

void require_inside(cplx x, const BvpSolution& sol) {
    if (!(std::abs(x) < sol.derived().contour_radius)) {
        std::ostringstream msg;
        msg.precision(15);
        msg << "H0(x,0) requires |x| < " << sol.derived().contour_radius << " (got x=" << x << ")";
        throw std::domain_error(msg.str());
    }
}

cplx h0_x0_impl(cplx x, const BvpSolution& sol, contour::Exec exec) {
    const auto& z = sol.nodes();
    const auto& lj = sol.log_J();
    const cplx s = contour::integrate(exec, z, [&](std::size_t k) {
        return lj[k] * (x - 1.0) / ((z[k] - x) * (z[k] - 1.0));
    });
    cplx out = sol.H10() * std::exp(s);
    if (sol.r() == 1) out *= (1.0 - sol.x0()) / (x - sol.x0());
    return out;
}

cplx dh0_x0_impl(cplx x, cplx h0, const BvpSolution& sol, contour::Exec exec) {
    const auto& z = sol.nodes();
    const auto& lj = sol.log_J();
    cplx g = contour::integrate(exec, z, [&](std::size_t k) {
        const cplx d = z[k] - x;
        return lj[k] / (d * d);
    });
    if (sol.r() == 1) g -= 1.0 / (x - sol.x0());
    return h0 * g;
}

// V(t) = -A(k(t),t)/B(k(t),t) H0(k(t),0), continued analytically through t = 1.
cplx V_of(cplx t, const BvpSolution& sol, contour::Exec exec) {
    if (std::abs(t - 1.0) < kVLimitRadius) {
        return sol.H01() + derivative_H01(sol) * (t - 1.0);
    }
    const cplx k = branch_k(t, sol.derived());
    const cplx a = coeff_A(k, t, sol.params());
    const cplx b = coeff_B(k, t, sol.params());
    return -a / b * h0_x0_impl(k, sol, exec);
}

}  // namespace

const BvpSolution::UnitCircle& BvpSolution::unit_circle() const {
    std::call_once(s_->unit_once, [this] {
        const auto spec = contour::ContourSpec::with_nodes(1.0, s_->unit_nodes);
        UnitCircle uc;
        uc.nodes = contour::make_nodes(spec);
        uc.values.resize(uc.nodes.size());
        const auto& t = uc.nodes;
        // Outer loop parallel, inner quadrature serial.
        contour::sample(s_->exec, std::span<cplx>(uc.values),
                        [&](std::size_t j) { return V_of(t[j], *this, contour::Exec::Serial); });
        s_->unit = std::move(uc);
    });
    return s_->unit;
}

cplx solve_H0_x0(cplx x, const BvpSolution& sol) {
    require_inside(x, sol);
    return h0_x0_impl(x, sol, sol.exec());
}

cplx solve_dH0_x0(cplx x, const BvpSolution& sol) {
    require_inside(x, sol);
    const cplx h0 = h0_x0_impl(x, sol, sol.exec());
    return dh0_x0_impl(x, h0, sol, sol.exec());
}

double derivative_H10(const BvpSolution& sol) {
    const auto& z = sol.nodes();
    const auto& lj = sol.log_J();
    cplx g = contour::integrate(sol.exec(), z, [&](std::size_t k) {
        const cplx d = z[k] - 1.0;
        return lj[k] / (d * d);
    });
    if (sol.r() == 1) g += 1.0 / (sol.x0() - 1.0);
    return sol.H10() * g.real();
}

double derivative_H01(const BvpSolution& sol) {
    const RatioLimits lim = ratio_AB_limits_at_1(sol.params(), sol.derived());
    const KDerivatives kd = k_derivatives_at_1(sol.derived());
    return -lim.value * derivative_H10(sol) * kd.first - lim.slope * sol.H10();
}

cplx solve_H0_0y(cplx y, const BvpSolution& sol) {
    const double ay = std::abs(y);
    if (ay > 1.0 + 1e-12) {
        std::ostringstream msg;
        msg.precision(15);
        msg << "H0(0,y) requires |y| <= 1 (got y=" << y << ")";
        throw std::domain_error(msg.str());
    }
    const auto& bp = sol.branches();
    const double cauchy_limit = std::exp(-36.0 / static_cast<double>(sol.unit_node_count()));
    // Distance from the cut [y1, y2] on which k(t) is not analytic.
    const double cut_dist = std::abs(y - std::clamp(y.real(), bp.y1, bp.y2));
    if (ay > cauchy_limit && cut_dist > 1e-8) return V_of(y, sol, sol.exec());

    const auto& uc = sol.unit_circle();
    const auto& t = uc.nodes;
    const auto& v = uc.values;
    return contour::integrate(sol.exec(), t, [&](std::size_t j) { return v[j] / (t[j] - y); });
}

namespace {

// H0(x,y) from the functional equation given the two boundary values.
// `hx0_prime` is only called next to the kernel curve.
template <class Deriv>
cplx assemble_H0(cplx x, cplx y, cplx hx0, cplx h0y, const BvpSolution& sol, Deriv&& hx0_prime) {
    const SystemParams& p = sol.params();
    const DerivedParams& dp = sol.derived();
    const double scale = kernel_scale(dp);

    if (std::abs(y - 1.0) <= 1e-14) {
        // R, A, B share the factor (1-x) at y = 1.
        return (p.lambda1 * p.mu2 * x * hx0 + (p.lambda1 * x - p.mu) * p.mu1 * sol.H01()) /
               (dp.hat_lambda1 * x - dp.hat_mu1);
    }
    if (std::abs(x - 1.0) <= 1e-14) {
        const cplx den = dp.hat_lambda2 * y - dp.hat_mu2;
        if (std::abs(den) > kKernelZeroRel * scale) {
            return ((p.lambda2 * y - p.mu) * p.mu2 * sol.H10() + p.lambda2 * p.mu1 * y * h0y) / den;
        }
    }
    const cplx r = kernel_R(x, y, dp);
    if (std::abs(r) >= kKernelZeroRel * scale) {
        return (coeff_A(x, y, p) * hx0 + coeff_B(x, y, p) * h0y) / r;
    }
    // Removable singularity on R = 0: differentiate numerator and denominator in x.
    const cplx rx = kernel_R_dx(x, y, dp);
    if (std::abs(rx) < kKernelZeroRel * scale) {
        std::ostringstream msg;
        msg.precision(15);
        msg << "H_full: (x,y)=(" << x << ", " << y << ") is within |R|=" << std::abs(r)
            << " of a double kernel zero (|dR/dx|=" << std::abs(rx) << ")";
        throw NumericalError(msg.str());
    }
    return (coeff_A_dx(x, y, p) * hx0 + coeff_A(x, y, p) * hx0_prime() + coeff_B_dx(x, y, p) * h0y) / rx;
}

HPair finish(cplx h0, cplx hx0, cplx h0y, const BvpSolution& sol) {
    const SystemParams& p = sol.params();
    return {h0, (sol.derived().alpha * h0 - p.mu2 * hx0 - p.mu1 * h0y) / p.mu};
}

}  // namespace

HPair H_full(cplx x, cplx y, const BvpSolution& sol) {
    if (std::abs(x) > 1.0 + 1e-12 || std::abs(y) > 1.0 + 1e-12) {
        std::ostringstream msg;
        msg.precision(15);
        msg << "H_full requires |x|, |y| <= 1 (got x=" << x << ", y=" << y << ")";
        throw std::domain_error(msg.str());
    }
    const cplx hx0 = solve_H0_x0(x, sol);
    const cplx h0y = solve_H0_0y(y, sol);
    const cplx h0 = assemble_H0(x, y, hx0, h0y, sol, [&] { return solve_dH0_x0(x, sol); });
    return finish(h0, hx0, h0y, sol);
}

CoefficientGrid extract_coefficients(const BvpSolution& sol, int m_max, int n_max) {
    if (m_max < 0 || n_max < 0) throw std::invalid_argument("extract_coefficients: negative order");
    const DerivedParams& dp = sol.derived();
    const std::size_t nx = round_up_pow2(static_cast<std::size_t>(std::max(64, 4 * (m_max + 1))));
    const std::size_t ny = round_up_pow2(static_cast<std::size_t>(std::max(64, 4 * (n_max + 1))));
    const double ry = 0.5;

    const auto ty = contour::make_nodes(contour::ContourSpec::with_nodes(ry, std::max<std::size_t>(ny, 256)));
    const std::vector<cplx> ys = [&] {
        std::vector<cplx> out;
        const double step = 2.0 * kPi / static_cast<double>(ny);
        for (std::size_t l = 0; l < ny; ++l) out.push_back(std::polar(ry, step * (static_cast<double>(l) + 0.5)));
        return out;
    }();

    // Keep the x-circle away from the kernel curve R(x,y) = 0 over |y| = ry.
    double rx = 0.5;
    {
        const double candidates[] = {0.5, 0.4, 0.6, 0.3, 0.7, 0.25, 0.8};
        double best = -1.0;
        for (double c : candidates) {
            double worst = std::numeric_limits<double>::infinity();
            for (const cplx& y : ty) {
                const RootPair rp = roots_k(y, dp);
                worst = std::min({worst, std::abs(std::abs(rp.branch) - c), std::abs(std::abs(rp.sigma) - c)});
            }
            if (worst > best + 1e-12) {
                best = worst;
                rx = c;
            }
        }
    }
    std::vector<cplx> xs;
    {
        const double step = 2.0 * kPi / static_cast<double>(nx);
        for (std::size_t j = 0; j < nx; ++j) xs.push_back(std::polar(rx, step * (static_cast<double>(j) + 0.5)));
    }

    std::vector<cplx> hx(nx), hy(ny);
    contour::sample(sol.exec(), std::span<cplx>(hx), [&](std::size_t j) { return solve_H0_x0(xs[j], sol); });
    contour::sample(sol.exec(), std::span<cplx>(hy), [&](std::size_t l) { return solve_H0_0y(ys[l], sol); });

    std::vector<cplx> g0(nx * ny), g1(nx * ny);
    contour::sample(sol.exec(), std::span<cplx>(g0), [&](std::size_t idx) {
        const std::size_t j = idx / ny, l = idx % ny;
        return assemble_H0(xs[j], ys[l], hx[j], hy[l], sol,
                           [&] { return dh0_x0_impl(xs[j], hx[j], sol, contour::Exec::Serial); });
    });
    for (std::size_t idx = 0; idx < g0.size(); ++idx) {
        g1[idx] = finish(g0[idx], hx[idx / ny], hy[idx % ny], sol).h1;
    }

    CoefficientGrid grid;
    grid.m_max = m_max;
    grid.n_max = n_max;
    grid.p0.assign(static_cast<std::size_t>((m_max + 1) * (n_max + 1)), 0.0);
    grid.p1 = grid.p0;
    const double norm = 1.0 / static_cast<double>(nx * ny);
    for (int m = 0; m <= m_max; ++m) {
        for (int n = 0; n <= n_max; ++n) {
            cplx s0{0.0, 0.0}, s1{0.0, 0.0};
            for (std::size_t j = 0; j < nx; ++j) {
                const cplx wx = std::pow(xs[j], -m);
                for (std::size_t l = 0; l < ny; ++l) {
                    const cplx w = wx * std::pow(ys[l], -n);
                    s0 += g0[j * ny + l] * w;
                    s1 += g1[j * ny + l] * w;
                }
            }
            const auto i = static_cast<std::size_t>(m * (n_max + 1) + n);
            grid.p0[i] = (s0 * norm).real();
            grid.p1[i] = (s1 * norm).real();
        }
    }
    return grid;
}

}  // namespace orbitq
