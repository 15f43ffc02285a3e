#include "orbitq/kernel.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace orbitq {

cplx kernel_R(cplx x, cplx y, const DerivedParams& dp) {
    return dp.hat_lambda1 * (1.0 - x) * x * y + dp.hat_lambda2 * (1.0 - y) * x * y -
           dp.hat_mu1 * (1.0 - x) * y - dp.hat_mu2 * (1.0 - y) * x;
}

cplx coeff_A(cplx x, cplx y, const SystemParams& p) {
    return ((1.0 - y) * (p.lambda2 * y - p.mu) + p.lambda1 * (1.0 - x) * y) * p.mu2 * x;
}

cplx coeff_B(cplx x, cplx y, const SystemParams& p) {
    return ((1.0 - x) * (p.lambda1 * x - p.mu) + p.lambda2 * (1.0 - y) * x) * p.mu1 * y;
}

cplx kernel_R_dx(cplx x, cplx y, const DerivedParams& dp) {
    return dp.hat_lambda1 * (1.0 - 2.0 * x) * y + dp.hat_lambda2 * (1.0 - y) * y + dp.hat_mu1 * y -
           dp.hat_mu2 * (1.0 - y);
}

cplx coeff_A_dx(cplx x, cplx y, const SystemParams& p) {
    const cplx f = (1.0 - y) * (p.lambda2 * y - p.mu) + p.lambda1 * (1.0 - x) * y;
    return p.mu2 * (f - p.lambda1 * x * y);
}

cplx coeff_B_dx(cplx x, cplx y, const SystemParams& p) {
    const cplx gx = -(p.lambda1 * x - p.mu) + (1.0 - x) * p.lambda1 + p.lambda2 * (1.0 - y);
    return p.mu1 * y * gx;
}

cplx poly_b(cplx y, const DerivedParams& dp) {
    return dp.hat_lambda2 * y * y - (dp.hat_mu1 + dp.hat_mu2 + dp.hat_lambda) * y + dp.hat_mu2;
}

cplx poly_b_minus(cplx y, const DerivedParams& dp) {
    return poly_b(y, dp) - 2.0 * y * std::sqrt(dp.hat_lambda1 * dp.hat_mu1);
}

cplx poly_b_plus(cplx y, const DerivedParams& dp) {
    return poly_b(y, dp) + 2.0 * y * std::sqrt(dp.hat_lambda1 * dp.hat_mu1);
}

cplx poly_c(cplx y, const DerivedParams& dp) { return poly_b_minus(y, dp) * poly_b_plus(y, dp); }

cplx poly_e(cplx x, const DerivedParams& dp) {
    return dp.hat_lambda1 * x * x - (dp.hat_mu1 + dp.hat_mu2 + dp.hat_lambda) * x + dp.hat_mu1;
}

cplx poly_e_minus(cplx x, const DerivedParams& dp) {
    return poly_e(x, dp) - 2.0 * x * std::sqrt(dp.hat_lambda2 * dp.hat_mu2);
}

cplx poly_e_plus(cplx x, const DerivedParams& dp) {
    return poly_e(x, dp) + 2.0 * x * std::sqrt(dp.hat_lambda2 * dp.hat_mu2);
}

cplx poly_d(cplx x, const DerivedParams& dp) { return poly_e_minus(x, dp) * poly_e_plus(x, dp); }

namespace {

// Both roots of a z^2 + b z + c with a = hl*w, c = hm*w and discriminant
// given in factored form. The large root is q/a and the small one c/q with
// q = -(b + sqrt(disc))/2 taken on the side that avoids cancellation, so the
// small root stays finite (-> 0) as w -> 0.
RootPair solve_quadratic(cplx a, cplx b, cplx c, cplx disc) {
    const cplx s = std::sqrt(disc);
    const cplx q = (std::real(std::conj(b) * s) >= 0.0) ? -0.5 * (b + s) : -0.5 * (b - s);
    if (q == cplx{0.0, 0.0}) {
        // b = 0 and disc = 0: double root.
        const cplx r = a == cplx{0.0, 0.0} ? cplx{0.0, 0.0} : std::sqrt(c / a);
        return {r, r};
    }
    const cplx small = c / q;
    const cplx large = a == cplx{0.0, 0.0}
                           ? cplx{std::numeric_limits<double>::infinity(), 0.0}
                           : q / a;
    if (std::abs(small) <= std::abs(large)) return {small, large};
    return {large, small};
}

void require_order(bool ok, const char* what, const BranchPoints& bp) {
    if (ok) return;
    std::ostringstream msg;
    msg.precision(15);
    msg << "branch points violate " << what << ": y=(" << bp.y1 << ", " << bp.y2 << ", " << bp.y3
        << ", " << bp.y4 << ") x=(" << bp.x1 << ", " << bp.x2 << ", " << bp.x3 << ", " << bp.x4
        << "); input is not stable or not oriented";
    throw NumericalError(msg.str());
}

}  // namespace

BranchPoints branch_points(const DerivedParams& dp) {
    BranchPoints bp;
    const double common = dp.hat_mu1 + dp.hat_mu2 + dp.hat_lambda;

    const double g1 = 2.0 * std::sqrt(dp.hat_lambda1 * dp.hat_mu1);
    bp.xi1 = common + g1;
    bp.xi2 = common - g1;
    const double p2 = 4.0 * dp.hat_lambda2 * dp.hat_mu2;
    bp.y4 = (bp.xi1 + std::sqrt(bp.xi1 * bp.xi1 - p2)) / (2.0 * dp.hat_lambda2);
    bp.y3 = (bp.xi2 + std::sqrt(bp.xi2 * bp.xi2 - p2)) / (2.0 * dp.hat_lambda2);
    // y1 y4 = y2 y3 = hat_mu2/hat_lambda2
    bp.y1 = dp.hat_mu2 / (dp.hat_lambda2 * bp.y4);
    bp.y2 = dp.hat_mu2 / (dp.hat_lambda2 * bp.y3);

    const double g2 = 2.0 * std::sqrt(dp.hat_lambda2 * dp.hat_mu2);
    const double eta1 = common + g2;
    const double eta2 = common - g2;
    const double p1 = 4.0 * dp.hat_lambda1 * dp.hat_mu1;
    bp.x4 = (eta1 + std::sqrt(eta1 * eta1 - p1)) / (2.0 * dp.hat_lambda1);
    bp.x3 = (eta2 + std::sqrt(std::max(0.0, eta2 * eta2 - p1))) / (2.0 * dp.hat_lambda1);
    bp.x1 = dp.hat_mu1 / (dp.hat_lambda1 * bp.x4);
    bp.x2 = dp.hat_mu1 / (dp.hat_lambda1 * bp.x3);

    require_order(0.0 < bp.y1 && bp.y1 < bp.y2 && bp.y2 < 1.0 && 1.0 < bp.y3 && bp.y3 < bp.y4,
                  "0 < y1 < y2 < 1 < y3 < y4", bp);
    constexpr double slack = 1e-12;
    require_order(0.0 < bp.x1 && bp.x1 < bp.x2 && bp.x2 <= 1.0 + slack && 1.0 < bp.x3 &&
                      bp.x3 < bp.x4,
                  "0 < x1 < x2 <= 1 < x3 < x4", bp);
    return bp;
}

RootPair roots_k(cplx y, const DerivedParams& dp) {
    return solve_quadratic(dp.hat_lambda1 * y, poly_b(y, dp), dp.hat_mu1 * y, poly_c(y, dp));
}

RootPair roots_h(cplx x, const DerivedParams& dp) {
    return solve_quadratic(dp.hat_lambda2 * x, poly_e(x, dp), dp.hat_mu2 * x, poly_d(x, dp));
}

cplx branch_k(cplx y, const DerivedParams& dp) { return roots_k(y, dp).branch; }

cplx branch_h(cplx x, const DerivedParams& dp) { return roots_h(x, dp).branch; }

cplx BranchTracker::next(cplx z) {
    const RootPair roots = which_ == Which::K ? roots_k(z, dp_) : roots_h(z, dp_);
    const double radius = which_ == Which::K ? dp_.contour_radius
                                             : std::sqrt(dp_.hat_mu2 / dp_.hat_lambda2);
    cplx chosen = roots.branch;
    const bool tie = std::abs(std::abs(roots.branch) - std::abs(roots.sigma)) <= 1e-9 * radius;
    if (tie) {
        if (previous_) {
            if (std::abs(roots.sigma - *previous_) < std::abs(roots.branch - *previous_)) {
                chosen = roots.sigma;
            }
        } else if (std::imag(roots.sigma) > std::imag(roots.branch)) {
            chosen = roots.sigma;
        }
    }
    previous_ = chosen;
    return chosen;
}

KDerivatives k_derivatives_at_1(const DerivedParams& dp) {
    const double l1 = dp.hat_lambda1, l2 = dp.hat_lambda2;
    const double m1 = dp.hat_mu1, m2 = dp.hat_mu2;
    const double gap = m1 - l1;
    KDerivatives kd;
    kd.first = (l2 - m2) / gap;
    kd.second = 2.0 * ((m1 + m2 - 2.0 * (l1 + l2)) * m1 * m2 + l1 * l1 * m2 + l2 * l2 * m1) /
                (gap * gap * gap);
    return kd;
}

RatioLimits ratio_AB_limits_at_1(const SystemParams& p, const DerivedParams& dp) {
    const auto [k1, k2] = k_derivatives_at_1(dp);
    const double l1 = p.lambda1, l2 = p.lambda2, mu = p.mu, m1 = p.mu1, m2 = p.mu2;

    // Partial derivatives of A and B at (1,1); A(1,1) = B(1,1) = 0.
    const double ax = -l1 * m2, ay = m2 * (mu - l2);
    const double axx = -2.0 * l1 * m2, axy = m2 * (mu - l1 - l2), ayy = -2.0 * l2 * m2;
    const double bx = m1 * (mu - l1), by = -l2 * m1;
    const double bxx = -2.0 * l1 * m1, bxy = m1 * (mu - l1 - l2), byy = -2.0 * l2 * m1;

    // First and second derivatives of a(y) = A(k(y),y) and b(y) = B(k(y),y).
    const double a1 = ax * k1 + ay;
    const double b1 = bx * k1 + by;
    const double a2 = axx * k1 * k1 + 2.0 * axy * k1 + ayy + ax * k2;
    const double b2 = bxx * k1 * k1 + 2.0 * bxy * k1 + byy + bx * k2;

    const double den = l2 + (l1 - mu) * k1;
    if (std::abs(den) <= 1e-14 * (l2 + std::abs(l1 - mu) * std::abs(k1))) {
        throw NumericalError("ratio_AB_limits_at_1: lambda2 + (lambda1 - mu) k'(1) vanishes");
    }
    RatioLimits out;
    out.value = (l2 - mu + l1 * k1) * m2 / (den * m1);
    out.slope = (a2 * b1 - a1 * b2) / (2.0 * b1 * b1);
    return out;
}

}  // namespace orbitq
