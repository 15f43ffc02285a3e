#pragma once

// Algebra of the kernel R(x,y) and of the coefficients A(x,y), B(x,y) of the
// functional equation  R H0(x,y) = A H0(x,0) + B H0(0,y).
//
// All branch functions assume the oriented parameter set (hat_lambda1 <
// hat_mu1), see normalize_orientation().

#include <complex>
#include <optional>

#include "orbitq/model.hpp"

namespace orbitq {

using cplx = std::complex<double>;

/// R(x,y) = l1 (1-x) x y + l2 (1-y) x y - m1 (1-x) y - m2 (1-y) x, hatted rates.
[[nodiscard]] cplx kernel_R(cplx x, cplx y, const DerivedParams& dp);

/// A(x,y) = ((1-y)(lambda2 y - mu) + lambda1 (1-x) y) mu2 x
[[nodiscard]] cplx coeff_A(cplx x, cplx y, const SystemParams& p);
/// B(x,y) = ((1-x)(lambda1 x - mu) + lambda2 (1-y) x) mu1 y
[[nodiscard]] cplx coeff_B(cplx x, cplx y, const SystemParams& p);

/// Partial derivatives with respect to x, used by the removable-singularity
/// fallback of H_full.
[[nodiscard]] cplx kernel_R_dx(cplx x, cplx y, const DerivedParams& dp);
[[nodiscard]] cplx coeff_A_dx(cplx x, cplx y, const SystemParams& p);
[[nodiscard]] cplx coeff_B_dx(cplx x, cplx y, const SystemParams& p);

// Discriminant pieces. With x fixed / y fixed the kernel is a quadratic
//   hat_lambda1 y x^2 + b(y) x + hat_mu1 y = 0,   c(y) = b_-(y) b_+(y)
//   hat_lambda2 x y^2 + e(x) y + hat_mu2 x = 0,   d(x) = e_-(x) e_+(x)
[[nodiscard]] cplx poly_b(cplx y, const DerivedParams& dp);
[[nodiscard]] cplx poly_b_minus(cplx y, const DerivedParams& dp);
[[nodiscard]] cplx poly_b_plus(cplx y, const DerivedParams& dp);
[[nodiscard]] cplx poly_c(cplx y, const DerivedParams& dp);
[[nodiscard]] cplx poly_e(cplx x, const DerivedParams& dp);
[[nodiscard]] cplx poly_e_minus(cplx x, const DerivedParams& dp);
[[nodiscard]] cplx poly_e_plus(cplx x, const DerivedParams& dp);
[[nodiscard]] cplx poly_d(cplx x, const DerivedParams& dp);

/// Real branch points of x(y) (the y_i) and of y(x) (the x_i).
struct BranchPoints {
    double y1 = 0, y2 = 0, y3 = 0, y4 = 0;
    double x1 = 0, x2 = 0, x3 = 0, x4 = 0;
    double xi1 = 0, xi2 = 0;
};

/// Closed-form branch points. Throws NumericalError when
/// 0 < y1 < y2 < 1 < y3 < y4 or 0 < x1 < x2 <= 1 < x3 < x4 fails.
[[nodiscard]] BranchPoints branch_points(const DerivedParams& dp);

/// Both roots of the kernel quadratic: `branch` is the small-modulus root
/// (k or h), `sigma` its companion. branch * sigma = hat_mu_i / hat_lambda_i.
struct RootPair {
    cplx branch;
    cplx sigma;
};

[[nodiscard]] RootPair roots_k(cplx y, const DerivedParams& dp);
[[nodiscard]] RootPair roots_h(cplx x, const DerivedParams& dp);

/// k(y): the root of R(x,y)=0 with |k(y)| <= sqrt(hat_mu1/hat_lambda1).
[[nodiscard]] cplx branch_k(cplx y, const DerivedParams& dp);
/// h(x): the root of R(x,y)=0 with |h(x)| <= sqrt(hat_mu2/hat_lambda2).
[[nodiscard]] cplx branch_h(cplx x, const DerivedParams& dp);

/// Evaluates k along a path. On the cut [y1,y2] the two roots have equal
/// modulus; there the root closest to the previously returned value wins.
/// Single-owner state: use one tracker per path / per thread.
class BranchTracker {
public:
    enum class Which { K, H };

    BranchTracker(const DerivedParams& dp, Which which) : dp_(dp), which_(which) {}

    cplx next(cplx z);
    void reset() { previous_.reset(); }

private:
    DerivedParams dp_;
    Which which_;
    std::optional<cplx> previous_;
};

struct KDerivatives {
    double first = 0.0;   ///< k'(1)
    double second = 0.0;  ///< k''(1)
};

/// k'(1) = (hl2 - hm2)/(hm1 - hl1) and the matching closed form for k''(1).
[[nodiscard]] KDerivatives k_derivatives_at_1(const DerivedParams& dp);

/// Limits at y -> 1 of A(k(y),y)/B(k(y),y) (`value`) and of its derivative
/// (`slope`). Both numerator and denominator have simple zeros at y = 1.
struct RatioLimits {
    double value = 0.0;
    double slope = 0.0;
};

/// Throws NumericalError if d/dy B(k(y),y) vanishes at y = 1.
[[nodiscard]] RatioLimits ratio_AB_limits_at_1(const SystemParams& p, const DerivedParams& dp);

}  // namespace orbitq
