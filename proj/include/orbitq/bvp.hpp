#pragma once

// Riemann-Hilbert solution for the boundary function H0(x,0) on the disc
// |x| < sqrt(hat_mu1/hat_lambda1), the Cauchy extraction of H0(0,y) on the
// unit disc, and assembly of the full generating functions H0(x,y), H1(x,y).
//
// Everything here works in the oriented parameter set (hat_lambda1 < hat_mu1).
// Use normalize_orientation() first; measures.hpp handles the swap back.

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "orbitq/contour.hpp"
#include "orbitq/kernel.hpp"
#include "orbitq/model.hpp"

namespace orbitq {

struct BvpOptions {
    /// Starting node count on |z| = radius. Raised automatically when the
    /// contour sits so close to the unit circle that the trapezoidal rule
    /// would need more nodes for ~1e-16 accuracy.
    std::size_t node_count = contour::kDefaultNodes;
    std::size_t max_nodes = 65536;
    /// Node count on |t| = 1 for the Cauchy integral of H0(0,y); 0 = automatic.
    std::size_t unit_nodes = 0;
    /// Disable the automatic raise of node_count (tests that compare fixed grids).
    bool fixed_nodes = false;
    contour::Exec exec = contour::Exec::Parallel;
};

/// Default options with ORBITQ_NODES applied when set.
[[nodiscard]] BvpOptions default_bvp_options();

/// Positive root of lambda lambda1 (lambda+mu1) x^2 + (lambda+mu1-mu) lambda mu1 x - mu mu1^2.
[[nodiscard]] double compute_x0(const SystemParams& p);

/// 1 iff x0 <= radius and (lambda+mu1) x0/(lambda x0 + mu1) <= sqrt(hat_mu2/hat_lambda2).
[[nodiscard]] int compute_r(const SystemParams& p, const DerivedParams& dp, double x0);

/// Inputs of U and J.
struct UContext {
    SystemParams params;
    DerivedParams derived;
    double x0 = 0.0;
    int r = 0;

    static UContext make(const SystemParams& oriented);
};

/// U(x) = A(x,h(x)) / (B(x,h(x)) (x-x0)^r) for |x| = radius. Throws
/// NumericalError when B(x,h(x)) or U(x) is numerically zero.
[[nodiscard]] cplx U_of(cplx x, const UContext& ctx);
/// J(z) = conj(U(z)) / U(z).
[[nodiscard]] cplx J_of(cplx z, const UContext& ctx);

/// -(1/pi) * total variation of arg U over the closed sample sequence, rounded.
/// Throws NumericalError when the variation is not close to a multiple of pi.
[[nodiscard]] int index_chi(std::span<const cplx> u_samples);

/// Solved boundary value problem. Immutable once built; copies share state.
class BvpSolution {
public:
    /// Builds the solution for an oriented, stable parameter set.
    /// Throws NotStable, NumericalError.
    static BvpSolution solve(const SystemParams& oriented, const BvpOptions& options = {});

    [[nodiscard]] const SystemParams& params() const { return s_->ctx.params; }
    [[nodiscard]] const DerivedParams& derived() const { return s_->ctx.derived; }
    [[nodiscard]] const UContext& context() const { return s_->ctx; }
    [[nodiscard]] const BranchPoints& branches() const { return s_->branches; }
    [[nodiscard]] double x0() const { return s_->ctx.x0; }
    [[nodiscard]] int r() const { return s_->ctx.r; }
    [[nodiscard]] int chi() const { return s_->chi; }
    [[nodiscard]] const contour::ContourSpec& contour() const { return s_->spec; }
    [[nodiscard]] const std::vector<cplx>& nodes() const { return s_->nodes; }
    /// Continuously unwrapped arg U at the nodes.
    [[nodiscard]] const std::vector<double>& arg_U() const { return s_->arg_u; }
    /// log J at the nodes (= -2i arg U).
    [[nodiscard]] const std::vector<cplx>& log_J() const { return s_->log_j; }
    /// H0(1,0) = 1 - (lambda/mu)(1 + lambda2/mu2).
    [[nodiscard]] double H10() const { return s_->h10; }
    /// H0(0,1) = 1 - (lambda/mu)(1 + lambda1/mu1).
    [[nodiscard]] double H01() const { return s_->h01; }
    /// Normalization constant D with H0(x,0) = D (x-x0)^{-r} exp(Gamma(x)).
    [[nodiscard]] double D() const { return s_->d; }
    [[nodiscard]] contour::Exec exec() const { return s_->exec; }

    /// Largest jump of arg U between adjacent nodes.
    [[nodiscard]] double max_arg_jump() const { return s_->max_jump; }

    /// Samples of V(t) = -A(k(t),t)/B(k(t),t) H0(k(t),0) on the unit circle,
    /// computed on first use.
    struct UnitCircle {
        std::vector<cplx> nodes;
        std::vector<cplx> values;
    };
    [[nodiscard]] const UnitCircle& unit_circle() const;
    [[nodiscard]] std::size_t unit_node_count() const { return s_->unit_nodes; }

private:
    struct State {
        UContext ctx;
        BranchPoints branches;
        contour::ContourSpec spec;
        std::vector<cplx> nodes;
        std::vector<double> arg_u;
        std::vector<cplx> log_j;
        int chi = 0;
        double max_jump = 0.0;
        double h10 = 0.0;
        double h01 = 0.0;
        double d = 0.0;
        std::size_t unit_nodes = 0;
        contour::Exec exec = contour::Exec::Parallel;
        mutable std::once_flag unit_once;
        mutable UnitCircle unit;
    };
    std::shared_ptr<const State> s_;
};

/// Gamma(x) = (1/2 pi i) \oint log J(z) / (z - x) dz, |x| < radius.
[[nodiscard]] cplx gamma_integral(cplx x, const BvpSolution& sol);

/// H0(x,0) for |x| < radius. Throws std::domain_error outside.
[[nodiscard]] cplx solve_H0_x0(cplx x, const BvpSolution& sol);
/// d/dx H0(x,0) for |x| < radius.
[[nodiscard]] cplx solve_dH0_x0(cplx x, const BvpSolution& sol);

/// H0(0,y) for |y| <= 1. Interior points use the Cauchy integral of V over
/// the unit circle, points on the circle evaluate V directly.
[[nodiscard]] cplx solve_H0_0y(cplx y, const BvpSolution& sol);

/// d/dx H0(x,0) at x = 1 and d/dy H0(0,y) at y = 1.
[[nodiscard]] double derivative_H10(const BvpSolution& sol);
[[nodiscard]] double derivative_H01(const BvpSolution& sol);

struct HPair {
    cplx h0;
    cplx h1;
};

/// H0(x,y) and H1(x,y) for |x|, |y| <= 1.
[[nodiscard]] HPair H_full(cplx x, cplx y, const BvpSolution& sol);

/// Taylor coefficients P_mn(k) of H0 and H1 for m <= m_max, n <= n_max,
/// by discrete Fourier sums on a torus inside the unit bidisc.
struct CoefficientGrid {
    int m_max = 0;
    int n_max = 0;
    std::vector<double> p0;  ///< row-major (m, n)
    std::vector<double> p1;

    [[nodiscard]] double at(int m, int n, int k) const {
        const auto i = static_cast<std::size_t>(m * (n_max + 1) + n);
        return k == 0 ? p0[i] : p1[i];
    }
};

[[nodiscard]] CoefficientGrid extract_coefficients(const BvpSolution& sol, int m_max, int n_max);

}  // namespace orbitq
