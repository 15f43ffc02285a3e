#pragma once

// Performance measures from the analytic solution: boundary probabilities,
// derivatives of the boundary functions at 1, mean orbit sizes, the
// empty-system probability and the single-orbit reference formula.

#include <array>
#include <string_view>
#include <utility>

#include "orbitq/bvp.hpp"
#include "orbitq/model.hpp"

namespace orbitq {

struct PerformanceMeasures {
    double p_busy = 0.0;           ///< P(L=1)
    double p_q1_empty_idle = 0.0;  ///< P(Q1=0, L=0) = H0(0,1)
    double p_q2_empty_idle = 0.0;  ///< P(Q2=0, L=0) = H0(1,0)
    double p_empty = 0.0;          ///< P(Q1=0, Q2=0, L=0)
    double eq1 = 0.0;              ///< E[Q1]
    double eq2 = 0.0;              ///< E[Q2]
    double el = 0.0;               ///< E[L]
    double dH10 = 0.0;             ///< d/dx H0(x,0) at x=1
    double dH01 = 0.0;             ///< d/dy H0(0,y) at y=1

    static constexpr std::size_t kFieldCount = 9;
    [[nodiscard]] std::array<std::pair<std::string_view, double>, kFieldCount> fields() const {
        return {{{"p_busy", p_busy},
                 {"p_q1_empty_idle", p_q1_empty_idle},
                 {"p_q2_empty_idle", p_q2_empty_idle},
                 {"p_empty", p_empty},
                 {"eq1", eq1},
                 {"eq2", eq2},
                 {"el", el},
                 {"dH10", dH10},
                 {"dH01", dH01}}};
    }

    /// Relabels orbit 1 <-> orbit 2.
    [[nodiscard]] PerformanceMeasures swapped() const;

    bool operator==(const PerformanceMeasures&) const = default;
};

struct MeasureReport {
    PerformanceMeasures values;
    /// Per-field absolute change when the contour node count is doubled.
    PerformanceMeasures error;
    /// E[Q2] (user labels) came from the diagonal identity instead of the
    /// closed formula, whose denominator was numerically zero.
    bool eq1_fallback = false;
    bool eq2_fallback = false;
    bool swapped = false;  ///< analysis ran with orbits relabeled
    std::size_t node_count = 0;
    StabilityReport stability;
};

struct BoundaryValues {
    double p_busy = 0.0;
    double p_q1_empty_idle = 0.0;
    double p_q2_empty_idle = 0.0;
};

/// lambda/mu, 1 - (lambda/mu)(1 + lambda1/mu1), 1 - (lambda/mu)(1 + lambda2/mu2).
/// Throws NotStable for non-stable input.
[[nodiscard]] BoundaryValues closed_boundary_values(const SystemParams& p);

// The functions below take a solution in its oriented labels.

[[nodiscard]] double dH10(const BvpSolution& sol);
[[nodiscard]] double dH01(const BvpSolution& sol);

[[nodiscard]] double expected_Q1(const BvpSolution& sol);

/// True when |mu mu2 - alpha lambda2| is too small for the closed E[Q2] formula.
[[nodiscard]] bool eq2_formula_degenerate(const BvpSolution& sol);
/// Closed formula; throws NumericalError when eq2_formula_degenerate().
[[nodiscard]] double expected_Q2_formula(const BvpSolution& sol);
/// E[Q1] + E[Q2] from the restriction of the functional equation to x = y.
[[nodiscard]] double expected_total_diagonal(const BvpSolution& sol);
/// Closed formula, or the diagonal identity when the formula is degenerate.
[[nodiscard]] double expected_Q2(const BvpSolution& sol);

[[nodiscard]] double p_empty(const BvpSolution& sol);

/// Mean orbit size of the single-stream, single-orbit system.
/// Throws InvalidParams unless mu mu2 - lambda2^2 - lambda2 mu2 > 0.
[[nodiscard]] double single_orbit_EQ(double lambda2, double mu, double mu2);

struct MeasureOptions {
    BvpOptions bvp = default_bvp_options();
    /// Recompute with twice the nodes to fill MeasureReport::error.
    bool estimate_error = true;
};

/// Full pipeline in user labels. Throws NotStable, NumericalError.
[[nodiscard]] MeasureReport compute_measures(const SystemParams& p, const MeasureOptions& options = {});

}  // namespace orbitq
