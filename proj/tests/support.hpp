#pragma once

#include <cmath>
#include <random>

#include "orbitq/model.hpp"

namespace orbitq::testing {

inline const SystemParams kSymmetric{1.0, 1.0, 4.0, 2.0, 2.0};
inline const SystemParams kFig3{0.1, 1.0, 4.0, 2.0, 2.0};
inline const SystemParams kFig5{1.2, 1.2, 4.0, 2.0, 2.1};
inline const SystemParams kMixed{0.3, 0.7, 3.0, 1.5, 2.5};

inline double max_rho(const SystemParams& p) {
    const StabilityReport r = check_stability(p);
    return std::max(r.rho1, r.rho2);
}

/// Random stable parameter set with max(rho1, rho2) in [0.05, rho_cap].
/// Rates are drawn log-uniformly so both light and heavy orbits appear.
inline SystemParams random_stable(std::mt19937_64& rng, double rho_cap = 0.97) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto logu = [&](double lo, double hi) { return lo * std::pow(hi / lo, u(rng)); };
    for (;;) {
        SystemParams p;
        p.mu = logu(0.5, 8.0);
        p.mu1 = logu(0.2, 6.0);
        p.mu2 = logu(0.2, 6.0);
        p.lambda1 = logu(0.01, 1.0) * p.mu;
        p.lambda2 = logu(0.01, 1.0) * p.mu;
        const double rho = max_rho(p);
        if (rho >= 0.05 && rho <= rho_cap) return p;
    }
}

/// Relative difference with an absolute floor.
inline double rel_diff(double a, double b, double floor = 1e-300) {
    return std::abs(a - b) / std::max(std::abs(b), floor);
}

}  // namespace orbitq::testing
