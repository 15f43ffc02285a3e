#pragma once

// Truncated continuous-time Markov chain for the state (Q1, Q2, L), solved
// directly. Serves as ground truth for the analytic pipeline and works in the
// user's orientation.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "orbitq/measures.hpp"
#include "orbitq/model.hpp"

namespace orbitq {

struct TruncationSpec {
    int m_max = 120;
    int n_max = 120;
    double tol = 1e-8;   ///< accepted when rim probability < tol
    int max_level = 480; ///< cap on m_max and n_max during refinement

    /// Throws InvalidParams unless m_max, n_max >= 8 and tol > 0.
    void validate() const;
};

/// Generator of the truncated chain. Transitions leaving the box
/// {m <= m_max, n <= n_max} are dropped; `dropped` records their rate.
struct Generator {
    SystemParams params;
    int m_max = 0;
    int n_max = 0;
    /// Q with Q(i,j) = rate i -> j and Q(i,i) = -sum of kept outflow.
    Eigen::SparseMatrix<double, Eigen::RowMajor> q;
    std::vector<double> dropped;

    [[nodiscard]] std::size_t size() const { return dropped.size(); }
    [[nodiscard]] std::size_t index(int m, int n, int k) const {
        return (static_cast<std::size_t>(m) * static_cast<std::size_t>(n_max + 1) +
                static_cast<std::size_t>(n)) * 2 + static_cast<std::size_t>(k);
    }
    /// Total kept outflow rate of state (m, n, k).
    [[nodiscard]] double outflow(int m, int n, int k) const;
};

[[nodiscard]] Generator build_generator(const SystemParams& p, int m_max, int n_max);
[[nodiscard]] Generator build_generator(const SystemParams& p, const TruncationSpec& spec);

struct StationarySolution {
    SystemParams params;
    int m_max = 0;
    int n_max = 0;
    std::vector<double> probabilities;  ///< indexed like Generator::index
    double residual = 0.0;               ///< max |(pi Q)_i|
    double boundary_mass = 0.0;          ///< probability with m = m_max or n = n_max
    double rim_m = 0.0;                  ///< probability with m = m_max
    double rim_n = 0.0;                  ///< probability with n = n_max

    [[nodiscard]] double at(int m, int n, int k) const {
        return probabilities[(static_cast<std::size_t>(m) * static_cast<std::size_t>(n_max + 1) +
                              static_cast<std::size_t>(n)) * 2 + static_cast<std::size_t>(k)];
    }
    /// P(Q1 = m, L = k) and P(Q2 = n, L = k).
    [[nodiscard]] double marginal_m(int m, int k) const;
    [[nodiscard]] double marginal_n(int n, int k) const;
};

/// Raised when the rim mass does not fall below tol within max_level.
class TruncationError : public Error {
public:
    TruncationError(const std::string& what, StationarySolution last);
    [[nodiscard]] const StationarySolution& last() const { return last_; }

private:
    StationarySolution last_;
};

/// Stationary vector of the truncated chain (no refinement).
[[nodiscard]] StationarySolution solve_truncated(const Generator& gen);

/// Refines m_max/n_max by doubling until boundary_mass < tol.
/// Throws TruncationError at the cap or when the rim mass stops shrinking.
[[nodiscard]] StationarySolution solve_stationary(const SystemParams& p,
                                                  const TruncationSpec& spec = {});

/// Exact sums over the truncated distribution. dH10 and dH01 are
/// sum m P(m,0,0) and sum n P(0,n,0).
[[nodiscard]] PerformanceMeasures oracle_measures(const StationarySolution& ss);

struct FieldComparison {
    std::string name;
    double analytic = 0.0;
    double oracle = 0.0;
    double deviation = 0.0;  ///< relative, absolute when the oracle value is 0
    bool pass = false;
};

struct ComparisonReport {
    std::vector<FieldComparison> fields;
    double rel_tol = 0.0;
    bool pass = false;
    std::string worst_field;
    double worst_deviation = 0.0;
    double boundary_mass = 0.0;
    /// Truncation mass is not negligible against rel_tol, or the oracle did
    /// not reach its own tolerance; deviations may be truncation bias.
    bool elevated_uncertainty = false;
};

[[nodiscard]] ComparisonReport compare(const PerformanceMeasures& analytic, const PerformanceMeasures& oracle,
                                       double rel_tol, double boundary_mass = 0.0,
                                       bool oracle_converged = true);

/// Writes "m,n,k,probability" rows with a header.
void write_distribution_csv(std::ostream& out, const StationarySolution& ss);

}  // namespace orbitq
