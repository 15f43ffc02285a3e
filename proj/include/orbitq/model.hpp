#pragma once

// Exogenous parameters, derived rates and the stability classification of
// the two-stream retrial queue with constant-rate orbits.

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

namespace orbitq {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidParams : public Error {
public:
    using Error::Error;
};

/// Raised when a numerical invariant that the analysis guarantees is violated
/// (ordering of branch points, nonzero index, vanishing coefficients...).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// The five exogenous rates. All must be strictly positive and finite.
struct SystemParams {
    double lambda1 = 0.0;  ///< arrival rate of stream 1
    double lambda2 = 0.0;  ///< arrival rate of stream 2
    double mu = 0.0;       ///< service rate of the main server
    double mu1 = 0.0;      ///< retrial rate of orbit 1
    double mu2 = 0.0;      ///< retrial rate of orbit 2

    [[nodiscard]] double lambda() const { return lambda1 + lambda2; }
    [[nodiscard]] double alpha() const { return lambda1 + lambda2 + mu1 + mu2; }

    bool operator==(const SystemParams&) const = default;
};

/// Throws InvalidParams unless every rate is finite and > 0.
void validate(const SystemParams& p);

/// Exchanges the roles of stream/orbit 1 and stream/orbit 2.
[[nodiscard]] SystemParams swapped(const SystemParams& p);

/// Rates of the kernel in its random-walk normalization.
struct DerivedParams {
    double lambda = 0.0;       ///< lambda1 + lambda2
    double alpha = 0.0;        ///< lambda + mu1 + mu2
    double hat_lambda1 = 0.0;  ///< alpha * lambda1
    double hat_lambda2 = 0.0;  ///< alpha * lambda2
    double hat_mu1 = 0.0;      ///< mu * mu1
    double hat_mu2 = 0.0;      ///< mu * mu2
    double hat_lambda = 0.0;   ///< alpha * lambda
    double contour_radius = 0.0;  ///< sqrt(hat_mu1 / hat_lambda1)
};

[[nodiscard]] DerivedParams derive(const SystemParams& p);

enum class Verdict { Stable, Boundary, Unstable };

[[nodiscard]] std::string_view to_string(Verdict v);

/// |rho_i - 1| below this is classified as the (degenerate) stability boundary.
inline constexpr double kBoundaryTolerance = 1e-12;

struct StabilityReport {
    double rho1 = 0.0;  ///< (lambda/mu)(1 + lambda1/mu1)
    double rho2 = 0.0;  ///< (lambda/mu)(1 + lambda2/mu2)
    Verdict verdict = Verdict::Unstable;
    /// True when the analytic pipeline runs on the index-swapped system
    /// (alpha*lambda1 >= mu*mu1 in user coordinates).
    bool swapped = false;

    [[nodiscard]] bool stable() const { return verdict == Verdict::Stable; }
};

[[nodiscard]] StabilityReport check_stability(const SystemParams& p);

/// Raised by every analytic entry point that receives a boundary or unstable
/// parameter set. Carries the report so callers can print it.
class NotStable : public Error {
public:
    explicit NotStable(StabilityReport report);
    [[nodiscard]] const StabilityReport& report() const { return report_; }

private:
    StabilityReport report_;
};

struct OrientedParams {
    SystemParams params;  ///< satisfies alpha*lambda1 < mu*mu1
    bool swapped = false;
};

/// Returns the parameters oriented so that alpha*lambda1 < mu*mu1, swapping
/// indices 1 and 2 when needed. Rejects non-stable input with NotStable.
[[nodiscard]] OrientedParams normalize_orientation(const SystemParams& p);

/// Orientation used by the measure pipeline: the index with the larger
/// mu_i/lambda_i (the wider contour) becomes index 1, ties broken by
/// comparing (lambda_i, mu_i). An input and its swap map to the same
/// oriented system. Rejects non-stable input with NotStable.
[[nodiscard]] OrientedParams canonical_orientation(const SystemParams& p);

/// Reads `key = value` lines (keys lambda1, lambda2, mu, mu1, mu2). Blank
/// lines and lines starting with '#' are ignored. Missing or unknown keys and
/// malformed numbers raise InvalidParams.
[[nodiscard]] SystemParams parse_config(std::istream& in);
[[nodiscard]] SystemParams load_config(const std::string& path);

}  // namespace orbitq
