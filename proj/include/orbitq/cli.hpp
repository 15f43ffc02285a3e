#pragma once

// Command-line front end. run_cli() is the whole program minus main(), so
// tests can drive it with string streams.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "orbitq/measures.hpp"
#include "orbitq/model.hpp"

namespace orbitq::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kBoundary = 2,
    kUnstable = 3,
    kToleranceFailed = 4,
    kNumerical = 5,
};

/// One-parameter grid over [from, to] with `steps` points.
struct SweepSpec {
    std::string varying;  ///< lambda1, lambda2, mu, mu1 or mu2
    double from = 0.0;
    double to = 0.0;
    int steps = 2;
    SystemParams fixed;
    std::vector<std::string> outputs;  ///< measure names; empty = all

    /// Throws InvalidParams for a bad varying name, from >= to, steps < 2
    /// or a grid point with a non-positive rate.
    void validate() const;
    [[nodiscard]] std::vector<SystemParams> grid() const;
};

/// Names accepted in SweepSpec::outputs.
[[nodiscard]] const std::vector<std::string>& measure_names();

/// Figure recipes fig3..fig6. fig3 and fig4 expand to one sweep per lambda1.
[[nodiscard]] std::vector<SweepSpec> preset(const std::string& name);

struct SweepOptions {
    MeasureOptions measures;
    /// Adds single_orbit_eq and the p_empty - H0(1,0) gap as reference columns.
    bool reference_columns = true;
};

/// Writes the CSV for all specs (one header). Points run in parallel, rows
/// come out in grid order. Returns the number of rows that failed.
int write_sweep_csv(std::ostream& out, const std::vector<SweepSpec>& specs, const SweepOptions& options);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace orbitq::cli
