#include "orbitq/model.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <utility>

namespace orbitq {

void validate(const SystemParams& p) {
    const std::array<std::pair<const char*, double>, 5> fields{{
        {"lambda1", p.lambda1},
        {"lambda2", p.lambda2},
        {"mu", p.mu},
        {"mu1", p.mu1},
        {"mu2", p.mu2},
    }};
    for (const auto& [name, value] : fields) {
        if (!std::isfinite(value) || value <= 0.0) {
            std::ostringstream msg;
            msg << "rate " << name << " must be finite and > 0 (got " << value << ")";
            throw InvalidParams(msg.str());
        }
    }
}

SystemParams swapped(const SystemParams& p) {
    return SystemParams{p.lambda2, p.lambda1, p.mu, p.mu2, p.mu1};
}

DerivedParams derive(const SystemParams& p) {
    DerivedParams d;
    d.lambda = p.lambda1 + p.lambda2;
    d.alpha = d.lambda + p.mu1 + p.mu2;
    d.hat_lambda1 = d.alpha * p.lambda1;
    d.hat_lambda2 = d.alpha * p.lambda2;
    d.hat_mu1 = p.mu * p.mu1;
    d.hat_mu2 = p.mu * p.mu2;
    d.hat_lambda = d.alpha * d.lambda;
    d.contour_radius = std::sqrt(d.hat_mu1 / d.hat_lambda1);
    return d;
}

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::Stable: return "stable";
        case Verdict::Boundary: return "boundary";
        case Verdict::Unstable: return "unstable";
    }
    return "unknown";
}

StabilityReport check_stability(const SystemParams& p) {
    validate(p);
    StabilityReport r;
    const double load = p.lambda() / p.mu;
    r.rho1 = load * (1.0 + p.lambda1 / p.mu1);
    r.rho2 = load * (1.0 + p.lambda2 / p.mu2);
    const double worst = std::max(r.rho1, r.rho2);
    if (std::abs(r.rho1 - 1.0) <= kBoundaryTolerance ||
        std::abs(r.rho2 - 1.0) <= kBoundaryTolerance) {
        r.verdict = worst <= 1.0 + kBoundaryTolerance ? Verdict::Boundary : Verdict::Unstable;
    } else {
        r.verdict = worst < 1.0 ? Verdict::Stable : Verdict::Unstable;
    }
    r.swapped = p.alpha() * p.lambda1 >= p.mu * p.mu1;
    return r;
}

namespace {

std::string describe(const StabilityReport& r) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "parameters are " << to_string(r.verdict) << " (rho1=" << r.rho1
        << ", rho2=" << r.rho2 << "); the analytic solution requires rho1 < 1 and rho2 < 1";
    return msg.str();
}

}  // namespace

NotStable::NotStable(StabilityReport report)
    : Error(describe(report)), report_(report) {}

OrientedParams normalize_orientation(const SystemParams& p) {
    const StabilityReport report = check_stability(p);
    if (!report.stable()) throw NotStable(report);
    OrientedParams out{p, report.swapped};
    if (out.swapped) out.params = swapped(p);
    // Guaranteed by stability: at least one of alpha*lambda_i < mu*mu_i holds.
    if (!(out.params.alpha() * out.params.lambda1 < out.params.mu * out.params.mu1)) {
        throw NumericalError("orientation: neither alpha*lambda_i < mu*mu_i holds for a stable input");
    }
    return out;
}

OrientedParams canonical_orientation(const SystemParams& p) {
    const StabilityReport report = check_stability(p);
    if (!report.stable()) throw NotStable(report);
    // mu2/lambda2 > mu1/lambda1 without division.
    const double lhs = p.mu2 * p.lambda1;
    const double rhs = p.mu1 * p.lambda2;
    bool swap = lhs > rhs;
    if (lhs == rhs) swap = std::pair{p.lambda2, p.mu2} < std::pair{p.lambda1, p.mu1};
    OrientedParams out{swap ? swapped(p) : p, swap};
    if (!(out.params.alpha() * out.params.lambda1 < out.params.mu * out.params.mu1)) {
        throw NumericalError("orientation: alpha*lambda1 < mu*mu1 fails for a stable input");
    }
    return out;
}

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

double parse_number(const std::string& key, const std::string& text) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw InvalidParams("config: malformed value for '" + key + "': '" + text + "'");
    }
    return value;
}

}  // namespace

SystemParams parse_config(std::istream& in) {
    std::array<std::optional<double>, 5> values;
    constexpr std::array<std::string_view, 5> keys{"lambda1", "lambda2", "mu", "mu1", "mu2"};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw InvalidParams("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string val = trim(std::string_view(body).substr(eq + 1));
        const auto it = std::find(keys.begin(), keys.end(), key);
        if (it == keys.end()) {
            throw InvalidParams("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
        values[static_cast<std::size_t>(it - keys.begin())] = parse_number(key, val);
    }
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (!values[i]) throw InvalidParams("config: missing key '" + std::string(keys[i]) + "'");
    }
    SystemParams p{*values[0], *values[1], *values[2], *values[3], *values[4]};
    validate(p);
    return p;
}

SystemParams load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidParams("cannot open config file '" + path + "'");
    return parse_config(in);
}

}  // namespace orbitq
