#include "orbitq/contour.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace orbitq::contour {

ContourSpec ContourSpec::with_nodes(double radius, std::size_t nodes) {
    return ContourSpec{radius, nodes, std::numbers::pi / static_cast<double>(nodes)};
}

void ContourSpec::validate() const {
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        throw std::invalid_argument("contour radius must be finite and > 0");
    }
    if (node_count < kMinNodes || node_count % 2 != 0) {
        throw std::invalid_argument("contour node_count must be even and >= " +
                                    std::to_string(kMinNodes) + " (got " +
                                    std::to_string(node_count) + ")");
    }
    const double step = 2.0 * std::numbers::pi / static_cast<double>(node_count);
    const double rel = std::fmod(phase_offset, step);
    if (rel < 1e-3 * step || step - rel < 1e-3 * step) {
        throw std::invalid_argument("contour phase_offset places a node on the real axis");
    }
}

std::vector<cplx> make_nodes(const ContourSpec& spec) {
    spec.validate();
    std::vector<cplx> z(spec.node_count);
    const double step = 2.0 * std::numbers::pi / static_cast<double>(spec.node_count);
    for (std::size_t k = 0; k < z.size(); ++k) {
        z[k] = std::polar(spec.radius, spec.phase_offset + step * static_cast<double>(k));
    }
    return z;
}

std::vector<cplx> halve(std::span<const cplx> nodes) {
    std::vector<cplx> out;
    out.reserve(nodes.size() / 2);
    for (std::size_t k = 0; k < nodes.size(); k += 2) out.push_back(nodes[k]);
    return out;
}

std::size_t nodes_for_decay(double ratio, double digits, std::size_t floor_nodes, std::size_t cap) {
    std::size_t n = kMinNodes;
    while (n < floor_nodes) n *= 2;
    if (!(ratio > 1.0)) return std::max(n, cap);
    const double rate = std::log(ratio);
    while (n < cap && static_cast<double>(n) * rate < digits) n *= 2;
    return n;
}

UnwrappedArg unwrap_argument(std::span<const cplx> values) {
    UnwrappedArg out;
    const std::size_t n = values.size();
    out.arg.resize(n);
    if (n == 0) return out;
    out.arg[0] = std::arg(values[0]);
    for (std::size_t k = 1; k <= n; ++k) {
        const cplx next = values[k % n];
        const double step = std::arg(next / values[k - 1]);
        out.max_jump = std::max(out.max_jump, std::abs(step));
        out.total_variation += step;
        if (k < n) out.arg[k] = out.arg[k - 1] + step;
    }
    return out;
}

}  // namespace orbitq::contour
