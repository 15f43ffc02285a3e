#pragma once

// Trapezoidal quadrature on circles centred at the origin.
//
//   (1/2 pi i) \oint f(z) dz  ~=  (1/N) sum_k f(z_k) z_k,   z_k = r e^{i(phi + 2 pi k / N)}
//
// Every kernel comes in two flavours: `serial::` is the plain reference loop
// and `parallel::` is the OpenMP version used in production. The parallel
// reduction sums fixed-size chunks and then combines the chunk sums in index
// order, so its result does not depend on the thread count.

#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace orbitq::contour {

using cplx = std::complex<double>;

inline constexpr std::size_t kMinNodes = 256;
inline constexpr std::size_t kDefaultNodes = 4096;
inline constexpr std::size_t kReductionChunk = 256;

enum class Exec { Serial, Parallel };

/// Equispaced discretization of the circle |z| = radius.
struct ContourSpec {
    double radius = 1.0;
    std::size_t node_count = kDefaultNodes;
    /// Angle of node 0. Half a step keeps every node off the real axis.
    double phase_offset = std::numbers::pi / static_cast<double>(kDefaultNodes);

    /// Spec with the default half-step offset for `nodes` nodes.
    static ContourSpec with_nodes(double radius, std::size_t nodes);

    /// Throws std::invalid_argument unless node_count is even and >= kMinNodes
    /// and the offset keeps nodes off the positive real axis.
    void validate() const;
};

[[nodiscard]] std::vector<cplx> make_nodes(const ContourSpec& spec);

/// Every other node of `nodes`: the trapezoidal rule with half the nodes.
[[nodiscard]] std::vector<cplx> halve(std::span<const cplx> nodes);

namespace serial {

/// (1/N) sum_k f(k) z_k where f(k) is the integrand value at node k.
template <class F>
cplx integrate(std::span<const cplx> nodes, F&& f) {
    cplx sum{0.0, 0.0};
    for (std::size_t k = 0; k < nodes.size(); ++k) sum += f(k) * nodes[k];
    return sum / static_cast<double>(nodes.size());
}

/// out[k] = f(k) for every k.
template <class T, class F>
void sample(std::span<T> out, F&& f) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = f(k);
}

}  // namespace serial

namespace parallel {

template <class F>
cplx integrate(std::span<const cplx> nodes, F&& f) {
    const std::size_t n = nodes.size();
    const std::size_t chunks = (n + kReductionChunk - 1) / kReductionChunk;
    std::vector<cplx> partial(chunks);
    const auto nchunks = static_cast<long long>(chunks);
#pragma omp parallel for schedule(static)
    for (long long c = 0; c < nchunks; ++c) {
        const std::size_t begin = static_cast<std::size_t>(c) * kReductionChunk;
        const std::size_t end = std::min(n, begin + kReductionChunk);
        cplx s{0.0, 0.0};
        for (std::size_t k = begin; k < end; ++k) s += f(k) * nodes[k];
        partial[static_cast<std::size_t>(c)] = s;
    }
    cplx sum{0.0, 0.0};
    for (const cplx& s : partial) sum += s;
    return sum / static_cast<double>(n);
}

template <class T, class F>
void sample(std::span<T> out, F&& f) {
    const auto n = static_cast<long long>(out.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (long long k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = f(static_cast<std::size_t>(k));
}

}  // namespace parallel

template <class F>
cplx integrate(Exec exec, std::span<const cplx> nodes, F&& f) {
    return exec == Exec::Parallel ? parallel::integrate(nodes, f) : serial::integrate(nodes, f);
}

template <class T, class F>
void sample(Exec exec, std::span<T> out, F&& f) {
    if (exec == Exec::Parallel) {
        parallel::sample(out, f);
    } else {
        serial::sample(out, f);
    }
}

/// Smallest power of two >= `floor_nodes` with nodes * log(ratio) >= digits,
/// capped at `cap`. `ratio` > 1 is the geometric convergence factor of the
/// trapezoidal rule for the integrand at hand.
[[nodiscard]] std::size_t nodes_for_decay(double ratio, double digits, std::size_t floor_nodes,
                                          std::size_t cap);

/// Unwrapped argument of the closed sequence `values`. Returns the
/// per-node arguments (starting in (-pi, pi]), the total variation around the
/// closed curve and the largest adjacent jump.
struct UnwrappedArg {
    std::vector<double> arg;
    double total_variation = 0.0;
    double max_jump = 0.0;
};

[[nodiscard]] UnwrappedArg unwrap_argument(std::span<const cplx> values);

}  // namespace orbitq::contour
