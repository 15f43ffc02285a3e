// Serial reference loops against the OpenMP kernels. The parallel variants
// only pay off with more than one hardware thread.

#include <benchmark/benchmark.h>

#include <cmath>

#include "orbitq/bvp.hpp"
#include "orbitq/contour.hpp"
#include "orbitq/measures.hpp"

using namespace orbitq;

namespace {

const SystemParams kFig5Oriented = normalize_orientation({1.2, 1.2, 4.0, 2.0, 2.1}).params;

std::vector<cplx> nodes_for(std::size_t n) {
    return contour::make_nodes(contour::ContourSpec::with_nodes(1.1, n));
}

// Integrand shaped like the Cauchy kernel of log J.
cplx integrand(const std::vector<cplx>& z, std::size_t k) {
    return std::log(1.0 + 0.4 * z[k] * z[k]) / ((z[k] - 0.3) * (z[k] - 1.0));
}

void BM_IntegrateSerial(benchmark::State& st) {
    const auto z = nodes_for(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) {
        benchmark::DoNotOptimize(contour::serial::integrate(z, [&](std::size_t k) { return integrand(z, k); }));
    }
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_IntegrateParallel(benchmark::State& st) {
    const auto z = nodes_for(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) {
        benchmark::DoNotOptimize(contour::parallel::integrate(z, [&](std::size_t k) { return integrand(z, k); }));
    }
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_SampleSerial(benchmark::State& st) {
    const auto z = nodes_for(static_cast<std::size_t>(st.range(0)));
    std::vector<cplx> out(z.size());
    for (auto _ : st) {
        contour::serial::sample(std::span<cplx>(out), [&](std::size_t k) { return integrand(z, k); });
        benchmark::DoNotOptimize(out.data());
    }
}

void BM_SampleParallel(benchmark::State& st) {
    const auto z = nodes_for(static_cast<std::size_t>(st.range(0)));
    std::vector<cplx> out(z.size());
    for (auto _ : st) {
        contour::parallel::sample(std::span<cplx>(out), [&](std::size_t k) { return integrand(z, k); });
        benchmark::DoNotOptimize(out.data());
    }
}

void solve_and_measure(contour::Exec exec, benchmark::State& st) {
    BvpOptions opt;
    opt.exec = exec;
    for (auto _ : st) {
        const BvpSolution sol = BvpSolution::solve(kFig5Oriented, opt);
        benchmark::DoNotOptimize(expected_Q1(sol) + expected_Q2(sol) + p_empty(sol));
    }
}

void BM_SolveSerial(benchmark::State& st) { solve_and_measure(contour::Exec::Serial, st); }
void BM_SolveParallel(benchmark::State& st) { solve_and_measure(contour::Exec::Parallel, st); }

// H0(0,y) needs V on the unit circle: one contour integral per unit node.
void unit_circle(contour::Exec exec, benchmark::State& st) {
    BvpOptions opt;
    opt.exec = exec;
    opt.unit_nodes = static_cast<std::size_t>(st.range(0));
    const SystemParams p = normalize_orientation({0.3, 0.7, 3.0, 1.5, 2.5}).params;
    for (auto _ : st) {
        const BvpSolution sol = BvpSolution::solve(p, opt);
        benchmark::DoNotOptimize(solve_H0_0y(0.5, sol));
    }
}

void BM_UnitCircleSerial(benchmark::State& st) { unit_circle(contour::Exec::Serial, st); }
void BM_UnitCircleParallel(benchmark::State& st) { unit_circle(contour::Exec::Parallel, st); }

}  // namespace

BENCHMARK(BM_IntegrateSerial)->RangeMultiplier(4)->Range(4096, 65536);
BENCHMARK(BM_IntegrateParallel)->RangeMultiplier(4)->Range(4096, 65536);
BENCHMARK(BM_SampleSerial)->RangeMultiplier(4)->Range(4096, 65536);
BENCHMARK(BM_SampleParallel)->RangeMultiplier(4)->Range(4096, 65536);
BENCHMARK(BM_SolveSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolveParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_UnitCircleSerial)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_UnitCircleParallel)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
