#include "isochrone/analytic.hpp"
#include "isochrone/birkhoff.hpp"
#include "isochrone/oracle.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace isochrone;

namespace {

const auto kHenon = potential::fromHenon(1, 1);
const analytic::OrbitConstants kOrbit{-0.25, 0.5};

void BM_OrbitElements(benchmark::State& state)
{
    for(auto _ : state)
        benchmark::DoNotOptimize(analytic::orbitElements(kHenon, kOrbit));
}
BENCHMARK(BM_OrbitElements);

void BM_SolveKepler(benchmark::State& state)
{
    const double ecc = static_cast<double>(state.range(0)) / 100.0;
    double M = 0;
    for(auto _ : state) {
        benchmark::DoNotOptimize(analytic::solveKepler(ecc, M));
        M += 0.37;
    }
}
BENCHMARK(BM_SolveKepler)->Arg(10)->Arg(60)->Arg(99);

void BM_Trajectory(benchmark::State& state)
{
    const double T = analytic::radialPeriod(kHenon, kOrbit.xi);
    std::vector<double> times(static_cast<std::size_t>(state.range(0)));
    for(std::size_t i = 0; i < times.size(); ++i)
        times[i] = T * static_cast<double>(i) / static_cast<double>(times.size());
    for(auto _ : state)
        benchmark::DoNotOptimize(analytic::trajectory(kHenon, kOrbit, times));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Trajectory)->Arg(100)->Arg(10000);

void BM_QuadRadialPeriod(benchmark::State& state)
{
    const auto pot = oracle::RadialPotential::fromParabola(kHenon);
    for(auto _ : state)
        benchmark::DoNotOptimize(oracle::quadRadialPeriod(pot, kOrbit));
}
BENCHMARK(BM_QuadRadialPeriod);

void BM_IntegrateOrbit(benchmark::State& state)
{
    const auto pot = oracle::RadialPotential::fromParabola(kHenon);
    const double T = analytic::radialPeriod(kHenon, kOrbit.xi);
    for(auto _ : state)
        benchmark::DoNotOptimize(oracle::integrateOrbit(pot, kOrbit, T, 101));
}
BENCHMARK(BM_IntegrateOrbit)->Unit(benchmark::kMillisecond);

void BM_Invariants(benchmark::State& state)
{
    for(auto _ : state) {
        benchmark::DoNotOptimize(birkhoff::invariantsFromPotential(kHenon, 1.0));
        benchmark::DoNotOptimize(birkhoff::invariantsFromPeriod(kHenon, 1.0));
    }
}
BENCHMARK(BM_Invariants);

}  // namespace

BENCHMARK_MAIN();
