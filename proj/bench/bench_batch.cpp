// Parallel kernels against their serial references.

#include "netctrl/kernels.hpp"
#include "netctrl/oracle.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using netctrl::Matrix;

const netctrl::Tolerances kTol;

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        m.data()[i] = {d(rng), d(rng)};
    }
    return m;
}

netctrl::GenSpec bench_spec() {
    netctrl::GenSpec g;
    g.seed = 1;
    return g;
}

void BM_BatchSerial(benchmark::State& state) {
    const auto g = bench_spec();
    for (auto _ : state) {
        benchmark::DoNotOptimize(netctrl::run_batch_serial(g, static_cast<int>(state.range(0)), kTol));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BatchParallel(benchmark::State& state) {
    const auto g = bench_spec();
    for (auto _ : state) {
        benchmark::DoNotOptimize(netctrl::run_batch(g, static_cast<int>(state.range(0)), kTol));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_KronSerial(benchmark::State& state) {
    const Matrix a = random_matrix(state.range(0), state.range(0), 1);
    const Matrix b = random_matrix(8, 8, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(netctrl::kernels::kron_serial(a, b));
    }
}

void BM_KronParallel(benchmark::State& state) {
    const Matrix a = random_matrix(state.range(0), state.range(0), 1);
    const Matrix b = random_matrix(8, 8, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(netctrl::kernels::kron_parallel(a, b));
    }
}

}  // namespace

BENCHMARK(BM_BatchSerial)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchParallel)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KronSerial)->Arg(8)->Arg(32)->Arg(64);
BENCHMARK(BM_KronParallel)->Arg(8)->Arg(32)->Arg(64);

BENCHMARK_MAIN();
