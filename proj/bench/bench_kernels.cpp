// Serial reference vs OpenMP paths: GEMM on model shapes, instance construction on the synthetic corpus.

#include "editsum/kernels.hpp"
#include "editsum/retrieval.hpp"
#include "editsum/synth.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

namespace {

namespace k = editsum::kernels;

template <typename Fn>
void run_gemm(benchmark::State& state, Fn fn) {
    const auto m = static_cast<std::size_t>(state.range(0));
    const auto kk = static_cast<std::size_t>(state.range(1));
    const auto n = static_cast<std::size_t>(state.range(2));
    std::mt19937 rng(1);
    std::uniform_real_distribution<float> d(-1, 1);
    std::vector<float> a(m * kk), b(kk * n), c(m * n);
    for (auto& x : a) x = d(rng);
    for (auto& x : b) x = d(rng);
    for (auto _ : state) {
        fn(a.data(), b.data(), c.data(), m, kk, n, false);
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * m * kk * n));
}

// batch 32: LSTM gates, output projection; 512 rows: attention precompute
#define GEMM_SHAPES ->Args({32, 320, 512})->Args({32, 448, 400})->Args({544, 256, 128})

void BM_gemm_nn_serial(benchmark::State& s) { run_gemm(s, static_cast<void (*)(const float*, const float*, float*, std::size_t, std::size_t, std::size_t, bool)>(k::serial::gemm_nn)); }
void BM_gemm_nn_parallel(benchmark::State& s) { run_gemm(s, static_cast<void (*)(const float*, const float*, float*, std::size_t, std::size_t, std::size_t, bool)>(k::parallel::gemm_nn)); }
void BM_gemm_nt_serial(benchmark::State& s) { run_gemm(s, static_cast<void (*)(const float*, const float*, float*, std::size_t, std::size_t, std::size_t, bool)>(k::serial::gemm_nt)); }
void BM_gemm_nt_parallel(benchmark::State& s) { run_gemm(s, static_cast<void (*)(const float*, const float*, float*, std::size_t, std::size_t, std::size_t, bool)>(k::parallel::gemm_nt)); }
void BM_gemm_tn_serial(benchmark::State& s) { run_gemm(s, static_cast<void (*)(const float*, const float*, float*, std::size_t, std::size_t, std::size_t, bool)>(k::serial::gemm_tn)); }
void BM_gemm_tn_parallel(benchmark::State& s) { run_gemm(s, static_cast<void (*)(const float*, const float*, float*, std::size_t, std::size_t, std::size_t, bool)>(k::parallel::gemm_tn)); }

BENCHMARK(BM_gemm_nn_serial) GEMM_SHAPES;
BENCHMARK(BM_gemm_nn_parallel) GEMM_SHAPES;
BENCHMARK(BM_gemm_nt_serial) GEMM_SHAPES;
BENCHMARK(BM_gemm_nt_parallel) GEMM_SHAPES;
BENCHMARK(BM_gemm_tn_serial) GEMM_SHAPES;
BENCHMARK(BM_gemm_tn_parallel) GEMM_SHAPES;

namespace r = editsum::retrieval;

struct Fixture {
    editsum::corpus::DatasetSplit train;
    r::InvertedIndex summary_index;
    r::InvertedIndex code_index;
};

const Fixture& fixture() {
    static const Fixture f = [] {
        const auto c = editsum::synth::generate({});
        Fixture x{editsum::corpus::make_split(editsum::corpus::SplitName::train, c.train), {}, {}};
        x.summary_index = r::build_index(x.train.pairs, r::Field::summary);
        x.code_index = r::build_index(x.train.pairs, r::Field::code);
        return x;
    }();
    return f;
}

void BM_summary_instances(benchmark::State& state) {
    const auto& f = fixture();
    const auto exec = state.range(0) ? r::Execution::parallel : r::Execution::serial;
    for (auto _ : state) benchmark::DoNotOptimize(r::build_training_instances(f.train, f.summary_index, {}, exec));
}

void BM_code_instances(benchmark::State& state) {
    const auto& f = fixture();
    const auto exec = state.range(0) ? r::Execution::parallel : r::Execution::serial;
    for (auto _ : state) benchmark::DoNotOptimize(r::build_code_instances(f.train, f.train, f.code_index, true, exec));
}

// 0 = serial, 1 = parallel
BENCHMARK(BM_summary_instances)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_code_instances)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
