#include <benchmark/benchmark.h>

#include "wmmr/litmus.hpp"
#include "wmmr/proof.hpp"

using namespace wmmr;

namespace {

const char* kTests[] = {"SB", "WRC", "IRIW", "RRC"};

LitmusTest load(int i) {
  return elaborate(load_litmus_file(std::string(WMMR_SOURCE_DIR) + "/corpus/" + kTests[i] + ".lit"), 2);
}

void BM_explore_serial(benchmark::State& st) {
  LitmusTest t = load(static_cast<int>(st.range(0)));
  st.SetLabel(kTests[st.range(0)]);
  for (auto _ : st) benchmark::DoNotOptimize(explore_serial(t, Bounds{}));
}

void BM_explore_openmp(benchmark::State& st) {
  LitmusTest t = load(static_cast<int>(st.range(0)));
  st.SetLabel(kTests[st.range(0)]);
  for (auto _ : st) benchmark::DoNotOptimize(explore(t, Bounds{}));
}

void BM_proof(benchmark::State& st, bool parallel) {
  LitmusTest t = load(static_cast<int>(st.range(0)));
  st.SetLabel(kTests[st.range(0)]);
  ProofBounds pb = default_proof_bounds();
  pb.parallel = parallel;
  for (auto _ : st) benchmark::DoNotOptimize(proof_final_states(t, pb));
}

void BM_proof_serial(benchmark::State& st) { BM_proof(st, false); }
void BM_proof_openmp(benchmark::State& st) { BM_proof(st, true); }

}  // namespace

BENCHMARK(BM_explore_serial)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_explore_openmp)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_proof_serial)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_proof_openmp)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
