// Serial reference vs OpenMP kernels.
#include "satiqc/config.hpp"

#include <benchmark/benchmark.h>

using namespace satiqc;

namespace {

struct SchurData {
  std::vector<SdpBlock> blocks;
  std::vector<Mat> Zinv, X;
  int m = 0;
};

// Blocks of the second-order synthesis LMI with random SPD iterates.
const SchurData& schur_data() {
  static const SchurData d = [] {
    const ProblemConfig c = load_config(SATIQC_CONFIG_DIR "/second_order.json");
    const SaturatedLFTPlant& p = *c.plant;
    const AugmentedPlant aug = loop_transform(p);
    const SynthesisProblem sp = build_synthesis_lmi(
        aug, make_nonlinearity_filters(c.iqcs, p.alpha, p.nu()), uncertainty_filters(p.structure), c.synthesis);
    const LoweredProblem lp = sp.lmi.lower();
    SchurData s;
    s.blocks = lp.sdp.blocks;
    s.m = lp.sdp.m;
    std::srand(7);
    for (const auto& b : s.blocks) {
      const Mat R = Mat::Random(b.dim(), b.dim());
      s.Zinv.push_back(R * R.transpose() + Mat::Identity(b.dim(), b.dim()));
      const Mat S = Mat::Random(b.dim(), b.dim());
      s.X.push_back(S * S.transpose() + Mat::Identity(b.dim(), b.dim()));
    }
    return s;
  }();
  return d;
}

void BM_SchurSerial(benchmark::State& st) {
  const SchurData& d = schur_data();
  for (auto _ : st) benchmark::DoNotOptimize(schur_complement_serial(d.blocks, d.Zinv, d.X, d.m));
}
BENCHMARK(BM_SchurSerial)->Unit(benchmark::kMicrosecond);

void BM_SchurOmp(benchmark::State& st) {
  const SchurData& d = schur_data();
  for (auto _ : st) benchmark::DoNotOptimize(schur_complement_omp(d.blocks, d.Zinv, d.X, d.m));
}
BENCHMARK(BM_SchurOmp)->Unit(benchmark::kMicrosecond);

struct BatchData {
  SimModel model;
  std::vector<Scenario> scs;
};

const BatchData& batch_data() {
  static const BatchData d = [] {
    const ProblemConfig c = load_config(SATIQC_CONFIG_DIR "/second_order.json");
    const SaturatedLFTPlant& p = *c.plant;
    const SynthesisRun run = synthesize(p, c.iqcs, c.synthesis, c.solver, c.factor);
    const Interconnection ic = attach_filters(run.aug, make_nonlinearity_filters(c.iqcs, p.alpha, p.nu()),
                                              uncertainty_filters(p.structure));
    BatchData b{make_sim_model(p, ic, run.result.F, run.result.H), {}};
    std::mt19937_64 rng(3);
    for (int i = 0; i < 8; ++i) b.scs.push_back(random_scenario(rng, p.structure, p.nd(), 5.0, 1e-3));
    return b;
  }();
  return d;
}

void BM_ScenarioBatchSerial(benchmark::State& st) {
  const BatchData& d = batch_data();
  for (auto _ : st) benchmark::DoNotOptimize(simulate_batch_serial(d.model, d.scs));
}
BENCHMARK(BM_ScenarioBatchSerial)->Unit(benchmark::kMillisecond);

void BM_ScenarioBatchOmp(benchmark::State& st) {
  const BatchData& d = batch_data();
  for (auto _ : st) benchmark::DoNotOptimize(simulate_batch(d.model, d.scs));
}
BENCHMARK(BM_ScenarioBatchOmp)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
