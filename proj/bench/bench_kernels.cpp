// Serial vs OpenMP timings for the hot kernels. Inputs come from a short
// training run on the acrylate corpus so the sizes match real epochs.
//
//   bench_kernels --benchmark_filter=Chamfer
//
// Run with OMP_NUM_THREADS set; on a single core the two paths tie.

#include <benchmark/benchmark.h>

#include "fragmenta/app/training.hpp"
#include "fragmenta/chem/smiles.hpp"
#include "fragmenta/gen/generator.hpp"
#include "fragmenta/parallel/kernels.hpp"

using namespace fragmenta;
using parallel::Exec;

namespace {

struct Fixture {
  std::vector<chem::Molecule> training;
  app::RunState state;
  std::vector<chem::Molecule> generated;
  std::vector<chem::Fingerprint> gen_fps;
  std::vector<chem::Fingerprint> train_fps;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture x;
    app::RunConfig config;
    config.seed = 7;
    config.data.train = std::string(FRAGMENTA_SOURCE_DIR) + "/data/acrylates.smi";
    x.training = chem::load_molecules(config.data.train);
    x.state = app::RunState::fresh(config);
    for (int e = 0; e < 10; ++e) app::train_epoch(x.state, x.training, config);
    gen::GenerationConfig g;
    g.batch_size = 2000;
    g.rng_seed = 1;
    for (auto& m : gen::generate_batch(x.state.q, x.state.vocab, g)) x.generated.push_back(std::move(m.molecule));
    x.gen_fps = parallel::fingerprints(x.generated, 2, 2048, Exec::Serial);
    x.train_fps = parallel::fingerprints(x.training, 2, 2048, Exec::Serial);
    return x;
  }();
  return f;
}

Exec exec_of(const benchmark::State& s) { return s.range(0) == 0 ? Exec::Serial : Exec::Parallel; }

void label(benchmark::State& s) { s.SetLabel(s.range(0) == 0 ? "serial" : "openmp"); }

void BM_Fingerprints(benchmark::State& s) {
  const auto& f = fixture();
  for (auto _ : s) benchmark::DoNotOptimize(parallel::fingerprints(f.generated, 2, 2048, exec_of(s)));
  s.SetItemsProcessed(s.iterations() * static_cast<long>(f.generated.size()));
  label(s);
}

void BM_MeanDistanceToRest(benchmark::State& s) {
  const auto& f = fixture();
  const std::span<const chem::Fingerprint> fps(f.gen_fps.data(), static_cast<std::size_t>(s.range(1)));
  for (auto _ : s) benchmark::DoNotOptimize(parallel::mean_distance_to_rest(fps, exec_of(s)));
  label(s);
}

void BM_Chamfer(benchmark::State& s) {
  const auto& f = fixture();
  for (auto _ : s) benchmark::DoNotOptimize(parallel::chamfer_distance(f.gen_fps, f.train_fps, exec_of(s)));
  label(s);
}

void BM_GenerateBatch(benchmark::State& s) {
  const auto& f = fixture();
  const gen::GenerationIndex index(f.state.q, f.state.vocab);
  gen::GenerationConfig g;
  g.batch_size = 500;
  for (auto _ : s) {
    auto batch = s.range(0) == 0 ? gen::generate_batch_serial(index, g) : gen::generate_batch(index, g);
    benchmark::DoNotOptimize(batch);
  }
  s.SetItemsProcessed(s.iterations() * 500);
  label(s);
}

}  // namespace

BENCHMARK(BM_Fingerprints)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MeanDistanceToRest)->ArgsProduct({{0, 1}, {500, 2000}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Chamfer)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GenerateBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
