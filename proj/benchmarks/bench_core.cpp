#include <benchmark/benchmark.h>

#include "dfield/markov.hpp"
#include "dfield/meshes.hpp"
#include "dfield/potential.hpp"

namespace {

using namespace dfield;

void BM_GroundedFactor(benchmark::State& state) {
  const auto side = static_cast<Vertex>(state.range(0));
  for (auto _ : state) {
    // a fresh form each round so the cached factor is rebuilt
    const DirichletForm form = grid_form(side, side, {{0, 1.0}});
    benchmark::DoNotOptimize(&form.grounded_factor());
  }
}
BENCHMARK(BM_GroundedFactor)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_CheckMarkov(benchmark::State& state) {
  const auto side = static_cast<Vertex>(state.range(0));
  const GaussianField field(grid_form(side, side), 1);
  const VertexSet a = field.form().space().ball(side * side / 2 + side / 2, static_cast<int>(side / 4));
  for (auto _ : state) benchmark::DoNotOptimize(check_markov(field, a).max_violation);
}
BENCHMARK(BM_CheckMarkov)->Arg(6)->Arg(10)->Arg(14)->Unit(benchmark::kMillisecond);

void BM_TraceForm(benchmark::State& state) {
  const DiskMesh mesh = neumann_disk(static_cast<int>(state.range(0)));
  const VertexSet ring(mesh.ring);
  for (auto _ : state) benchmark::DoNotOptimize(trace_form(mesh.form, ring).size());
}
BENCHMARK(BM_TraceForm)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_SampleBatch(benchmark::State& state) {
  const GaussianField field(path_form(200, {{0, 1.0}}), 1);
  for (auto _ : state) benchmark::DoNotOptimize(field.sample_batch(state.range(0), 3).sum());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleBatch)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
