#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <string>

#include "twopath/interferometer.hpp"
#include "twopath/layout_dsl.hpp"
#include "twopath/oracle.hpp"
#include "twopath/sweep.hpp"

namespace {

using namespace twopath;

TwoPathLayout cavity_layout() {
  TwoPathLayout layout;
  layout.upper = {PathSegment::free(100.0), PathSegment::cavity(500.0, 0.0), PathSegment::free(400.0)};
  layout.lower = {PathSegment::free(1000.0), PathSegment::phase_shifter(0.0)};
  return layout;
}

const UnstableParticle kParticle{10.0, 1000.0, ""};

void BM_DetectionClosedForm(benchmark::State& state) {
  const auto layout = cavity_layout();
  double phi = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(detection_probabilities(layout, kParticle, phi));
    phi += 1e-3;
  }
}
BENCHMARK(BM_DetectionClosedForm);

void BM_DetectionAmplitudes(benchmark::State& state) {
  const auto layout = cavity_layout();
  double phi = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(detection_probabilities_from_amplitudes(layout, kParticle, phi));
    phi += 1e-3;
  }
}
BENCHMARK(BM_DetectionAmplitudes);

void BM_FringeScan(benchmark::State& state) {
  const auto layout = cavity_layout();
  const auto phases = linspace(0.0, 2.0 * std::numbers::pi, static_cast<std::size_t>(state.range(0)), false);
  for (auto _ : state) benchmark::DoNotOptimize(fringe_scan(layout, kParticle, phases));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FringeScan)->Arg(1000)->Arg(10000);

void BM_Sweep(benchmark::State& state) {
  const auto layout = cavity_layout();
  const SweepSpec spec{SweepParameter::gamma_ratio, 0.0, 10.0, 10001, SweepScale::linear};
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_sweep(layout, kParticle, spec, static_cast<unsigned>(state.range(0))));
  }
  state.SetItemsProcessed(state.iterations() * spec.steps);
}
BENCHMARK(BM_Sweep)->Arg(1)->Arg(4)->UseRealTime();

void BM_Propagate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Grid grid{n, 400.0 / static_cast<double>(n), -200.0};
  auto packet = gaussian_packet(grid, -50.0, 8.0, 2.0);
  packet.particle = UnstableParticle{2.0, 200.0, ""};
  const double dt = 2.0 * kStepBound / (grid.nyquist() * grid.nyquist());
  for (auto _ : state) benchmark::DoNotOptimize(propagate(packet, 100.0 * dt, dt));
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_Propagate)->Arg(4096)->Arg(16384);

void BM_ParseSerialize(benchmark::State& state) {
  const std::string text =
      "particle { k = 10; ell = 1000; label = \"bench\"; }\n"
      "path upper { segment(length=100); cavity(length=500, gamma_ratio=0); "
      "segment(length=400, potential=[0, 1, 2, 1, 0]); }\n"
      "path lower { segment(length=1000); phase(phi=0.25); }\n"
      "splitter { convention = general; delta = 0.1; alpha = 0.2; beta = 0.3; mirror_phase = 0.4; }\n"
      "sweep { parameter = gamma_ratio; start = 0; end = 10; steps = 101; }\n";
  for (auto _ : state) {
    auto r = parse(text);
    benchmark::DoNotOptimize(serialize(*r.document));
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ParseSerialize);

}  // namespace

BENCHMARK_MAIN();
