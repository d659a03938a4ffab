#include <benchmark/benchmark.h>

#include <vector>

#include "fuse/attacks.hpp"
#include "fuse/qkd.hpp"
#include "fuse/units.hpp"

namespace {

using namespace fuse;

const Physics& physics() {
  static const Physics p = reference_physics();
  return p;
}

void BM_DropTransmission(benchmark::State& state) {
  const auto& r = physics().resonator.rates;
  double d = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ring::drop_transmission({d}, r));
    d += 1e6;
  }
}
BENCHMARK(BM_DropTransmission);

void BM_SteadyState(benchmark::State& state) {
  const auto& r = physics().resonator;
  const pr::Drive drive{dbm_to_watts(static_cast<double>(state.range(0))), r.geometry.base_resonance_hz};
  for (auto _ : state) benchmark::DoNotOptimize(pr::steady_state(drive, physics().model, r, physics().solver));
}
BENCHMARK(BM_SteadyState)->Arg(-20)->Arg(0)->Arg(10);

void BM_GaussianTransmission(benchmark::State& state) {
  const auto src = source::pulsed_signal_10ghz();
  const double shift = hz_to_rad_s(7e9);
  for (auto _ : state)
    benchmark::DoNotOptimize(source::effective_transmission(src, physics().resonator, shift));
}
BENCHMARK(BM_GaussianTransmission);

void BM_Calibrate(benchmark::State& state) {
  const auto anchors = pr::default_anchors();
  for (auto _ : state) benchmark::DoNotOptimize(pr::calibrate(anchors, physics().resonator));
}
BENCHMARK(BM_Calibrate)->Unit(benchmark::kMillisecond);

void BM_Sweep(benchmark::State& state) {
  attack::SweepSpec spec;
  spec.target_tx_power_w = dbm_to_watts(-20.0);
  const auto threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(attack::wavelength_sweep(spec, source::pulsed_signal_10ghz(), physics(), threads));
}
BENCHMARK(BM_Sweep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_Skr(benchmark::State& state) {
  const qkd::ChannelModel ch;
  for (auto _ : state) benchmark::DoNotOptimize(qkd::skr({}, ch));
}
BENCHMARK(BM_Skr);

}  // namespace
BENCHMARK_MAIN();
