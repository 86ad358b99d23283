#include <benchmark/benchmark.h>

#include <cmath>

#include "gdest/dg_baseline.hpp"
#include "gdest/excitation.hpp"
#include "gdest/gd_estimator.hpp"
#include "gdest/numcore.hpp"
#include "gdest/signals.hpp"

namespace {

using namespace gdest;

GdConfig config(int q) {
  GdConfig cfg;
  cfg.q = q;
  cfg.gamma = 10.0;
  cfg.gamma_g = GainSchedule::constant(100.0);
  cfg.validate();
  return cfg;
}

void BM_Adjugate(benchmark::State& state) {
  const int q = static_cast<int>(state.range(0));
  Mat m = Mat::Random(q, q) + 2.0 * Mat::Identity(q, q);
  for (auto _ : state) benchmark::DoNotOptimize(adjugate(m));
}
BENCHMARK(BM_Adjugate)->DenseRange(1, 6);

void BM_GdStepCt(benchmark::State& state) {
  const int q = static_cast<int>(state.range(0));
  const GdConfig cfg = config(q);
  GdState s = gd_initial_state(cfg);
  Vec phi = Vec::LinSpaced(q, 0.1, 1.0);
  double t = 0.0;
  for (auto _ : state) {
    s = gd_step_ct(s, phi, 1.0, t, 1e-3, cfg);
    if (!s.theta.allFinite() || s.Phi.norm() < 1e-200) s = gd_initial_state(cfg);
    t += 1e-3;
  }
}
BENCHMARK(BM_GdStepCt)->DenseRange(1, 4);

void BM_IdentificationRun(benchmark::State& state) {
  for (auto _ : state) {
    IdentificationLre lre({2, 1}, {1, 1, 2}, {1, 20, 100}, SignalSpec::exp_sum({1, 1}, {-2, -1.5}));
    GdConfig cfg = config(4);
    cfg.gamma_g = GainSchedule::constant(2500.0);
    cfg.gamma = 200.0;
    benchmark::DoNotOptimize(run_gd(lre, cfg, TimeGrid::over(1.0, 1e-3), 100));
  }
}
BENCHMARK(BM_IdentificationRun)->Unit(benchmark::kMillisecond);

void BM_CheckIe(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  RegressorTrace tr;
  tr.grid = TimeGrid::over(static_cast<double>(n) * 1e-3, 1e-3);
  for (std::size_t k = 0; k < tr.grid.samples(); ++k) {
    const double t = tr.grid.time(k);
    Vec phi(3);
    phi << std::sin(t), std::cos(2 * t), std::exp(-t);
    tr.samples.push_back(phi);
  }
  for (auto _ : state) benchmark::DoNotOptimize(check_ie(tr, 1e9));
}
BENCHMARK(BM_CheckIe)->Arg(1000)->Arg(10000);

}  // namespace
BENCHMARK_MAIN();
