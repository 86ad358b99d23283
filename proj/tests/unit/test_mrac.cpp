#include <gtest/gtest.h>

#include <cmath>

#include "gdest/mrac.hpp"

namespace gdest {
namespace {

Plant first_order(double kp) {
  Plant p;
  p.numerator = {kp};
  p.denominator = {1.0, 1.0};
  return p;
}

ReferenceModel model(const SignalSpec& r) {
  ReferenceModel m;
  m.k_m = 3.0;
  m.D_m = {1.0, 3.0};
  m.r = r;
  return m;
}

GdConfig estimator(double gamma_g, double gamma) {
  GdConfig cfg;
  cfg.q = 2;
  cfg.gamma = gamma;
  cfg.gamma_g = GainSchedule::constant(gamma_g);
  cfg.theta0 = Vec::Constant(2, 0.1);
  return cfg;
}

TEST(Plant, FirstOrderStepResponse) {
  LtiFilter p = first_order(2.0).realize();
  const double h = 1e-3;
  double worst = 0.0;
  for (int k = 1; k <= 5000; ++k) worst = std::max(worst, std::abs(plant_step(p, 1.0, h) - 2.0 * (1 - std::exp(-k * h))));
  EXPECT_LE(worst, 1e-6);
  LtiFilter z = first_order(2.0).realize();
  for (int k = 0; k < 10; ++k) EXPECT_EQ(plant_step(z, 0.0, h), 0.0);
}

TEST(Plant, CascadeDcGain) {
  Plant p = first_order(2.0);
  p.unmodeled_num = {229.0};
  p.unmodeled_den = {1.0, 30.0, 229.0};
  LtiFilter f = p.realize();
  EXPECT_EQ(f.order(), 3);
  double y = 0.0;
  for (int k = 0; k < 20000; ++k) y = plant_step(f, 1.0, 1e-3);
  EXPECT_NEAR(y, 2.0, 1e-3);
}

TEST(Plant, Validation) {
  Plant nonmonic;
  nonmonic.numerator = {1.0};
  nonmonic.denominator = {2.0, 1.0};
  EXPECT_THROW(nonmonic.validate(), ValidationError);
  Plant biproper;
  biproper.numerator = {1.0, 1.0};
  biproper.denominator = {1.0, 1.0};
  EXPECT_THROW(biproper.validate(), ValidationError);
  Plant nonminimum;
  nonminimum.numerator = {1.0, -1.0};
  nonminimum.denominator = {1.0, 2.0, 1.0};
  EXPECT_THROW(nonminimum.validate(), ValidationError);
  ReferenceModel m = model(SignalSpec::constant(1.0));
  m.D_m = {1.0, -3.0};
  EXPECT_THROW(m.validate(1), ValidationError);
}

TEST(IdealTheta, ModelMatching) {
  const auto th = ideal_theta(first_order(2.0), model(SignalSpec::constant(2.0)));
  ASSERT_TRUE(th);
  EXPECT_DOUBLE_EQ((*th)(0), -1.0);
  EXPECT_DOUBLE_EQ((*th)(1), 1.5);
  const auto neg = ideal_theta(first_order(-2.0), model(SignalSpec::constant(2.0)));
  EXPECT_DOUBLE_EQ((*neg)(0), 1.0);
  EXPECT_DOUBLE_EQ((*neg)(1), -1.5);
}

// n_p = 1: phi_PE = (y_p, r), phi_IE = (y_p / D_m, y_p / k_m), u_IE = u / D_m.
TEST(MracSignals, FirstOrderBookkeeping) {
  const Plant p = first_order(2.0);
  const ReferenceModel m = model(SignalSpec::constant(2.0));
  MracSignals sig(p, m, MracFilters{});
  EXPECT_EQ(sig.dimension(), 2);
  EXPECT_EQ(sig.phi_pe(0.0), Vec::Zero(2));
  EXPECT_EQ(sig.phi_ie(), Vec::Zero(2));

  LtiFilter plant = p.realize();
  LtiFilter y_dm = realize_rational({2.0}, {1.0, 4.0, 3.0});
  LtiFilter u_dm = realize_rational({1.0}, {1.0, 3.0});
  const double h = 1e-3;
  double worst = 0.0;
  for (int k = 0; k < 3000; ++k) {
    const double u = std::sin(3.0 * k * h) + 0.5;
    const double yp = plant.output_scalar(u);
    const double fy = y_dm.output_scalar(u);
    const double fu = u_dm.output_scalar(u);
    worst = std::max(worst, std::abs(sig.phi_pe(0.7)(0) - yp));
    EXPECT_EQ(sig.phi_pe(0.7)(1), 0.7);
    worst = std::max(worst, std::abs(sig.phi_ie()(0) - fy));
    worst = std::max(worst, std::abs(sig.phi_ie()(1) - yp / 3.0));
    worst = std::max(worst, std::abs(sig.u_ie() - fu));
    y_dm.step_scalar(u, h);
    u_dm.step_scalar(u, h);
    plant.step_scalar(u, h);
    sig.advance(u, h);
  }
  EXPECT_LE(worst, 1e-4);
}

TEST(MracClosedLoop, PinnedIdealGainsTrack) {
  const Plant p = first_order(2.0);
  const ReferenceModel m = model(SignalSpec::sine(0.3, 18.5, 16.1));
  GdConfig cfg = estimator(200, 100);
  cfg.theta0 = *ideal_theta(p, m);
  MracOptions opt;
  opt.adapt = false;
  auto tail_at = [&](double h) {
    const MracRun run = mrac_closed_loop(p, m, MracFilters{}, cfg, TimeGrid::over(10.0, h), opt);
    double tail = 0.0;
    for (std::size_t k = 0; k < run.e_t.size(); ++k) {
      if (run.e_t.t[k] >= 10.0 / 3.0) tail = std::max(tail, std::abs(run.e_t.values[k](0)));
    }
    EXPECT_LE(run.lre_residual, 1e-4);
    EXPECT_EQ(run.theta.values.back(), cfg.theta0);
    return tail;
  };
  // The input is held over each step, so the residual tracking error is O(h).
  const double coarse = tail_at(1e-3);
  const double fine = tail_at(5e-4);
  EXPECT_LT(coarse, 5e-3);
  EXPECT_NEAR(coarse / fine, 2.0, 0.1);
}

TEST(MracClosedLoop, IdealCasesConverge) {
  for (const auto& r : {SignalSpec::sine(0.3, 18.5, 16.1), SignalSpec::constant(2.0)}) {
    const Plant p = first_order(2.0);
    const MracRun run = mrac_closed_loop(p, model(r), MracFilters{}, estimator(200, 100), TimeGrid::over(100.0, 1e-3),
                                         MracOptions{true, 1e6, 100});
    EXPECT_FALSE(run.diverged);
    EXPECT_LT(run.error_norm.values.back()(0), 1e-2);
    EXPECT_LT(std::abs(run.e_t.values.back()(0)), 1e-2);
  }
}

TEST(MracClosedLoop, HighGainRohrsDiverges) {
  Plant p = first_order(2.0);
  p.unmodeled_num = {229.0};
  p.unmodeled_den = {1.0, 30.0, 229.0};
  const MracRun run = mrac_closed_loop(p, model(SignalSpec::sine(0.3, 18.5, 16.1)), MracFilters{},
                                       estimator(1000, 1000), TimeGrid::over(5.0, 1e-4), MracOptions{true, 1e6, 10});
  EXPECT_TRUE(run.diverged);
  EXPECT_GT(run.peak, 1e6);
  ASSERT_FALSE(run.theta.empty());
  EXPECT_LE(run.theta.t.back(), run.diverged_at + 1e-12);
  EXPECT_EQ(run.theta.size(), run.e_t.size());
}

TEST(MracClosedLoop, ZeroHorizon) {
  const MracRun run = mrac_closed_loop(first_order(2.0), model(SignalSpec::constant(2.0)), MracFilters{},
                                       estimator(200, 100), TimeGrid::over(0.0, 1e-3));
  EXPECT_TRUE(run.theta.empty());
  EXPECT_FALSE(run.diverged);
}

}  // namespace
}  // namespace gdest
