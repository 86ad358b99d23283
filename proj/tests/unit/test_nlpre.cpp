#include <gtest/gtest.h>

#include <cmath>

#include "gdest/nlpre.hpp"
#include "gdest/robust_reject.hpp"

namespace gdest {
namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Box box(std::initializer_list<double> lo, std::initializer_list<double> hi) { return {vec(lo), vec(hi)}; }

TEST(Monotone, FrequencyProductIsExact) {
  const MonotoneMap m = MonotoneMap::frequency_product();
  const auto r = check_p_monotone(m, box({-10, -10}, {10, 10}), 2000);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.symmetric_part_deviation, 0.0);
  EXPECT_NEAR(r.rho_hat, 1.0, 1e-12);
  EXPECT_EQ(r.jacobian_rho, 1.0);
  const Vec th = vec({3.0, -0.5});
  const Mat pj = m.P * m.jacobian(th);
  EXPECT_EQ(pj + pj.transpose(), 2.0 * Mat::Identity(2, 2));
  EXPECT_TRUE(m.evaluate(th).isApprox(vec({3.0, -1.5, -0.5})));
}

TEST(Monotone, IdentityMap) {
  const auto r = check_p_monotone(MonotoneMap::identity(3), box({-1, -1, -1}, {1, 1, 1}), 500);
  EXPECT_TRUE(r.passed);
  EXPECT_NEAR(r.rho_hat, 1.0, 1e-12);
}

TEST(Monotone, CubicFailsNearZero) {
  MonotoneMap cubic;
  cubic.q = 1;
  cubic.p = 1;
  cubic.evaluate = [](const Vec& t) -> Vec { return t.array().cube().matrix(); };
  cubic.jacobian = [](const Vec& t) -> Mat { return Mat::Constant(1, 1, 3 * t(0) * t(0)); };
  cubic.P = Mat::Identity(1, 1);
  cubic.rho = 1.0;
  const auto r = check_p_monotone(cubic, box({-1}, {1}), 2000);
  EXPECT_FALSE(r.passed);
  EXPECT_LT(r.jacobian_rho, 1e-2);
}

TEST(Monotone, Validation) {
  MonotoneMap m = MonotoneMap::identity(2);
  m.rho = 0.0;
  EXPECT_THROW(m.validate(), ValidationError);
  MonotoneMap p = MonotoneMap::frequency_product();
  p.P = Mat::Identity(2, 2);
  EXPECT_THROW(p.validate(), ValidationError);
}

TEST(Nlpre, IdentityReducesToGd) {
  std::vector<SignalSpec> phi{SignalSpec::constant(1.0), SignalSpec::sine(0.0, 1.0, 1.3)};
  const Vec theta = vec({2.0, -1.0});
  SignalLre lre(phi, theta);
  GdConfig cfg;
  cfg.q = 2;
  cfg.gamma = 20.0;
  cfg.gamma_g = GainSchedule::constant(5.0);
  cfg.theta_g0 = vec({0.5, 0.1});
  cfg.theta0 = vec({0.2, 0.3});
  cfg.validate();
  const MonotoneMap id = MonotoneMap::identity(2);
  NlpreState ns = nlpre_initial_state(cfg, id);
  GdState gs = gd_initial_state(cfg);
  const double h = 1e-3;
  double worst = 0.0;
  for (int k = 0; k < 3000; ++k) {
    const auto s = lre.sample(k * h);
    ns = nlpre_step(ns, s.phi, s.y, id, k * h, h, cfg);
    gs = gd_step_ct(gs, s.phi, s.y, k * h, h, cfg);
    worst = std::max(worst, (ns.theta - gs.theta).cwiseAbs().maxCoeff());
    worst = std::max(worst, std::abs(ns.Delta - gs.Delta));
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(Nlpre, ZeroRegressorFreezes) {
  GdConfig cfg;
  cfg.q = 3;
  cfg.gamma = 10.0;
  cfg.theta0 = vec({0.2, 0.4});
  const MonotoneMap m = MonotoneMap::frequency_product();
  NlpreState s = nlpre_initial_state(cfg, m);
  for (int k = 0; k < 100; ++k) s = nlpre_step(s, Vec::Zero(3), 1.0, m, k * 0.01, 0.01, cfg);
  EXPECT_EQ(s.theta, vec({0.2, 0.4}));
  EXPECT_EQ(s.Delta, 0.0);
}

TEST(Nlpre, DiscreteTimeIsRejected) {
  GdConfig cfg;
  cfg.q = 1;
  cfg.mode = TimeMode::Discrete;
  cfg.validate();
  const MonotoneMap m = MonotoneMap::identity(1);
  EXPECT_THROW(nlpre_step(nlpre_initial_state(cfg, m), Vec::Ones(1), 1.0, m, 0, 1, cfg), DomainError);
}

TEST(Nlpre, ScalarLyapunovClosedForm) {
  SignalLre lre({SignalSpec::constant(1.0)}, vec({1.5}));
  GdConfig cfg;
  cfg.q = 1;
  cfg.gamma = 2.0;
  cfg.gamma_g = GainSchedule::constant(1.0);
  cfg.validate();
  const NlpreRun run = run_nlpre(lre, MonotoneMap::identity(1), cfg, TimeGrid::over(6.0, 1e-3), vec({1.5}));
  double worst = 0.0;
  for (std::size_t k = 0; k < run.error_norm.size(); ++k) {
    const double t = run.error_norm.t[k];
    const double integral = t - 2.0 * (1.0 - std::exp(-t)) + 0.5 * (1.0 - std::exp(-2.0 * t));
    const double u_exact = 0.5 * 1.5 * 1.5 * std::exp(-2.0 * cfg.gamma * integral);
    const double u = 0.5 * std::pow(run.error_norm.values[k](0), 2);
    worst = std::max(worst, std::abs(u - u_exact));
  }
  EXPECT_LE(worst, 1e-5);
  EXPECT_TRUE(lyapunov_decrement(run.error_norm, run.delta, 1.0, cfg.gamma));
  EXPECT_LE(run.identity_residual, 1e-6);
}

TEST(Nlpre, DecrementWithZeroDeltaKeepsU) {
  SignalTrace err, delta;
  for (int k = 0; k < 10; ++k) {
    err.push(k * 0.1, 0.7);
    delta.push(k * 0.1, 0.0);
  }
  EXPECT_TRUE(lyapunov_decrement(err, delta, 1.0, 5.0));
  err.values[5](0) = 0.9;
  EXPECT_FALSE(lyapunov_decrement(err, delta, 1.0, 5.0));
}

TEST(Nlpre, RejectionShortRunDecreases) {
  Disturbance xi{Disturbance::Kind::Sinusoid, 0.5, 5.0, 0.4};
  RejectionLre lre(SignalSpec::damped_cos(5.0, -0.2, M_PI / 4), 5.0, xi, 1.0, true);
  GdConfig cfg;
  cfg.q = 3;
  cfg.gamma = 150.0;
  cfg.gamma_g = GainSchedule::constant(0.9);
  cfg.theta_g0 = vec({0.4, 0.2, 0.5});
  cfg.theta0 = vec({0.2, 0.4});
  const Vec truth = *lre.reduced_truth();
  const NlpreRun run = run_nlpre(lre, MonotoneMap::frequency_product(), cfg, TimeGrid::over(60.0, 2e-3), truth, 10);
  EXPECT_LT(run.error_norm.values.back()(0), run.error_norm.values.front()(0));
  EXPECT_TRUE(lyapunov_decrement(run.error_norm, run.delta, 1.0, cfg.gamma, 1e-4));
}

TEST(Nlpre, FrequencyFromEstimate) {
  EXPECT_DOUBLE_EQ(frequency_from_estimate(0.04), 5.0);
  EXPECT_THROW(frequency_from_estimate(0.0), DomainError);
}

}  // namespace
}  // namespace gdest
