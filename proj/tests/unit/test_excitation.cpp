#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "gdest/excitation.hpp"

namespace gdest {
namespace {

RegressorTrace sampled(int q, double horizon, double h, const std::function<Vec(double)>& phi) {
  RegressorTrace tr;
  tr.grid = TimeGrid::over(horizon, h);
  for (std::size_t k = 0; k < tr.grid.samples(); ++k) tr.samples.push_back(phi(tr.grid.time(k)));
  (void)q;
  return tr;
}

RegressorTrace discrete(const std::vector<Vec>& samples) {
  RegressorTrace tr;
  tr.mode = TimeMode::Discrete;
  tr.grid = TimeGrid::discrete(samples.size() - 1);
  tr.samples = samples;
  return tr;
}

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

TEST(Gramian, ConstantScalarIntegral) {
  const auto tr = sampled(1, 2.0, 1e-3, [](double) { return v1(1.0); });
  EXPECT_NEAR(ie_gramian(tr, tr.samples.size() - 1)(0, 0), 2.0, 1e-3);
}

TEST(Gramian, ZeroRegressor) {
  const auto tr = sampled(2, 1.0, 1e-2, [](double) { return v2(0, 0); });
  EXPECT_EQ(ie_gramian(tr, 50), Mat::Zero(2, 2));
}

TEST(Gramian, DiscreteCount) {
  const auto tr = discrete(std::vector<Vec>(10, v1(1.0)));
  EXPECT_EQ(ie_gramian(tr, 5)(0, 0), 6.0);
}

TEST(Gramian, EmptyTraceThrows) {
  RegressorTrace tr;
  EXPECT_THROW(ie_gramian(tr, 0), DimensionError);
}

TEST(Gramian, MatchesIndependentQuadrature) {
  // Closed form of int_0^5 col(1, e^-t) col(1, e^-t)^T dt.
  const auto tr = sampled(2, 5.0, 1e-3, [](double t) { return v2(1.0, std::exp(-t)); });
  const Mat g = ie_gramian(tr, tr.samples.size() - 1);
  EXPECT_NEAR(g(0, 0), 5.0, 1e-9);
  EXPECT_NEAR(g(0, 1), 1.0 - std::exp(-5.0), 1e-6);
  EXPECT_NEAR(g(1, 1), 0.5 * (1.0 - std::exp(-10.0)), 1e-6);
}

TEST(CheckIe, DecayingPairIsExcited) {
  const auto tr = sampled(2, 5.0, 1e-3, [](double t) { return v2(1.0, std::exp(-t)); });
  const auto c = check_ie(tr, 1e-3);
  EXPECT_TRUE(c.excited);
  EXPECT_GE(c.level, 1e-3);
  EXPECT_GT(c.horizon, 0.0);
  EXPECT_LE(c.horizon, 5.0);
  // Level is lambda_min of the Gramian at the reported horizon.
  const Mat g = ie_gramian(tr, c.horizon_index);
  Eigen::SelfAdjointEigenSolver<Mat> es(g);
  EXPECT_NEAR(c.level, es.eigenvalues()(0), 1e-12);
}

TEST(CheckIe, ZeroAndCollinear) {
  const auto zero = check_ie(sampled(2, 1.0, 1e-2, [](double) { return v2(0, 0); }), 1e-6);
  EXPECT_FALSE(zero.excited);
  EXPECT_EQ(zero.level, 0.0);
  const auto col = check_ie(sampled(2, 5.0, 1e-2, [](double) { return v2(1, 1); }), 1e-6);
  EXPECT_FALSE(col.excited);
}

TEST(Identifiability, Examples) {
  const auto tr = sampled(2, 5.0, 1e-2, [](double t) { return v2(1.0, std::exp(-t)); });
  const auto r = check_identifiability(tr);
  EXPECT_TRUE(r.identifiable);
  ASSERT_EQ(r.indices.size(), 2u);
  EXPECT_NE(r.indices[0], r.indices[1]);
  EXPECT_FALSE(check_identifiability(sampled(2, 5.0, 1e-2, [](double) { return v2(1, 2); })).identifiable);
  EXPECT_TRUE(check_identifiability(discrete({v1(0), v1(0), v1(-0.3)})).identifiable);
}

TEST(Lemma3, Arithmetic) {
  EXPECT_NEAR(lemma3_epsilon(1, 1, 1, 1), 1.0 - std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(lemma3_epsilon(2, 2, 2, 1), 1.0 - std::sqrt(1.0 - 4.0 / 17.0), 1e-15);
  const double tiny = lemma3_epsilon(1, 1e-12, 1, 1);
  EXPECT_GT(tiny, 0.0);
  EXPECT_LT(tiny, 1e-11);
  EXPECT_THROW(lemma3_epsilon(1, 0, 1, 1), DomainError);
  EXPECT_THROW(lemma3_epsilon(-1, 1, 1, 1), DomainError);
}

// Piecewise-constant traces built to be exciting or not by construction.
RegressorTrace random_trace(std::mt19937_64& rng, int q, bool exciting, TimeMode mode) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int pieces = 4 + static_cast<int>(rng() % 5);
  const int per = 20;
  Mat basis = Mat::NullaryExpr(q, q, [&]() { return u(rng); });
  const int rank = exciting ? q : static_cast<int>(rng() % q);
  std::vector<Vec> values;
  for (int p = 0; p < pieces; ++p) {
    Vec c = Vec::Zero(q);
    for (int j = 0; j < rank; ++j) c += (p % std::max(rank, 1) == j ? 1.0 : 0.2 * u(rng)) * basis.col(j);
    for (int k = 0; k < per; ++k) values.push_back(c);
  }
  RegressorTrace tr;
  tr.mode = mode;
  tr.grid = mode == TimeMode::Discrete ? TimeGrid::discrete(values.size() - 1) : TimeGrid::over((values.size() - 1) * 0.05, 0.05);
  tr.samples = std::move(values);
  return tr;
}

TEST(Equivalence, IeAgreesWithIdentifiability) {
  std::mt19937_64 rng(20240501);
  for (int i = 0; i < 300; ++i) {
    const int q = 1 + i % 3;
    const auto tr = random_trace(rng, q, i % 2 == 0, i % 4 < 2 ? TimeMode::Continuous : TimeMode::Discrete);
    const bool ie = check_ie(tr, 1e-6).excited;
    const bool id = check_identifiability(tr, 1e-8).identifiable;
    EXPECT_EQ(ie, id) << "instance " << i;
  }
}

TEST(GramianProperties, PsdAndMonotone) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    const auto tr = random_trace(rng, 3, i % 2 == 0, TimeMode::Continuous);
    Mat prev = Mat::Zero(3, 3);
    for (std::size_t k = 0; k < tr.samples.size(); k += 7) {
      const Mat g = ie_gramian(tr, k);
      EXPECT_GE(min_symmetric_eigenvalue(g), -1e-12);
      EXPECT_GE(min_symmetric_eigenvalue(g - prev), -1e-10);
      prev = g;
    }
  }
}

TEST(RegressorTrace, Validation) {
  RegressorTrace tr = discrete({v1(1), v2(1, 2)});
  EXPECT_THROW(tr.validate(), DimensionError);
  RegressorTrace nan = discrete({v1(1), v1(std::nan(""))});
  EXPECT_THROW(nan.validate(), DomainError);
}

}  // namespace
}  // namespace gdest
