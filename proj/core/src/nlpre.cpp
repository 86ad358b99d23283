#include "gdest/nlpre.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace gdest {

void MonotoneMap::validate() const {
  if (q < 1 || p < q) throw ValidationError("map.dimensions", "requires 1 <= q <= p");
  if (!evaluate || !jacobian) throw ValidationError("map.evaluate", "S and its Jacobian must be set");
  if (P.rows() != q || P.cols() != p) throw ValidationError("map.P", "expected a q x p matrix");
  if (!(rho > 0.0)) throw ValidationError("map.rho", "must be positive");
}

MonotoneMap MonotoneMap::identity(int q) {
  MonotoneMap m;
  m.q = q;
  m.p = q;
  m.evaluate = [](const Vec& t) { return t; };
  m.jacobian = [q](const Vec&) -> Mat { return Mat::Identity(q, q); };
  m.P = Mat::Identity(q, q);
  m.rho = 1.0;
  return m;
}

MonotoneMap MonotoneMap::frequency_product() {
  MonotoneMap m;
  m.q = 2;
  m.p = 3;
  m.evaluate = [](const Vec& t) {
    Vec s(3);
    s << t(0), t(0) * t(1), t(1);
    return s;
  };
  m.jacobian = [](const Vec& t) {
    Mat j(3, 2);
    j << 1.0, 0.0, t(1), t(0), 0.0, 1.0;
    return j;
  };
  m.P = Mat::Zero(2, 3);
  m.P(0, 0) = 1.0;
  m.P(1, 2) = 1.0;
  m.rho = 1.0;
  return m;
}

MonotonicityReport check_p_monotone(const MonotoneMap& map, const Box& box, int n_samples, std::uint64_t seed) {
  map.validate();
  if (n_samples < 1) throw DomainError("check_p_monotone: n_samples must be at least 1");
  if (box.lower.size() != map.q || box.upper.size() != map.q) {
    throw DimensionError("check_p_monotone: box dimension differs from q");
  }
  std::mt19937_64 rng(seed);
  auto draw = [&]() {
    Vec v(map.q);
    for (int i = 0; i < map.q; ++i) {
      std::uniform_real_distribution<double> u(box.lower(i), box.upper(i));
      v(i) = u(rng);
    }
    return v;
  };

  MonotonicityReport rep;
  rep.rho_hat = std::numeric_limits<double>::infinity();
  rep.jacobian_rho = std::numeric_limits<double>::infinity();
  const Mat two_rho = 2.0 * map.rho * Mat::Identity(map.q, map.q);
  for (int n = 0; n < n_samples; ++n) {
    const Vec a = draw();
    const Vec b = draw();
    const Vec diff = a - b;
    const double dn = diff.squaredNorm();
    if (dn > 0.0) {
      const double quotient = diff.dot(map.P * (map.evaluate(a) - map.evaluate(b))) / dn;
      rep.rho_hat = std::min(rep.rho_hat, quotient);
    }
    const Mat pj = map.P * map.jacobian(a);
    const Mat sym = pj + pj.transpose();
    rep.jacobian_rho = std::min(rep.jacobian_rho, 0.5 * min_symmetric_eigenvalue(sym));
    rep.symmetric_part_deviation = std::max(rep.symmetric_part_deviation, (sym - two_rho).cwiseAbs().maxCoeff());
  }
  if (!std::isfinite(rep.rho_hat)) rep.rho_hat = rep.jacobian_rho;
  const double tol = 1e-12;
  rep.passed = rep.rho_hat >= map.rho - tol && rep.jacobian_rho >= map.rho - tol;
  return rep;
}

NlpreState nlpre_initial_state(const GdConfig& cfg, const MonotoneMap& map) {
  NlpreState s;
  s.theta_g = cfg.theta_g0.size() == cfg.q ? cfg.theta_g0 : Vec::Zero(cfg.q);
  s.Phi = Mat::Identity(cfg.q, cfg.q);
  s.theta = cfg.theta0.size() == map.q ? cfg.theta0 : Vec::Zero(map.q);
  s.D = Mat::Identity(cfg.q, cfg.q) - s.Phi;
  s.Delta = det(s.D);
  s.Y = adjugate(s.D) * (s.theta_g - s.Phi * s.theta_g);
  return s;
}

NlpreState nlpre_step(const NlpreState& state, const Vec& phi, double y, const MonotoneMap& map, double t, double h,
                      const GdConfig& cfg) {
  if (cfg.mode != TimeMode::Continuous) throw DomainError("nlpre_step: only continuous time is supported");
  const Eigen::Index p = cfg.q;
  const Eigen::Index q = map.q;
  if (phi.size() != p || map.p != p) throw DimensionError("nlpre_step: regressor dimension mismatch");
  const Vec theta_g0 = first_stage_origin(cfg);
  const Mat eye = Mat::Identity(p, p);

  Vec packed(p + p * p + q);
  packed.head(p) = state.theta_g;
  packed.segment(p, p * p) = state.Phi.reshaped();
  packed.tail(q) = state.theta;

  auto field = [&](double tau, const Vec& s) -> Vec {
    const double g = cfg.gamma_g(tau);
    const auto theta_g = s.head(p);
    const auto Phi = s.segment(p, p * p).reshaped(p, p);
    const Vec theta = s.tail(q);
    Vec ds(s.size());
    ds.head(p) = g * (y - phi.dot(theta_g)) * phi;
    const Eigen::RowVectorXd phiT_Phi = phi.transpose() * Phi;
    ds.segment(p, p * p) = (-g * (phi * phiT_Phi)).reshaped();
    const Mat D = eye - Phi;
    const double Delta = det(D);
    const Vec Y = adjugate(D) * (theta_g - Phi * theta_g0);
    ds.tail(q) = cfg.gamma * Delta * (map.P * (Y - Delta * map.evaluate(theta)));
    return ds;
  };

  const Vec next = rk4_step(field, t, packed, h);
  NlpreState out;
  out.theta_g = next.head(p);
  out.Phi = next.segment(p, p * p).reshaped(p, p);
  out.theta = next.tail(q);
  out.D = eye - out.Phi;
  out.Delta = det(out.D);
  out.Y = adjugate(out.D) * (out.theta_g - out.Phi * theta_g0);
  return out;
}

NlpreRun run_nlpre(Lre& lre, const MonotoneMap& map, GdConfig cfg, const TimeGrid& grid, const Vec& truth,
                   std::size_t stride) {
  map.validate();
  cfg.q = map.p;
  if (cfg.theta0.size() == 0) cfg.theta0 = Vec::Zero(map.q);
  if (cfg.theta0.size() != map.q) {
    throw ValidationError("estimator.theta0", "expected " + std::to_string(map.q) + " entries");
  }
  const Vec theta0 = cfg.theta0;
  cfg.theta0 = Vec::Zero(cfg.q);
  cfg.validate();
  cfg.theta0 = theta0;
  if (lre.dimension() != map.p) throw DimensionError("run_nlpre: LRE dimension differs from map output dimension");
  if (truth.size() != 0 && truth.size() != map.q) throw DimensionError("run_nlpre: truth dimension differs from q");
  if (stride == 0) stride = 1;
  const bool known = truth.size() == map.q;
  const Vec s_true = known ? map.evaluate(truth) : Vec();

  NlpreRun run;
  NlpreState state = nlpre_initial_state(cfg, map);
  lre.reset();
  for (std::size_t k = 0; k < grid.samples(); ++k) {
    const double t = grid.time(k);
    if (known) run.identity_residual = std::max(run.identity_residual, (state.Y - state.Delta * s_true).norm());
    if (k % stride == 0 || k == grid.n_steps) {
      run.theta.push(t, state.theta);
      run.delta.push(t, state.Delta);
      if (known) run.error_norm.push(t, (state.theta - truth).norm());
    }
    if (k == grid.n_steps) break;
    const LreSample s = lre.sample(t);
    state = nlpre_step(state, s.phi, s.y, map, t, grid.h, cfg);
    lre.advance(t, grid.h);
  }
  run.final_state = state;
  return run;
}

bool lyapunov_decrement(const SignalTrace& error_norm, const SignalTrace& delta, double rho, double gamma,
                        double tol) {
  if (error_norm.size() != delta.size()) throw DimensionError("lyapunov_decrement: traces are not synchronized");
  for (std::size_t j = 1; j < error_norm.size(); ++j) {
    const double dt = error_norm.t[j] - error_norm.t[j - 1];
    const double d0 = delta.values[j - 1](0);
    const double d1 = delta.values[j](0);
    const double integral = 0.5 * dt * (d0 * d0 + d1 * d1);
    const double e0 = error_norm.values[j - 1](0);
    const double e1 = error_norm.values[j](0);
    const double u0 = 0.5 * e0 * e0;
    const double u1 = 0.5 * e1 * e1;
    if (u1 > std::exp(-2.0 * rho * gamma * integral) * u0 + tol) return false;
  }
  return true;
}

double frequency_from_estimate(double theta_2) {
  if (!(theta_2 > 1e-9)) throw DomainError("frequency_from_estimate: estimate must exceed 1e-9");
  return 1.0 / std::sqrt(theta_2);
}

}  // namespace gdest
