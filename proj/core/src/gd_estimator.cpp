#include "gdest/gd_estimator.hpp"

#include <cmath>

namespace gdest {

void GdConfig::validate() {
  if (q < 1) throw ValidationError("estimator.q", "dimension must be at least 1");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ValidationError("estimator.gamma", "must be positive");
  gamma_g.validate("estimator.gamma_g");
  if (theta_g0.size() == 0) theta_g0 = Vec::Zero(q);
  if (theta0.size() == 0) theta0 = Vec::Zero(q);
  if (theta_g0.size() != q) throw ValidationError("estimator.theta_g0", "expected " + std::to_string(q) + " entries");
  if (theta0.size() != q) throw ValidationError("estimator.theta0", "expected " + std::to_string(q) + " entries");
}

GdState gd_initial_state(const GdConfig& cfg) {
  GdState s;
  s.theta_g = cfg.theta_g0.size() == cfg.q ? cfg.theta_g0 : Vec::Zero(cfg.q);
  s.Phi = Mat::Identity(cfg.q, cfg.q);
  s.theta = cfg.theta0.size() == cfg.q ? cfg.theta0 : Vec::Zero(cfg.q);
  refresh_derived(s, s.theta_g);
  return s;
}

void refresh_derived(GdState& state, const Vec& theta_g0) {
  const auto q = state.Phi.rows();
  state.D = Mat::Identity(q, q) - state.Phi;
  state.Delta = det(state.D);
  state.Y = adjugate(state.D) * (state.theta_g - state.Phi * theta_g0);
}

Vec first_stage_origin(const GdConfig& cfg) {
  if (cfg.theta_g0.size() == 0) return Vec::Zero(cfg.q);
  if (cfg.theta_g0.size() != cfg.q) throw DimensionError("theta_g0 does not match the regressor dimension");
  return cfg.theta_g0;
}

GdState gd_step_ct(const GdState& state, const Vec& phi, double y, double t, double h, const GdConfig& cfg) {
  const Eigen::Index q = cfg.q;
  if (phi.size() != q) throw DimensionError("gd_step_ct: regressor dimension mismatch");
  const Vec theta_g0 = first_stage_origin(cfg);
  const Mat eye = Mat::Identity(q, q);

  Vec packed(q + q * q + q);
  packed.head(q) = state.theta_g;
  packed.segment(q, q * q) = state.Phi.reshaped();
  packed.tail(q) = state.theta;

  auto field = [&](double tau, const Vec& s) -> Vec {
    const double g = cfg.gamma_g(tau);
    const auto theta_g = s.head(q);
    const auto Phi = s.segment(q, q * q).reshaped(q, q);
    const auto theta = s.tail(q);
    Vec ds(s.size());
    ds.head(q) = g * (y - phi.dot(theta_g)) * phi;
    const Eigen::RowVectorXd phiT_Phi = phi.transpose() * Phi;
    ds.segment(q, q * q) = (-g * (phi * phiT_Phi)).reshaped();
    const Mat D = eye - Phi;
    const double Delta = det(D);
    const Vec Y = adjugate(D) * (theta_g - Phi * theta_g0);
    ds.tail(q) = cfg.gamma * Delta * (Y - Delta * theta);
    return ds;
  };

  const Vec next = rk4_step(field, t, packed, h);
  GdState out;
  out.theta_g = next.head(q);
  out.Phi = next.segment(q, q * q).reshaped(q, q);
  out.theta = next.tail(q);
  refresh_derived(out, theta_g0);
  return out;
}

GdState gd_step_dt(const GdState& state, const Vec& phi, double y, std::size_t k, const GdConfig& cfg) {
  const Eigen::Index q = cfg.q;
  if (phi.size() != q) throw DimensionError("gd_step_dt: regressor dimension mismatch");
  const double gain = 1.0 / (cfg.gamma_g(static_cast<double>(k)) + phi.squaredNorm());
  const double mix = 1.0 / (cfg.gamma + state.Delta * state.Delta);

  GdState out;
  out.theta_g = state.theta_g + gain * (y - phi.dot(state.theta_g)) * phi;
  out.Phi = state.Phi - gain * phi * (phi.transpose() * state.Phi);
  out.theta = state.theta + mix * state.Delta * (state.Y - state.Delta * state.theta);
  refresh_derived(out, first_stage_origin(cfg));
  if (!out.theta_g.allFinite() || !out.Phi.allFinite() || !out.theta.allFinite()) {
    throw NumericOverflow("gd_step_dt produced a non-finite state", static_cast<double>(k));
  }
  return out;
}

GdState gd_step(const GdState& state, const Vec& phi, double y, double tau, double h, const GdConfig& cfg) {
  if (cfg.mode == TimeMode::Continuous) return gd_step_ct(state, phi, y, tau, h, cfg);
  return gd_step_dt(state, phi, y, static_cast<std::size_t>(std::llround(tau)), cfg);
}

// ---------------------------------------------------------------------------

DremOperatorState drem_initial_state(int q) { return {Vec::Zero(q), Mat::Zero(q, q)}; }

Vec h_operator_step(const Vec& x, const Vec& phi, double u, double tau, double h, const GdConfig& cfg) {
  if (x.size() != phi.size()) throw DimensionError("h_operator_step: dimension mismatch");
  if (cfg.mode == TimeMode::Discrete) {
    const double gain = 1.0 / (cfg.gamma_g(tau) + phi.squaredNorm());
    return x + gain * (u - phi.dot(x)) * phi;
  }
  auto field = [&](double s, const Vec& v) -> Vec { return cfg.gamma_g(s) * (u - phi.dot(v)) * phi; };
  return rk4_step(field, tau, x, h);
}

DremOperatorState drem_operator_step(const DremOperatorState& op, const Vec& phi, double y, double tau, double h,
                                     const GdConfig& cfg) {
  DremOperatorState out;
  out.x_y = h_operator_step(op.x_y, phi, y, tau, h, cfg);
  out.x_phi.resize(op.x_phi.rows(), op.x_phi.cols());
  for (Eigen::Index i = 0; i < op.x_phi.cols(); ++i) {
    out.x_phi.col(i) = h_operator_step(op.x_phi.col(i), phi, phi(i), tau, h, cfg);
  }
  return out;
}

// ---------------------------------------------------------------------------

GdRun run_gd(Lre& lre, GdConfig cfg, const TimeGrid& grid, std::size_t stride) {
  cfg.validate();
  if (lre.dimension() != cfg.q) throw DimensionError("run_gd: LRE and estimator dimensions differ");
  if (stride == 0) stride = 1;
  const auto truth = lre.truth();

  GdRun run;
  GdState state = gd_initial_state(cfg);
  lre.reset();
  for (std::size_t k = 0; k < grid.samples(); ++k) {
    const double t = grid.time(k);
    if (k % stride == 0 || k == grid.n_steps) {
      run.theta_g.push(t, state.theta_g);
      run.theta.push(t, state.theta);
      run.delta.push(t, state.Delta);
      if (truth) run.error_norm.push(t, (state.theta - *truth).norm());
    }
    if (k == grid.n_steps) break;
    const LreSample s = lre.sample(t);
    const double tau = cfg.mode == TimeMode::Continuous ? t : static_cast<double>(k);
    state = gd_step(state, s.phi, s.y, tau, grid.h, cfg);
    lre.advance(t, grid.h);
  }
  run.final_state = state;
  return run;
}

}  // namespace gdest
