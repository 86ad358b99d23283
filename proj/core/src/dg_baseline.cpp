#include "gdest/dg_baseline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gdest {

void DgConfig::validate() {
  if (q < 1) throw ValidationError("estimator.q", "dimension must be at least 1");
  if (!(lambda > 0.0)) throw ValidationError("estimator.lambda", "must be positive");
  if (!(g > 0.0)) throw ValidationError("estimator.g", "must be positive");
  if (!(k > 0.0)) throw ValidationError("estimator.k", "must be positive");
  if (!(beta > 0.5)) throw ValidationError("estimator.beta", "must exceed 1/2");
  if (!(kappa > 0.0)) throw ValidationError("estimator.kappa", "must be positive");
  if (theta0.size() == 0) theta0 = Vec::Zero(q);
  if (theta0.size() != q) throw ValidationError("estimator.theta0", "expected " + std::to_string(q) + " entries");
}

DgState dg_initial_state(const DgConfig& cfg) {
  DgState s;
  const int q = cfg.q;
  s.Z = Vec::Zero(q);
  s.Psi = Mat::Zero(q, q);
  s.Ymix = Vec::Zero(q);
  s.Delta = 0.0;
  s.z = Vec::Zero(q);
  s.zeta = Mat::Zero(2, q);
  s.Phibar = Mat::Zero(2, q);
  s.Phibar.row(0).setOnes();
  s.theta = cfg.theta0.size() == q ? cfg.theta0 : Vec::Zero(q);
  return s;
}

DgState dg_mixing_step(const DgState& state, const Vec& phi, double y, double h, const DgConfig& cfg) {
  const Eigen::Index q = cfg.q;
  if (phi.size() != q) throw DimensionError("dg_mixing_step: regressor dimension mismatch");
  // x' = -lambda x + g u with u held: exact first-order solution.
  const double decay = std::exp(-cfg.lambda * h);
  const double gain = cfg.g / cfg.lambda * (1.0 - decay);
  DgState out = state;
  out.Z = decay * state.Z + gain * (phi * y);
  out.Psi = decay * state.Psi + gain * (phi * phi.transpose());
  if (!out.Z.allFinite() || !out.Psi.allFinite()) throw NumericOverflow("dg_mixing_step: non-finite filter state", 0.0);
  out.Delta = det(out.Psi);
  out.Ymix = adjugate(out.Psi) * out.Z;
  return out;
}

void dg_extension_step(DgState& state, int i, double y_mix, double delta, double h, const DgConfig& cfg) {
  const double k = cfg.k;
  const double beta = cfg.beta;
  Vec s(5);
  s << state.z(i), state.zeta(0, i), state.zeta(1, i), state.Phibar(0, i), state.Phibar(1, i);
  auto field = [&](double, const Vec& v) -> Vec {
    const double z = v(0);
    const double p1 = v(3);
    const double p2 = v(4);
    const double v_tilde = 0.5 * (p1 * p1 + p2 * p2) - beta;
    const double w = k * delta * p1;
    Vec d(5);
    d(0) = -k * z + k * p1 * y_mix;
    d(1) = -w * v(2) - w * z;
    d(2) = w * v(1) - v_tilde * v(2) + (v_tilde - k) * z;
    d(3) = -w * p2;
    d(4) = w * p1 - v_tilde * p2;
    return d;
  };
  const Vec n = rk4_step(field, 0.0, s, h);
  state.z(i) = n(0);
  state.zeta(0, i) = n(1);
  state.zeta(1, i) = n(2);
  state.Phibar(0, i) = n(3);
  state.Phibar(1, i) = n(4);
}

void dg_gradient_step(DgState& state, double h, const DgConfig& cfg) {
  for (Eigen::Index i = 0; i < state.theta.size(); ++i) {
    const double c = state.Phibar(1, i);
    const double yb = state.z(i) - state.zeta(1, i);
    const double c2 = c * c;
    if (c2 == 0.0) continue;
    // theta' = kappa c (yb - c theta) with c, yb held.
    const double target = yb / c;
    state.theta(i) = target + (state.theta(i) - target) * std::exp(-cfg.kappa * c2 * h);
  }
}

DgState dg_step(const DgState& state, const Vec& phi, double y, double h, const DgConfig& cfg) {
  DgState next = state;
  dg_gradient_step(next, h, cfg);
  for (int i = 0; i < cfg.q; ++i) dg_extension_step(next, i, state.Ymix(i), state.Delta, h, cfg);
  DgState mixed = dg_mixing_step(state, phi, y, h, cfg);
  mixed.z = next.z;
  mixed.zeta = next.zeta;
  mixed.Phibar = next.Phibar;
  mixed.theta = next.theta;
  return mixed;
}

DgRun run_dg(Lre& lre, DgConfig cfg, const TimeGrid& grid, std::size_t stride) {
  cfg.validate();
  if (lre.dimension() != cfg.q) throw DimensionError("run_dg: LRE and estimator dimensions differ");
  if (stride == 0) stride = 1;
  const auto truth = lre.truth();
  DgRun run;
  DgState state = dg_initial_state(cfg);
  lre.reset();
  for (std::size_t k = 0; k < grid.samples(); ++k) {
    const double t = grid.time(k);
    run.extension_peak = std::max({run.extension_peak, state.z.lpNorm<Eigen::Infinity>(),
                                   state.zeta.lpNorm<Eigen::Infinity>(), state.Phibar.lpNorm<Eigen::Infinity>()});
    if (k % stride == 0 || k == grid.n_steps) {
      run.theta.push(t, state.theta);
      run.delta.push(t, state.Delta);
      run.regressor.push(t, Vec(state.Phibar.row(1).transpose()));
      if (truth) {
        run.error_norm.push(t, (state.theta - *truth).norm());
        double res = 0.0;
        for (int i = 0; i < cfg.q; ++i) {
          res = std::max(res, std::abs(dg_new_output(state, i) - dg_new_regressor(state, i) * (*truth)(i)));
        }
        run.new_lre_residual.push(t, res);
      }
    }
    if (k == grid.n_steps) break;
    const LreSample s = lre.sample(t);
    state = dg_step(state, s.phi, s.y, grid.h, cfg);
    lre.advance(t, grid.h);
  }
  run.final_state = state;
  return run;
}

}  // namespace gdest
