#include "gdest/robust_reject.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gdest {

namespace {

constexpr double kDivergenceLevel = 1e6;

}  // namespace

PerturbedRun run_perturbed_gd(Lre& lre, const GainSchedule& schedule, GdConfig cfg, const TimeGrid& grid,
                              std::size_t stride, double energy_tol) {
  cfg.gamma_g = schedule;
  cfg.validate();
  if (lre.dimension() != cfg.q) throw DimensionError("run_perturbed_gd: LRE and estimator dimensions differ");
  if (stride == 0) stride = 1;
  const auto truth = lre.truth();
  const bool ct = cfg.mode == TimeMode::Continuous;

  PerturbedRun out;
  out.worst_energy_margin = std::numeric_limits<double>::infinity();
  GdState state = gd_initial_state(cfg);
  Vec x_d = Vec::Zero(cfg.q);
  double d_sup = 0.0;
  double dt_sum = 0.0;
  lre.reset();
  auto record = [&](double t, double err, double v, double bound) {
    out.run.theta_g.push(t, state.theta_g);
    out.run.theta.push(t, state.theta);
    out.run.delta.push(t, state.Delta);
    if (truth) out.run.error_norm.push(t, err);
    out.energy.push(t, v);
    out.energy_bound.push(t, bound);
  };

  for (std::size_t k = 0; k < grid.samples(); ++k) {
    const double t = grid.time(k);
    const double tau = ct ? t : static_cast<double>(k);
    const double v = x_d.squaredNorm();
    const double bound = ct ? d_sup * d_sup * schedule.integral(grid.t0, t) : dt_sum;
    out.worst_energy_margin = std::min(out.worst_energy_margin, bound - v);
    if (v > bound + energy_tol) out.energy_holds = false;

    const double err = truth ? (state.theta - *truth).norm() : 0.0;
    out.sup_error = std::max(out.sup_error, err);
    if (k % stride == 0 || k == grid.n_steps) record(t, err, v, bound);
    if (k == grid.n_steps) break;

    const LreSample s = lre.sample(t);
    d_sup = std::max(d_sup, std::abs(s.d));
    try {
      const Vec next_x = h_operator_step(x_d, s.phi, s.d, tau, grid.h, cfg);
      state = gd_step(state, s.phi, s.y, tau, grid.h, cfg);
      x_d = next_x;
    } catch (const NumericOverflow&) {
      out.diverged = true;
      out.diverged_at = t;
      break;
    }
    if (!ct) dt_sum += 4.0 * s.d * s.d / schedule(tau);
    if (state.theta.lpNorm<Eigen::Infinity>() > kDivergenceLevel ||
        state.theta_g.lpNorm<Eigen::Infinity>() > kDivergenceLevel) {
      out.diverged = true;
      out.diverged_at = t + grid.h;
      const double err = truth ? (state.theta - *truth).norm() : 0.0;
      out.sup_error = std::max(out.sup_error, err);
      record(t + grid.h, err, x_d.squaredNorm(), out.energy_bound.empty() ? 0.0 : out.energy_bound.values.back()(0));
      break;
    }
    lre.advance(t, grid.h);
  }
  out.disturbance_bound = d_sup;
  out.run.final_state = state;
  if (!std::isfinite(out.worst_energy_margin)) out.worst_energy_margin = 0.0;
  return out;
}

// ---------------------------------------------------------------------------

LtiFilter rejection_filter(double lambda) {
  if (!(lambda > 0.0)) throw DomainError("rejection_filter: lambda must be positive");
  const double l2 = lambda * lambda;
  return realize_rational_bank({{l2}, {l2, 0.0, 0.0}}, {1.0, 2.0 * lambda, l2});
}

FilteredLre filtered_lre(const SignalTrace& y, const SignalTrace& delta, double lambda, double h) {
  if (y.size() != delta.size()) throw DimensionError("filtered_lre: traces differ in length");
  LtiFilter fy = rejection_filter(lambda);
  LtiFilter fd = rejection_filter(lambda);
  FilteredLre out;
  Vec u(1);
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double t = y.t[k];
    u(0) = y.values[k](0);
    const Vec oy = fy.output(u);
    fy.step(u, h);
    u(0) = delta.values[k](0);
    const Vec od = fd.output(u);
    fd.step(u, h);
    out.y_f.push(t, oy(0));
    out.y_f_dd.push(t, oy(1));
    out.delta_f.push(t, od(0));
    out.delta_f_dd.push(t, od(1));
  }
  return out;
}

// ---------------------------------------------------------------------------

GpeboExtState gpebo_extension_step(const GpeboExtState& ext, double y_f, double delta_f, double delta_f_dd,
                                   double y_f_dd, double h, double t) {
  Eigen::Matrix2d a;
  a << 0.0, delta_f, -delta_f, -1.0;
  const Eigen::RowVector2d varphi(delta_f_dd, -y_f_dd);

  Vec packed(11);
  packed(0) = ext.z;
  packed.segment(1, 2) = ext.r;
  packed.segment(3, 4) = ext.Omega.reshaped();
  packed.segment(7, 4) = ext.Phi_xi.reshaped();

  auto field = [&](double, const Vec& s) -> Vec {
    const double z = s(0);
    const Eigen::Vector2d r = s.segment(1, 2);
    const Eigen::Matrix2d om = s.segment(3, 4).reshaped(2, 2);
    const Eigen::Matrix2d px = s.segment(7, 4).reshaped(2, 2);
    Vec ds(11);
    ds(0) = -z - y_f;
    ds.segment(1, 2) = a * r + Eigen::Vector2d(-delta_f * z, 0.0);
    Eigen::Matrix2d dom = a * om;
    dom.row(1) -= varphi;
    ds.segment(3, 4) = dom.reshaped();
    ds.segment(7, 4) = (a * px).reshaped();
    return ds;
  };

  const Vec next = rk4_step(field, t, packed, h);
  GpeboExtState out;
  out.z = next(0);
  out.r = next.segment(1, 2);
  out.Omega = next.segment(3, 4).reshaped(2, 2);
  out.Phi_xi = next.segment(7, 4).reshaped(2, 2);
  return out;
}

UnperturbedLre extract_unperturbed_lre(const GpeboExtState& ext) {
  UnperturbedLre out;
  out.y = ext.z - ext.r(1);
  out.regressor << ext.Phi_xi(1, 0), ext.Omega(1, 0), ext.Omega(1, 1);
  return out;
}

// ---------------------------------------------------------------------------

DisturbanceRejector::DisturbanceRejector(double lambda)
    : lambda_(lambda), filter_y_(rejection_filter(lambda)), filter_delta_(rejection_filter(lambda)) {
  primed_state_ = Vec::Zero(filter_y_.order());
}

void DisturbanceRejector::prime_sinusoid(double amplitude, double omega, double phase) {
  primed_state_ = sinusoid_steady_state(filter_y_, amplitude, omega, phase);
  filter_y_.set_state(primed_state_);
}

DisturbanceRejector::Filtered DisturbanceRejector::filtered(double y, double delta) const {
  Vec u(1);
  u(0) = y;
  const Vec oy = filter_y_.output(u);
  u(0) = delta;
  const Vec od = filter_delta_.output(u);
  return {oy(0), od(0), oy(1), od(1)};
}

void DisturbanceRejector::advance(double y, double delta, double t, double h) {
  const Filtered f = filtered(y, delta);
  ext_ = gpebo_extension_step(ext_, f.y_f, f.delta_f, f.delta_f_dd, f.y_f_dd, h, t);
  Vec u(1);
  u(0) = y;
  filter_y_.step(u, h);
  u(0) = delta;
  filter_delta_.step(u, h);
}

void DisturbanceRejector::reset() {
  filter_y_.set_state(primed_state_);
  filter_delta_.reset();
  ext_ = GpeboExtState{};
}

// ---------------------------------------------------------------------------

RejectionLre::RejectionLre(SignalSpec delta, double theta, Disturbance xi, double lambda, bool steady_state_filters)
    : delta_(std::move(delta)), theta_(theta), xi_(xi), steady_state_(steady_state_filters), rejector_(lambda) {
  if (xi_.kind != Disturbance::Kind::None && xi_.kind != Disturbance::Kind::Sinusoid) {
    throw ValidationError("disturbance.kind", "rejection requires a sinusoidal disturbance");
  }
  if (xi_.kind == Disturbance::Kind::Sinusoid && !(xi_.omega > 0.0)) {
    throw ValidationError("disturbance.omega", "must be positive");
  }
  reset();
}

double RejectionLre::mixed_output(double t) const { return delta_(t) * theta_ + xi_.value(t); }

LreSample RejectionLre::sample(double) const {
  const UnperturbedLre l = rejector_.current();
  LreSample s;
  s.phi = l.regressor;
  s.y = l.y;
  return s;
}

void RejectionLre::advance(double t, double h) { rejector_.advance(mixed_output(t), delta_(t), t, h); }

void RejectionLre::reset() {
  rejector_ = DisturbanceRejector(rejector_.lambda());
  if (steady_state_ && xi_.kind == Disturbance::Kind::Sinusoid) {
    rejector_.prime_sinusoid(xi_.amplitude, xi_.omega, xi_.phase);
  }
}

std::optional<Vec> RejectionLre::truth() const {
  if (xi_.kind != Disturbance::Kind::Sinusoid) return std::nullopt;
  const double w2 = xi_.omega * xi_.omega;
  Vec v(3);
  v << theta_, theta_ / w2, 1.0 / w2;
  return v;
}

std::optional<Vec> RejectionLre::reduced_truth() const {
  if (xi_.kind != Disturbance::Kind::Sinusoid) return std::nullopt;
  Vec v(2);
  v << theta_, 1.0 / (xi_.omega * xi_.omega);
  return v;
}

}  // namespace gdest
