#pragma once

// Interlaced GPEBO + DREM ("G+D") estimator for y = phi^T theta.
//
// First stage: gradient estimate theta_g with fundamental matrix Phi, so that
// theta_g - theta = Phi (theta_g0 - theta), i.e. D theta = theta_g - Phi theta_g0
// with D = I - Phi. Mixing with adj(D) yields q scalar regressions
// Y_i = Delta theta_i, Delta = det(D), which drive the second-stage estimate.

#include <cstddef>
#include <optional>
#include <string>

#include "gdest/numcore.hpp"
#include "gdest/signals.hpp"

namespace gdest {

struct GdConfig {
  int q = 1;
  /// Second-stage gain.
  double gamma = 1.0;
  /// First-stage gain gamma_g(t) (CT) or gamma_g(k) (DT).
  GainSchedule gamma_g = GainSchedule::constant(1.0);
  Vec theta_g0;
  Vec theta0;
  TimeMode mode = TimeMode::Continuous;

  /// Fills zero initial estimates when unset; throws ValidationError otherwise.
  void validate();
};

struct GdState {
  Vec theta_g;
  Mat Phi;
  Vec theta;
  // Algebraic functions of (theta_g, Phi), kept in sync by every step.
  Mat D;
  double Delta = 0.0;
  Vec Y;
};

GdState gd_initial_state(const GdConfig& cfg);

/// cfg.theta_g0, or zeros when unset. Throws DimensionError on a size mismatch.
Vec first_stage_origin(const GdConfig& cfg);

/// Recomputes D, Delta and Y from theta_g and Phi.
void refresh_derived(GdState& state, const Vec& theta_g0);

/// One RK4 step of the coupled CT system with (phi, y) held over [t, t+h].
/// Delta and Y are re-evaluated at every stage.
GdState gd_step_ct(const GdState& state, const Vec& phi, double y, double t, double h, const GdConfig& cfg);

/// One DT update from sample k. The second stage uses Delta(k), Y(k).
GdState gd_step_dt(const GdState& state, const Vec& phi, double y, std::size_t k, const GdConfig& cfg);

/// Dispatches on cfg.mode; `tau` is t (CT) or k (DT).
GdState gd_step(const GdState& state, const Vec& phi, double y, double tau, double h, const GdConfig& cfg);

// ---------------------------------------------------------------------------
// The first stage seen as a linear operator H: u -> x_u applied to the LRE.

struct DremOperatorState {
  Vec x_y;
  Mat x_phi;  // column i is H[phi_i]
};

DremOperatorState drem_initial_state(int q);

/// Advances x_u of H[u] with the same A, g and stepping scheme as gd_step.
Vec h_operator_step(const Vec& x, const Vec& phi, double u, double tau, double h, const GdConfig& cfg);

DremOperatorState drem_operator_step(const DremOperatorState& op, const Vec& phi, double y, double tau, double h,
                                     const GdConfig& cfg);

// ---------------------------------------------------------------------------

struct GdRun {
  SignalTrace theta_g;
  SignalTrace theta;
  SignalTrace delta;
  /// |theta_hat - theta| when the generator knows theta.
  SignalTrace error_norm;
  GdState final_state;
};

/// Steps the estimator across the grid, recording every `stride`-th sample.
/// Numeric failures propagate as NumericOverflow.
GdRun run_gd(Lre& lre, GdConfig cfg, const TimeGrid& grid, std::size_t stride = 1);

}  // namespace gdest
