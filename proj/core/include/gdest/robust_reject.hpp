#pragma once

// Robustness of the G+D estimator to bounded additive disturbances, and
// rejection of a sinusoid with unknown frequency on a mixed scalar LRE
//   Y(t) = Delta(t) theta + a sin(w t + psi).

#include <cstddef>
#include <optional>

#include "gdest/gd_estimator.hpp"
#include "gdest/numcore.hpp"
#include "gdest/signals.hpp"

namespace gdest {

struct PerturbedRun {
  GdRun run;
  double sup_error = 0.0;
  /// sup |d| seen over the run.
  double disturbance_bound = 0.0;
  /// V = |H[d]|^2 on the first-stage operator state, and its bound
  /// |d|_inf^2 * int gamma_g (CT) or sum 4 |d|^2 / gamma_g (DT).
  SignalTrace energy;
  SignalTrace energy_bound;
  /// min over the run of bound - V (negative means violated beyond tolerance).
  double worst_energy_margin = 0.0;
  bool energy_holds = true;
  bool diverged = false;
  double diverged_at = 0.0;
};

/// Runs G+D with first-stage gain `schedule` on a perturbed LRE. Divergence is
/// reported, not thrown. `energy_tol` is the slack allowed on the V-inequality.
PerturbedRun run_perturbed_gd(Lre& lre, const GainSchedule& schedule, GdConfig cfg, const TimeGrid& grid,
                              std::size_t stride = 1, double energy_tol = 1e-6);

// ---------------------------------------------------------------------------
// Filtering with F(P) = lambda^2 / (P + lambda)^2

/// Two-output realization sharing one state: row 0 is F, row 1 is P^2 F
/// (feedthrough lambda^2 after long division).
LtiFilter rejection_filter(double lambda);

struct FilteredLre {
  SignalTrace y_f;
  SignalTrace delta_f;
  SignalTrace y_f_dd;
  SignalTrace delta_f_dd;
};

/// Filters scalar traces Y and Delta sampled with step h (zero-order hold).
FilteredLre filtered_lre(const SignalTrace& y, const SignalTrace& delta, double lambda, double h);

// ---------------------------------------------------------------------------
// Dynamic extension producing a disturbance-free regression

struct GpeboExtState {
  double z = 0.0;
  Eigen::Vector2d r = Eigen::Vector2d::Zero();
  Eigen::Matrix2d Omega = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d Phi_xi = Eigen::Matrix2d::Identity();
};

/// One RK4 step of
///   z' = -z - Y_F,  r' = A r + b,  Omega' = A Omega - e2 varphi^T,  Phi_xi' = A Phi_xi
/// with A = [[0, Delta_F], [-Delta_F, -1]], b = col(-Delta_F z, 0),
/// varphi = col(Delta_F'', -Y_F''), all inputs held over the step.
GpeboExtState gpebo_extension_step(const GpeboExtState& ext, double y_f, double delta_f, double delta_f_dd,
                                   double y_f_dd, double h, double t = 0.0);

struct UnperturbedLre {
  /// z - r_2
  double y = 0.0;
  /// [(Phi_xi)_21, Omega_21, Omega_22]
  Eigen::Vector3d regressor = Eigen::Vector3d::Zero();
};

/// z - r2 = regressor^T col(theta, theta / w^2, 1 / w^2).
UnperturbedLre extract_unperturbed_lre(const GpeboExtState& ext);

/// Filter pair plus extension driven by samples of (Y, Delta).
class DisturbanceRejector {
 public:
  explicit DisturbanceRejector(double lambda = 1.0);

  /// Starts the Y filter at the steady state of a sin(w t + psi), which
  /// drops the filter's exponentially decaying initial transient.
  void prime_sinusoid(double amplitude, double omega, double phase);

  const GpeboExtState& extension() const { return ext_; }
  UnperturbedLre current() const { return extract_unperturbed_lre(ext_); }

  struct Filtered {
    double y_f, delta_f, y_f_dd, delta_f_dd;
  };
  Filtered filtered(double y, double delta) const;

  void advance(double y, double delta, double t, double h);
  void reset();
  double lambda() const { return lambda_; }

 private:
  double lambda_;
  LtiFilter filter_y_;
  LtiFilter filter_delta_;
  Vec primed_state_;
  GpeboExtState ext_;
};

/// Scalar LRE Y = Delta(t) theta + xi(t) turned into the 3-parameter
/// unperturbed LRE z - r2 = regressor^T col(theta, theta/w^2, 1/w^2).
class RejectionLre final : public Lre {
 public:
  RejectionLre(SignalSpec delta, double theta, Disturbance xi, double lambda, bool steady_state_filters);

  int dimension() const override { return 3; }
  LreSample sample(double t) const override;
  void advance(double t, double h) override;
  void reset() override;
  std::optional<Vec> truth() const override;

  double mixed_output(double t) const;
  double theta() const { return theta_; }
  const Disturbance& disturbance() const { return xi_; }
  /// col(theta, 1/w^2): the unknowns of the frequency-product map.
  std::optional<Vec> reduced_truth() const;
  const DisturbanceRejector& rejector() const { return rejector_; }

 private:
  SignalSpec delta_;
  double theta_;
  Disturbance xi_;
  bool steady_state_;
  DisturbanceRejector rejector_;
};

}  // namespace gdest
