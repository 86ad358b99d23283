#pragma once

// Input-error model reference adaptive control with a G+D estimator.
//
// Plant D(P) y_p = k_p N(P) u_p, reference model y_m = k_m / D_m(P) r.
// Controller u_p = theta_hat^T phi_PE; the estimator runs on the input-error
// regression u_IE = theta^T phi_IE.

#include <optional>
#include <vector>

#include "gdest/gd_estimator.hpp"
#include "gdest/numcore.hpp"
#include "gdest/signals.hpp"

namespace gdest {

struct Plant {
  Poly numerator;    // k_p N(P)
  Poly denominator;  // D(P), monic
  /// Optional unmodeled dynamics in series after the nominal plant.
  Poly unmodeled_num;
  Poly unmodeled_den;

  int order() const { return poly_degree(denominator); }
  int numerator_degree() const { return poly_degree(numerator); }
  double high_frequency_gain() const { return poly_trim(numerator).front(); }
  bool has_unmodeled() const { return !unmodeled_den.empty(); }

  /// Checks monic D, Hurwitz N, relative degree >= 1 and a proper stable cascade.
  void validate() const;
  /// SISO realization of the full plant (cascade included).
  LtiFilter realize() const;
};

struct ReferenceModel {
  double k_m = 1.0;
  Poly D_m;
  SignalSpec r;

  void validate(int relative_degree) const;
};

struct MracFilters {
  /// Monic Hurwitz of degree n_p - 1; {1} when n_p = 1.
  Poly lambda{1.0};

  void validate(int n_p) const;
};

/// Plant advance with u_p held; returns y_p at the new state.
double plant_step(LtiFilter& plant, double u_p, double h);

/// Plant, phi_PE filters and input-error filters as one LTI system driven by u_p.
class MracSignals {
 public:
  MracSignals(const Plant& plant, const ReferenceModel& model, const MracFilters& filters);

  int n_p() const { return n_p_; }
  int dimension() const { return 2 * n_p_; }

  double y_p() const;
  /// col(P^i/lambda u_p, P^i/lambda y_p (i < n_p - 1), y_p, r).
  Vec phi_pe(double r) const;
  /// col(phi_N, y_p / k_m).
  Vec phi_ie() const;
  double u_ie() const;

  void advance(double u_p, double h);
  void reset();
  const Vec& state() const { return x_; }

 private:
  int n_p_ = 1;
  double k_m_ = 1.0;
  Mat a_;
  Vec b_;
  Eigen::RowVectorXd c_y_;
  Mat c_pe_;  // the first 2(n_p - 1) entries of phi_PE
  Mat c_n_;   // phi_N
  Eigen::RowVectorXd c_ie_u_;
  Vec x_;
};

/// First-order model matching: theta = col((a_p - a_m)/k_p, k_m/k_p) for
/// k_p/(P + a_p) against k_m/(P + a_m). Empty for n_p > 1.
std::optional<Vec> ideal_theta(const Plant& plant, const ReferenceModel& model);

struct MracOptions {
  /// When false the estimate stays at theta0.
  bool adapt = true;
  double divergence_level = 1e6;
  std::size_t stride = 1;
};

struct MracRun {
  SignalTrace y_p;
  SignalTrace y_m;
  SignalTrace e_t;
  SignalTrace u_p;
  SignalTrace theta;
  SignalTrace delta;
  SignalTrace error_norm;
  /// Largest magnitude over every plant, filter and estimator state.
  double peak = 0.0;
  bool diverged = false;
  double diverged_at = 0.0;
  std::optional<Vec> ideal;
  /// Max |u_IE - theta^T phi_IE| over the run, when theta is known and the
  /// plant has no unmodeled dynamics.
  double lre_residual = 0.0;
};

MracRun mrac_closed_loop(const Plant& plant, const ReferenceModel& model, const MracFilters& filters, GdConfig cfg,
                         const TimeGrid& grid, const MracOptions& options = {});

}  // namespace gdest
