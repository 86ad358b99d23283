#pragma once

// G+D estimation for separable nonlinear regressions y = phi^T S(theta),
// theta in R^q, S: R^q -> R^p, with S strongly P-monotone:
//   (a - b)^T P [S(a) - S(b)] >= rho |a - b|^2.

#include <cstdint>
#include <functional>
#include <string>

#include "gdest/gd_estimator.hpp"
#include "gdest/numcore.hpp"
#include "gdest/signals.hpp"

namespace gdest {

struct MonotoneMap {
  int q = 1;
  int p = 1;
  std::function<Vec(const Vec&)> evaluate;
  std::function<Mat(const Vec&)> jacobian;  // p x q
  Mat P;                                    // q x p
  double rho = 1.0;

  /// Throws ValidationError if dimensions disagree or rho <= 0.
  void validate() const;

  static MonotoneMap identity(int q);
  /// S(t1, t2) = col(t1, t1 t2, t2), P = [[1,0,0],[0,0,1]], rho = 1.
  static MonotoneMap frequency_product();
};

struct Box {
  Vec lower;
  Vec upper;
};

struct MonotonicityReport {
  bool passed = false;
  /// min over sampled pairs of (a-b)^T P (S(a)-S(b)) / |a-b|^2.
  double rho_hat = 0.0;
  /// min over sampled points of lambda_min(P J + (P J)^T) / 2.
  double jacobian_rho = 0.0;
  /// max over sampled points of |P J + (P J)^T - 2 rho I|_max.
  double symmetric_part_deviation = 0.0;
};

/// Samples random pairs in `box` (seeded) and the symmetrized Jacobian at each
/// sample. Passes when both measured constants reach map.rho (within 1e-12).
MonotonicityReport check_p_monotone(const MonotoneMap& map, const Box& box, int n_samples = 10000,
                                    std::uint64_t seed = 0x5eed);

struct NlpreState {
  Vec theta_g;  // p
  Mat Phi;      // p x p
  Vec theta;    // q
  Mat D;
  double Delta = 0.0;
  Vec Y;
};

/// cfg.q is the regression dimension p; theta0 has the map's q entries.
NlpreState nlpre_initial_state(const GdConfig& cfg, const MonotoneMap& map);

/// RK4 step of theta_g' = g phi (y - phi^T theta_g), Phi' = -g phi phi^T Phi,
/// theta' = gamma P Delta (Y - Delta S(theta)). CT only.
NlpreState nlpre_step(const NlpreState& state, const Vec& phi, double y, const MonotoneMap& map, double t, double h,
                      const GdConfig& cfg);

struct NlpreRun {
  SignalTrace theta;
  SignalTrace delta;
  SignalTrace error_norm;
  /// Max |Y - Delta S(theta_true)| over the run, when the truth is known.
  double identity_residual = 0.0;
  NlpreState final_state;
};

/// Runs the estimator on an LRE of dimension p. `truth` is the q-vector
/// theta; when empty, no error trace is recorded.
NlpreRun run_nlpre(Lre& lre, const MonotoneMap& map, GdConfig cfg, const TimeGrid& grid, const Vec& truth = Vec(),
                   std::size_t stride = 1);

/// Checks U(t_j) <= exp(-2 rho gamma int_{t_i}^{t_j} Delta^2) U(t_i) on
/// consecutive samples, U = |theta_err|^2 / 2, with additive slack `tol`.
bool lyapunov_decrement(const SignalTrace& error_norm, const SignalTrace& delta, double rho, double gamma,
                        double tol = 1e-6);

/// omega = 1/sqrt(theta_2), guarded by theta_2 > 1e-9.
double frequency_from_estimate(double theta_2);

}  // namespace gdest
