#pragma once

// D+G estimator: DREM mixing with first-order filters followed by a
// per-parameter dynamic extension that builds an exciting scalar regressor,
// then a scalar gradient on the resulting LRE  Ybar = Phibar_2 theta.

#include <cstddef>

#include "gdest/numcore.hpp"
#include "gdest/signals.hpp"

namespace gdest {

struct DgConfig {
  int q = 1;
  double lambda = 1.0;
  double g = 1.0;
  double k = 0.4;
  double beta = 0.8;
  double kappa = 10.0;
  Vec theta0;

  /// Throws ValidationError; beta must exceed 1/2.
  void validate();
};

struct DgState {
  Vec Z;       // H[phi y]
  Mat Psi;     // H[phi phi^T]
  Vec Ymix;    // adj(Psi) Z
  double Delta = 0.0;
  // Extension, one column per parameter.
  Vec z;
  Mat zeta;    // 2 x q
  Mat Phibar;  // 2 x q
  Vec theta;
};

DgState dg_initial_state(const DgConfig& cfg);

/// Filters (phi y, phi phi^T) through g/(P + lambda) with inputs held, then
/// recomputes Ymix and Delta.
DgState dg_mixing_step(const DgState& state, const Vec& phi, double y, double h, const DgConfig& cfg);

/// RK4 step of the extension of parameter i with Ymix_i and Delta held.
void dg_extension_step(DgState& state, int i, double y_mix, double delta, double h, const DgConfig& cfg);

/// z_i - zeta_2,i
inline double dg_new_output(const DgState& s, int i) { return s.z(i) - s.zeta(1, i); }
inline double dg_new_regressor(const DgState& s, int i) { return s.Phibar(1, i); }

/// theta_i' = kappa Phibar_2 (Ybar - Phibar_2 theta_i), exact for held data.
void dg_gradient_step(DgState& state, double h, const DgConfig& cfg);

/// Gradient, extension and mixing updates from the values at t.
DgState dg_step(const DgState& state, const Vec& phi, double y, double h, const DgConfig& cfg);

struct DgRun {
  SignalTrace theta;
  SignalTrace delta;
  SignalTrace error_norm;
  /// Phibar_2 of every parameter.
  SignalTrace regressor;
  /// max_i |Ybar_i - Phibar_2,i theta_i| at each recorded sample.
  SignalTrace new_lre_residual;
  /// Largest |z|, |zeta|, |Phibar| over the run.
  double extension_peak = 0.0;
  DgState final_state;
};

DgRun run_dg(Lre& lre, DgConfig cfg, const TimeGrid& grid, std::size_t stride = 1);

}  // namespace gdest
