#pragma once

// Interval excitation and identifiability diagnostics for sampled regressors.

#include <cstddef>
#include <vector>

#include "gdest/numcore.hpp"
#include "gdest/signals.hpp"

namespace gdest {

/// Sampled regressor phi(tau) of fixed dimension q.
struct RegressorTrace {
  TimeGrid grid;
  TimeMode mode = TimeMode::Continuous;
  std::vector<Vec> samples;

  int dimension() const { return samples.empty() ? 0 : static_cast<int>(samples.front().size()); }
  /// Throws DimensionError on mixed sizes, DomainError on non-finite samples.
  void validate() const;

  static RegressorTrace from(const SignalTrace& trace, TimeMode mode);
};

/// Default IE threshold for dimension q.
inline double default_ie_threshold(int q) { return 1e-6 * q; }

struct IeCertificate {
  bool excited = false;
  /// Smallest Gramian eigenvalue at the reported horizon (C_c or C_d).
  double level = 0.0;
  /// t_c in seconds (CT) or k_d in steps (DT).
  double horizon = 0.0;
  std::size_t horizon_index = 0;
  /// max |phi|^2 over [0, horizon].
  double phi_max_sq = 0.0;
};

/// CT: trapezoidal integral of phi phi^T over samples 0..horizon_index.
/// DT: sum of phi(j) phi(j)^T for j = 0..horizon_index.
Mat ie_gramian(const RegressorTrace& trace, std::size_t horizon_index);

/// First horizon where lambda_min of the Gramian reaches `threshold`.
/// When never reached, `level` is lambda_min over the whole trace.
IeCertificate check_ie(const RegressorTrace& trace, double threshold);

struct IdentifiabilityResult {
  bool identifiable = false;
  std::vector<std::size_t> indices;
};

/// Greedy earliest-first selection of samples that raise the numeric rank.
IdentifiabilityResult check_identifiability(const RegressorTrace& trace, double tol = 1e-8);

/// epsilon = 1 - sqrt(1 - g C / (1 + g^2 t_c^2 phi_M^2)) with phi_M = max |phi|^2.
/// epsilon^q lower-bounds |Delta(t)| for t >= t_c under constant gain g.
double lemma3_epsilon(double gamma_bar, double c_c, double t_c, double phi_m);

}  // namespace gdest
