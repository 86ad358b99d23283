#include "gdest/excitation.hpp"

#include <algorithm>
#include <cmath>

namespace gdest {

void RegressorTrace::validate() const {
  const auto q = dimension();
  for (const auto& s : samples) {
    if (s.size() != q) throw DimensionError("RegressorTrace: samples differ in dimension");
    if (!s.allFinite()) throw DomainError("RegressorTrace: non-finite sample");
  }
}

RegressorTrace RegressorTrace::from(const SignalTrace& trace, TimeMode mode) {
  RegressorTrace out;
  out.mode = mode;
  out.samples = trace.values;
  if (trace.size() >= 2) {
    out.grid = TimeGrid{trace.t.front(), trace.t[1] - trace.t[0], trace.size() - 1};
  } else {
    out.grid = TimeGrid{trace.empty() ? 0.0 : trace.t.front(), mode == TimeMode::Discrete ? 1.0 : 1e-3, 0};
  }
  return out;
}

Mat ie_gramian(const RegressorTrace& trace, std::size_t horizon_index) {
  if (trace.samples.empty()) throw DimensionError("ie_gramian: empty trace");
  if (horizon_index >= trace.samples.size()) throw DimensionError("ie_gramian: horizon beyond trace");
  const auto q = trace.dimension();
  Mat g = Mat::Zero(q, q);
  if (trace.mode == TimeMode::Discrete) {
    for (std::size_t j = 0; j <= horizon_index; ++j) g.noalias() += trace.samples[j] * trace.samples[j].transpose();
    return g;
  }
  const double half = 0.5 * trace.grid.h;
  for (std::size_t j = 0; j < horizon_index; ++j) {
    const auto& a = trace.samples[j];
    const auto& b = trace.samples[j + 1];
    g.noalias() += half * (a * a.transpose() + b * b.transpose());
  }
  return g;
}

IeCertificate check_ie(const RegressorTrace& trace, double threshold) {
  if (!(threshold > 0.0)) throw DomainError("check_ie: threshold must be positive");
  IeCertificate cert;
  if (trace.samples.empty()) return cert;
  trace.validate();
  const auto q = trace.dimension();
  const bool ct = trace.mode == TimeMode::Continuous;
  const double half = 0.5 * trace.grid.h;

  Mat g = Mat::Zero(q, q);
  double phi_max_sq = 0.0;
  double level = 0.0;
  for (std::size_t k = 0; k < trace.samples.size(); ++k) {
    const Vec& s = trace.samples[k];
    phi_max_sq = std::max(phi_max_sq, s.squaredNorm());
    if (ct) {
      if (k > 0) {
        const Vec& prev = trace.samples[k - 1];
        g.noalias() += half * (prev * prev.transpose() + s * s.transpose());
      }
    } else {
      g.noalias() += s * s.transpose();
    }
    level = min_symmetric_eigenvalue(g);
    if (level >= threshold) {
      cert.excited = true;
      cert.level = level;
      cert.horizon_index = k;
      cert.horizon = ct ? trace.grid.time(k) - trace.grid.t0 : static_cast<double>(k);
      cert.phi_max_sq = phi_max_sq;
      return cert;
    }
  }
  cert.level = std::max(level, 0.0);
  cert.horizon_index = trace.samples.size() - 1;
  cert.horizon = ct ? trace.grid.time(cert.horizon_index) - trace.grid.t0 : static_cast<double>(cert.horizon_index);
  cert.phi_max_sq = phi_max_sq;
  return cert;
}

IdentifiabilityResult check_identifiability(const RegressorTrace& trace, double tol) {
  if (!(tol > 0.0)) throw DomainError("check_identifiability: tolerance must be positive");
  IdentifiabilityResult result;
  if (trace.samples.empty()) return result;
  trace.validate();
  const auto q = trace.dimension();
  Mat kept(q, 0);
  int rank = 0;
  for (std::size_t k = 0; k < trace.samples.size() && rank < q; ++k) {
    Mat candidate(q, kept.cols() + 1);
    candidate << kept, trace.samples[k];
    const int r = numeric_rank(candidate, tol);
    if (r > rank) {
      kept = std::move(candidate);
      rank = r;
      result.indices.push_back(k);
    }
  }
  result.identifiable = rank == q;
  return result;
}

double lemma3_epsilon(double gamma_bar, double c_c, double t_c, double phi_m) {
  if (!(gamma_bar > 0.0) || !(c_c > 0.0) || !(t_c > 0.0) || !(phi_m > 0.0)) {
    throw DomainError("lemma3_epsilon: arguments must be positive");
  }
  const double ratio = gamma_bar * c_c / (1.0 + gamma_bar * gamma_bar * t_c * t_c * phi_m * phi_m);
  if (!(ratio > 0.0 && ratio < 1.0)) throw DomainError("lemma3_epsilon: bound is vacuous (ratio outside (0,1))");
  return 1.0 - std::sqrt(1.0 - ratio);
}

}  // namespace gdest
