#pragma once

// Small dense linear algebra, fixed-step integration and LTI filter realization.
//
// Polynomials are coefficient lists in descending powers of the derivative
// operator: {1, 20, 100} is P^2 + 20 P + 100.

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "gdest/errors.hpp"

namespace gdest {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Poly = std::vector<double>;

/// Default relative tolerance for numeric_rank.
inline constexpr double kRankTolerance = 1e-9;

/// Determinant via LU with partial pivoting.
double det(const Mat& m);

/// Classical adjugate, so that adjugate(m) * m == det(m) * I even for singular m.
/// Cofactor expansion up to 4x4; det(m) * inverse(m) above that unless
/// |det(m)| < 1e-12, in which case it falls back to cofactors.
Mat adjugate(const Mat& m);

/// Number of singular values above tol * (largest singular value).
int numeric_rank(const Mat& m, double tol = kRankTolerance);

/// Smallest eigenvalue of the symmetric part of m.
double min_symmetric_eigenvalue(const Mat& m);

inline bool all_finite(const Vec& v) { return v.allFinite(); }

/// One classical Runge-Kutta step of x' = f(t, x).
/// Throws NumericOverflow carrying t if the update is not finite.
template <class F>
Vec rk4_step(F&& f, double t, const Vec& x, double h) {
  const double half = 0.5 * h;
  const Vec k1 = f(t, x);
  const Vec k2 = f(t + half, x + half * k1);
  const Vec k3 = f(t + half, x + half * k2);
  const Vec k4 = f(t + h, x + h * k3);
  Vec next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next.allFinite()) throw NumericOverflow("rk4_step produced a non-finite state", t);
  return next;
}

// ---------------------------------------------------------------------------
// Polynomials

Poly poly_mul(const Poly& a, const Poly& b);
Poly poly_add(const Poly& a, const Poly& b);
Poly poly_scale(const Poly& a, double s);
/// Drops leading zeros; an all-zero polynomial becomes {0}.
Poly poly_trim(const Poly& a);
inline int poly_degree(const Poly& a) { return static_cast<int>(poly_trim(a).size()) - 1; }
/// P^n as a coefficient list.
Poly poly_monomial(int n);
/// Complex roots through the companion matrix.
std::vector<std::complex<double>> poly_roots(const Poly& a);
/// All roots have real part below -margin.
bool is_hurwitz(const Poly& a, double margin = 1e-9);
std::complex<double> poly_eval(const Poly& a, std::complex<double> s);

// ---------------------------------------------------------------------------
// LTI filters

/// State-space realization x' = A x + B u, y = C x + D u with owned state.
/// Inputs are held constant across each RK4 step.
class LtiFilter {
 public:
  LtiFilter() = default;
  LtiFilter(Mat a, Mat b, Mat c, Mat d);

  const Mat& A() const { return a_; }
  const Mat& B() const { return b_; }
  const Mat& C() const { return c_; }
  const Mat& D() const { return d_; }

  int order() const { return static_cast<int>(a_.rows()); }
  int inputs() const { return static_cast<int>(b_.cols()); }
  int outputs() const { return static_cast<int>(c_.rows()); }

  const Vec& state() const { return x_; }
  void set_state(const Vec& x);
  void reset() { x_.setZero(); }

  /// Current output C x + D u.
  Vec output(const Vec& u) const;
  double output_scalar(double u) const;

  /// Advances the state over h with u held and returns C x + D u at the new state.
  Vec step(const Vec& u, double h);
  double step_scalar(double u, double h);

 private:
  Mat a_, b_, c_, d_;
  Vec x_;
};

/// Filter step as a free function, matching LtiFilter::step.
inline Vec filter_step(LtiFilter& filt, const Vec& u, double h) { return filt.step(u, h); }

/// Controllable-canonical realization of num/den. Requires deg num <= deg den
/// and deg den >= 1; the denominator is normalized to monic.
LtiFilter realize_rational(const Poly& numerator, const Poly& denominator);

/// Single-input, multi-output realization of num_i/den sharing one state.
LtiFilter realize_rational_bank(const std::vector<Poly>& numerators, const Poly& denominator);

/// Series connection: u -> first -> second -> y.
LtiFilter series(const LtiFilter& first, const LtiFilter& second);

/// State that a SISO filter would carry at t = 0 had it been driven by
/// a sin(w t + phase) since t = -infinity.
Vec sinusoid_steady_state(const LtiFilter& filt, double amplitude, double omega, double phase);

/// Complex frequency response of a SISO filter at s = j w.
std::complex<double> frequency_response(const LtiFilter& filt, double omega, int output = 0);

}  // namespace gdest
