#include "gdest/numcore.hpp"

#include <algorithm>
#include <string>

namespace gdest {

namespace {

void require_square(const Mat& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(what) + ": expected a square matrix, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

// Determinant by cofactor expansion; only used for the small minors of the
// adjugate, where it is exact for singular inputs.
double laplace_det(const Mat& m) {
  const auto n = m.rows();
  switch (n) {
    case 0:
      return 1.0;
    case 1:
      return m(0, 0);
    case 2:
      return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    case 3:
      return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
             m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
             m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    default:
      return m.partialPivLu().determinant();
  }
}

Mat minor_of(const Mat& m, Eigen::Index row, Eigen::Index col) {
  const auto n = m.rows();
  Mat out(n - 1, n - 1);
  for (Eigen::Index i = 0, oi = 0; i < n; ++i) {
    if (i == row) continue;
    for (Eigen::Index j = 0, oj = 0; j < n; ++j) {
      if (j == col) continue;
      out(oi, oj++) = m(i, j);
    }
    ++oi;
  }
  return out;
}

Mat cofactor_adjugate(const Mat& m) {
  const auto n = m.rows();
  Mat adj(n, n);
  if (n == 1) {
    adj(0, 0) = 1.0;
    return adj;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      adj(j, i) = sign * laplace_det(minor_of(m, i, j));
    }
  }
  return adj;
}

}  // namespace

double det(const Mat& m) {
  require_square(m, "det");
  if (m.rows() == 0) return 1.0;
  return m.partialPivLu().determinant();
}

Mat adjugate(const Mat& m) {
  require_square(m, "adjugate");
  const auto n = m.rows();
  if (n <= 4) return cofactor_adjugate(m);
  const double d = det(m);
  if (std::abs(d) < 1e-12) return cofactor_adjugate(m);
  return d * m.inverse();
}

int numeric_rank(const Mat& m, double tol) {
  if (!(tol > 0.0)) throw DomainError("numeric_rank: tolerance must be positive");
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(m);
  const Vec& s = svd.singularValues();
  const double largest = s.size() > 0 ? s(0) : 0.0;
  if (!(largest > 0.0)) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol * largest) ++rank;
  }
  return rank;
}

double min_symmetric_eigenvalue(const Mat& m) {
  require_square(m, "min_symmetric_eigenvalue");
  if (m.rows() == 0) return 0.0;
  const Mat sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// ---------------------------------------------------------------------------

Poly poly_trim(const Poly& a) {
  auto first = std::find_if(a.begin(), a.end(), [](double c) { return c != 0.0; });
  if (first == a.end()) return {0.0};
  return Poly(first, a.end());
}

Poly poly_mul(const Poly& a, const Poly& b) {
  if (a.empty() || b.empty()) return {0.0};
  Poly out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

Poly poly_add(const Poly& a, const Poly& b) {
  const std::size_t n = std::max(a.size(), b.size());
  Poly out(n, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) out[n - a.size() + i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[n - b.size() + i] += b[i];
  return out;
}

Poly poly_scale(const Poly& a, double s) {
  Poly out = a;
  for (double& c : out) c *= s;
  return out;
}

Poly poly_monomial(int n) {
  Poly out(static_cast<std::size_t>(n) + 1, 0.0);
  out.front() = 1.0;
  return out;
}

std::vector<std::complex<double>> poly_roots(const Poly& a) {
  const Poly p = poly_trim(a);
  const int n = static_cast<int>(p.size()) - 1;
  if (n < 1) return {};
  Mat companion = Mat::Zero(n, n);
  for (int j = 0; j < n; ++j) companion(0, j) = -p[static_cast<std::size_t>(j) + 1] / p[0];
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Mat> es(companion, false);
  std::vector<std::complex<double>> roots;
  roots.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) roots.push_back(es.eigenvalues()(i));
  return roots;
}

bool is_hurwitz(const Poly& a, double margin) {
  for (const auto& r : poly_roots(a)) {
    if (!(r.real() < -margin)) return false;
  }
  return true;
}

std::complex<double> poly_eval(const Poly& a, std::complex<double> s) {
  std::complex<double> acc = 0.0;
  for (double c : a) acc = acc * s + c;
  return acc;
}

// ---------------------------------------------------------------------------

LtiFilter::LtiFilter(Mat a, Mat b, Mat c, Mat d)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)) {
  const auto n = a_.rows();
  if (a_.cols() != n || b_.rows() != n || c_.cols() != n || d_.rows() != c_.rows() ||
      d_.cols() != b_.cols()) {
    throw DimensionError("LtiFilter: inconsistent A/B/C/D dimensions");
  }
  x_ = Vec::Zero(n);
}

void LtiFilter::set_state(const Vec& x) {
  if (x.size() != a_.rows()) throw DimensionError("LtiFilter::set_state: wrong state size");
  x_ = x;
}

Vec LtiFilter::output(const Vec& u) const {
  if (u.size() != b_.cols()) throw DimensionError("LtiFilter::output: wrong input size");
  return c_ * x_ + d_ * u;
}

double LtiFilter::output_scalar(double u) const {
  Vec uv(1);
  uv(0) = u;
  return output(uv)(0);
}

Vec LtiFilter::step(const Vec& u, double h) {
  if (u.size() != b_.cols()) throw DimensionError("LtiFilter::step: wrong input size");
  if (x_.size() > 0) {
    const Vec forcing = b_ * u;
    x_ = rk4_step([&](double, const Vec& x) -> Vec { return a_ * x + forcing; }, 0.0, x_, h);
  }
  return c_ * x_ + d_ * u;
}

double LtiFilter::step_scalar(double u, double h) {
  Vec uv(1);
  uv(0) = u;
  return step(uv, h)(0);
}

LtiFilter realize_rational_bank(const std::vector<Poly>& numerators, const Poly& denominator) {
  const Poly den = poly_trim(denominator);
  const int n = static_cast<int>(den.size()) - 1;
  if (n < 1) throw DomainError("realize_rational: denominator degree must be at least 1");
  if (numerators.empty()) throw DimensionError("realize_rational: no numerators");
  const double lead = den.front();

  Mat a = Mat::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) a(i, i + 1) = 1.0;
  // Last row: -a_n ... -a_1 against states x1..xn.
  for (int j = 0; j < n; ++j) a(n - 1, j) = -den[static_cast<std::size_t>(n - j)] / lead;
  Mat b = Mat::Zero(n, 1);
  b(n - 1, 0) = 1.0;

  const auto p = static_cast<Eigen::Index>(numerators.size());
  Mat c = Mat::Zero(p, n);
  Mat d = Mat::Zero(p, 1);
  for (Eigen::Index row = 0; row < p; ++row) {
    const Poly num = poly_trim(numerators[static_cast<std::size_t>(row)]);
    if (static_cast<int>(num.size()) - 1 > n) {
      throw DomainError("realize_rational: improper transfer function (deg num > deg den)");
    }
    Poly padded(static_cast<std::size_t>(n) + 1, 0.0);
    std::copy(num.begin(), num.end(), padded.end() - static_cast<std::ptrdiff_t>(num.size()));
    for (double& coeff : padded) coeff /= lead;
    const double feedthrough = padded[0];
    d(row, 0) = feedthrough;
    for (int i = 1; i <= n; ++i) {
      const double rem = padded[static_cast<std::size_t>(i)] -
                         feedthrough * den[static_cast<std::size_t>(i)] / lead;
      // Coefficient of P^(n-i) multiplies state x_(n-i+1).
      c(row, n - i) = rem;
    }
  }
  return LtiFilter(std::move(a), std::move(b), std::move(c), std::move(d));
}

LtiFilter realize_rational(const Poly& numerator, const Poly& denominator) {
  return realize_rational_bank({numerator}, denominator);
}

LtiFilter series(const LtiFilter& first, const LtiFilter& second) {
  if (first.outputs() != second.inputs()) throw DimensionError("series: output/input mismatch");
  const int n1 = first.order();
  const int n2 = second.order();
  Mat a = Mat::Zero(n1 + n2, n1 + n2);
  a.topLeftCorner(n1, n1) = first.A();
  a.bottomLeftCorner(n2, n1) = second.B() * first.C();
  a.bottomRightCorner(n2, n2) = second.A();
  Mat b(n1 + n2, first.inputs());
  b.topRows(n1) = first.B();
  b.bottomRows(n2) = second.B() * first.D();
  Mat c(second.outputs(), n1 + n2);
  c.leftCols(n1) = second.D() * first.C();
  c.rightCols(n2) = second.C();
  Mat d = second.D() * first.D();
  return LtiFilter(std::move(a), std::move(b), std::move(c), std::move(d));
}

Vec sinusoid_steady_state(const LtiFilter& filt, double amplitude, double omega, double phase) {
  if (filt.inputs() != 1) throw DimensionError("sinusoid_steady_state: SISO input required");
  const int n = filt.order();
  using CMat = Eigen::MatrixXcd;
  CMat m = std::complex<double>(0.0, omega) * CMat::Identity(n, n) - filt.A().cast<std::complex<double>>();
  const Eigen::VectorXcd rhs =
      filt.B().col(0).cast<std::complex<double>>() * (amplitude * std::polar(1.0, phase));
  const Eigen::VectorXcd x = m.partialPivLu().solve(rhs);
  return x.imag();
}

std::complex<double> frequency_response(const LtiFilter& filt, double omega, int output) {
  const int n = filt.order();
  using CMat = Eigen::MatrixXcd;
  CMat m = std::complex<double>(0.0, omega) * CMat::Identity(n, n) - filt.A().cast<std::complex<double>>();
  const Eigen::VectorXcd x = m.partialPivLu().solve(filt.B().col(0).cast<std::complex<double>>());
  return filt.C().row(output).cast<std::complex<double>>().dot(x) + filt.D()(output, 0);
}

}  // namespace gdest
