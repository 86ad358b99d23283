#include "gdest/signals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gdest {

TimeGrid TimeGrid::over(double horizon, double h, double t0) {
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("TimeGrid: step must be positive");
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw DomainError("TimeGrid: horizon must be non-negative");
  const auto n = static_cast<std::size_t>(std::llround(horizon / h));
  return TimeGrid{t0, h, n};
}

TimeGrid TimeGrid::discrete(std::size_t n_steps) { return TimeGrid{0.0, 1.0, n_steps}; }

std::vector<double> SignalTrace::component(Eigen::Index i) const {
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(v(i));
  return out;
}

// ---------------------------------------------------------------------------

double SignalSpec::operator()(double t) const {
  switch (kind) {
    case Kind::Constant:
      return value;
    case Kind::Sine:
      return offset + amplitude * std::sin(omega * t + phase);
    case Kind::ExpSum: {
      double acc = 0.0;
      for (std::size_t i = 0; i < weights.size(); ++i) acc += weights[i] * std::exp(rates[i] * t);
      return acc;
    }
    case Kind::Pulse:
      return (t >= t_on && t <= t_off) ? value : 0.0;
    case Kind::Rational:
      return value / (offset + t * t);
    case Kind::DampedCos:
      return amplitude * std::exp(rate * t) * std::cos(omega * t + phase);
    case Kind::Piecewise: {
      if (levels.empty()) return 0.0;
      const auto it = std::upper_bound(breaks.begin(), breaks.end(), t);
      if (it == breaks.begin()) return 0.0;
      const auto idx = static_cast<std::size_t>(std::distance(breaks.begin(), it)) - 1;
      return levels[std::min(idx, levels.size() - 1)];
    }
  }
  return 0.0;
}

double SignalSpec::sup_norm() const {
  switch (kind) {
    case Kind::Constant:
      return std::abs(value);
    case Kind::Sine:
      return std::abs(offset) + std::abs(amplitude);
    case Kind::ExpSum: {
      double acc = 0.0;
      for (double w : weights) acc += std::abs(w);
      return acc;
    }
    case Kind::Pulse:
      return std::abs(value);
    case Kind::Rational:
      return std::abs(value) / offset;
    case Kind::DampedCos:
      return std::abs(amplitude);
    case Kind::Piecewise: {
      double m = 0.0;
      for (double l : levels) m = std::max(m, std::abs(l));
      return m;
    }
  }
  return 0.0;
}

SignalSpec SignalSpec::constant(double v) {
  SignalSpec s;
  s.kind = Kind::Constant;
  s.value = v;
  return s;
}

SignalSpec SignalSpec::sine(double offset, double amplitude, double omega, double phase) {
  SignalSpec s;
  s.kind = Kind::Sine;
  s.offset = offset;
  s.amplitude = amplitude;
  s.omega = omega;
  s.phase = phase;
  return s;
}

SignalSpec SignalSpec::exp_sum(std::vector<double> weights, std::vector<double> rates) {
  if (weights.size() != rates.size()) throw DimensionError("exp_sum: weights and rates differ in length");
  SignalSpec s;
  s.kind = Kind::ExpSum;
  s.weights = std::move(weights);
  s.rates = std::move(rates);
  return s;
}

SignalSpec SignalSpec::pulse(double level, double t_on, double t_off) {
  SignalSpec s;
  s.kind = Kind::Pulse;
  s.value = level;
  s.t_on = t_on;
  s.t_off = t_off;
  return s;
}

SignalSpec SignalSpec::rational(double numerator, double offset) {
  if (!(offset > 0.0)) throw DomainError("rational signal: offset must be positive");
  SignalSpec s;
  s.kind = Kind::Rational;
  s.value = numerator;
  s.offset = offset;
  return s;
}

SignalSpec SignalSpec::damped_cos(double amplitude, double rate, double omega, double phase) {
  SignalSpec s;
  s.kind = Kind::DampedCos;
  s.amplitude = amplitude;
  s.rate = rate;
  s.omega = omega;
  s.phase = phase;
  return s;
}

SignalSpec SignalSpec::piecewise(std::vector<double> breaks, std::vector<double> levels) {
  if (breaks.size() != levels.size()) throw DimensionError("piecewise: breaks and levels differ in length");
  if (!std::is_sorted(breaks.begin(), breaks.end())) throw DomainError("piecewise: breaks must be sorted");
  SignalSpec s;
  s.kind = Kind::Piecewise;
  s.breaks = std::move(breaks);
  s.levels = std::move(levels);
  return s;
}

std::string to_string(SignalSpec::Kind kind) {
  switch (kind) {
    case SignalSpec::Kind::Constant: return "constant";
    case SignalSpec::Kind::Sine: return "sine";
    case SignalSpec::Kind::ExpSum: return "exp_sum";
    case SignalSpec::Kind::Pulse: return "pulse";
    case SignalSpec::Kind::Rational: return "rational";
    case SignalSpec::Kind::DampedCos: return "damped_cos";
    case SignalSpec::Kind::Piecewise: return "piecewise";
  }
  return "constant";
}

SignalSpec::Kind signal_kind_from_string(const std::string& name) {
  using K = SignalSpec::Kind;
  if (name == "constant") return K::Constant;
  if (name == "sine") return K::Sine;
  if (name == "exp_sum") return K::ExpSum;
  if (name == "pulse") return K::Pulse;
  if (name == "rational") return K::Rational;
  if (name == "damped_cos") return K::DampedCos;
  if (name == "piecewise") return K::Piecewise;
  throw ValidationError("kind", "unknown signal kind '" + name + "'");
}

// ---------------------------------------------------------------------------

double GainSchedule::operator()(double tau) const {
  switch (kind) {
    case Kind::Constant: return c;
    case Kind::Decaying: return c / (b + tau * tau);
    case Kind::Growing: return c * (b + tau * tau);
  }
  return c;
}

double GainSchedule::integral(double t0, double t1) const {
  switch (kind) {
    case Kind::Constant:
      return c * (t1 - t0);
    case Kind::Decaying: {
      const double s = std::sqrt(b);
      return c / s * (std::atan(t1 / s) - std::atan(t0 / s));
    }
    case Kind::Growing:
      return c * (b * (t1 - t0) + (t1 * t1 * t1 - t0 * t0 * t0) / 3.0);
  }
  return 0.0;
}

double GainSchedule::inverse_sum(std::size_t k0, std::size_t k1) const {
  double acc = 0.0;
  for (std::size_t k = k0; k <= k1; ++k) acc += 1.0 / (*this)(static_cast<double>(k));
  return acc;
}

bool GainSchedule::robust_for(TimeMode mode) const {
  if (mode == TimeMode::Continuous) return kind == Kind::Decaying;
  return kind == Kind::Growing;
}

void GainSchedule::validate(const std::string& field) const {
  if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError(field, "gain must be positive");
  if (kind != Kind::Constant && (!(b > 0.0) || !std::isfinite(b))) {
    throw ValidationError(field, "schedule offset b must be positive");
  }
}

// ---------------------------------------------------------------------------

double Disturbance::value(double t) const {
  if (kind == Kind::None) return 0.0;
  return amplitude * std::sin(omega * t + phase);
}

void Disturbance::validate(const std::string& field) const {
  if (kind == Kind::None) return;
  if (!std::isfinite(amplitude) || !std::isfinite(omega) || !std::isfinite(phase)) {
    throw ValidationError(field, "disturbance parameters must be finite");
  }
  if (kind == Kind::Sinusoid && (!(amplitude > 0.0) || !(omega > 0.0))) {
    throw ValidationError(field, "sinusoid requires amplitude > 0 and omega > 0");
  }
}

std::string to_string(Disturbance::Kind kind) {
  switch (kind) {
    case Disturbance::Kind::None: return "none";
    case Disturbance::Kind::Measurement: return "measurement";
    case Disturbance::Kind::Regressor: return "regressor";
    case Disturbance::Kind::Drift: return "drift";
    case Disturbance::Kind::Sinusoid: return "sinusoid";
  }
  return "none";
}

Disturbance::Kind disturbance_kind_from_string(const std::string& name) {
  using K = Disturbance::Kind;
  if (name == "none") return K::None;
  if (name == "measurement") return K::Measurement;
  if (name == "regressor") return K::Regressor;
  if (name == "drift") return K::Drift;
  if (name == "sinusoid") return K::Sinusoid;
  throw ValidationError("disturbance.kind", "unknown disturbance kind '" + name + "'");
}

// ---------------------------------------------------------------------------

namespace {

// Applies a disturbance to the noiseless pair and reports the equivalent d.
LreSample perturb(Vec phi, const Vec& theta, const Disturbance& dist, double t) {
  LreSample s;
  double y = phi.dot(theta);
  const double v = dist.value(t);
  switch (dist.kind) {
    case Disturbance::Kind::None:
    case Disturbance::Kind::Sinusoid:
      break;
    case Disturbance::Kind::Measurement:
      y += v;
      break;
    case Disturbance::Kind::Regressor:
      phi.array() += v;
      break;
    case Disturbance::Kind::Drift:
      y += v * phi.sum();
      break;
  }
  s.d = y - phi.dot(theta);
  s.phi = std::move(phi);
  s.y = y;
  return s;
}

}  // namespace

SignalLre::SignalLre(std::vector<SignalSpec> regressor, Vec theta, Disturbance disturbance)
    : regressor_(std::move(regressor)), theta_(std::move(theta)), disturbance_(disturbance) {
  if (static_cast<Eigen::Index>(regressor_.size()) != theta_.size()) {
    throw DimensionError("SignalLre: regressor and theta dimensions differ");
  }
}

LreSample SignalLre::sample(double t) const {
  Vec phi(static_cast<Eigen::Index>(regressor_.size()));
  for (std::size_t i = 0; i < regressor_.size(); ++i) phi(static_cast<Eigen::Index>(i)) = regressor_[i](t);
  return perturb(std::move(phi), theta_, disturbance_, t);
}

IdentificationLre::IdentificationLre(Poly plant_num, Poly plant_den, Poly filter_den, SignalSpec input,
                                     Disturbance disturbance)
    : input_(std::move(input)), disturbance_(disturbance) {
  const Poly a = poly_trim(plant_den);
  const Poly r = poly_trim(filter_den);
  const Poly b = poly_trim(plant_num);
  order_ = static_cast<int>(a.size()) - 1;
  if (order_ < 1) throw ValidationError("system.plant_den", "plant order must be at least 1");
  if (a.front() != 1.0) throw ValidationError("system.plant_den", "denominator must be monic");
  if (static_cast<int>(r.size()) - 1 != order_ || r.front() != 1.0) {
    throw ValidationError("system.filter_den", "filter polynomial must be monic with the plant's order");
  }
  if (!is_hurwitz(r)) throw ValidationError("system.filter_den", "filter polynomial must be Hurwitz");
  if (static_cast<int>(b.size()) - 1 >= order_) {
    throw ValidationError("system.plant_num", "plant must be strictly proper");
  }

  plant_ = realize_rational(b, a);
  const Poly ar = poly_mul(a, r);
  std::vector<Poly> nums_y;
  std::vector<Poly> nums_u;
  for (int i = 0; i < order_; ++i) {
    nums_y.push_back(poly_mul(poly_monomial(i), b));
    nums_u.push_back(poly_monomial(i));
  }
  regressor_bank_y_ = realize_rational_bank(nums_y, ar);
  regressor_bank_u_ = realize_rational_bank(nums_u, r);

  theta_ = Vec(2 * order_);
  Poly b_padded(static_cast<std::size_t>(order_), 0.0);
  std::copy(b.begin(), b.end(), b_padded.end() - static_cast<std::ptrdiff_t>(b.size()));
  for (int i = 0; i < order_; ++i) {
    const auto idx = static_cast<std::size_t>(order_ - i);
    theta_(i) = r[idx] - a[idx];
    theta_(order_ + i) = b_padded[static_cast<std::size_t>(order_ - 1 - i)];
  }
}

LreSample IdentificationLre::sample(double t) const {
  const double u = input_(t);
  Vec phi(2 * order_);
  phi.head(order_) = regressor_bank_y_.output(Vec::Constant(1, u));
  phi.tail(order_) = regressor_bank_u_.output(Vec::Constant(1, u));
  LreSample s = perturb(phi, theta_, disturbance_, t);
  // The regression is exact on the grid; use the realized plant output for y.
  const double clean = plant_.output_scalar(u);
  s.y += clean - phi.dot(theta_);
  s.d = s.y - s.phi.dot(theta_);
  return s;
}

void IdentificationLre::advance(double t, double h) {
  const Vec u = Vec::Constant(1, input_(t));
  plant_.step(u, h);
  regressor_bank_y_.step(u, h);
  regressor_bank_u_.step(u, h);
}

void IdentificationLre::reset() {
  plant_.reset();
  regressor_bank_y_.reset();
  regressor_bank_u_.reset();
}

SignalTrace record_regressor(Lre& lre, const TimeGrid& grid) {
  SignalTrace trace;
  lre.reset();
  for (std::size_t k = 0; k < grid.samples(); ++k) {
    const double t = grid.time(k);
    trace.push(t, lre.sample(t).phi);
    if (k < grid.n_steps) lre.advance(t, grid.h);
  }
  lre.reset();
  return trace;
}

}  // namespace gdest
