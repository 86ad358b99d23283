#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gdest/numcore.hpp"

namespace gdest {

enum class TimeMode { Continuous, Discrete };

/// Uniform sampling t_k = t0 + k h, k = 0..n_steps. In DT, h is 1 and t_k is k.
/// A grid with zero steps carries no samples at all.
struct TimeGrid {
  double t0 = 0.0;
  double h = 1e-3;
  std::size_t n_steps = 0;

  double time(std::size_t k) const { return t0 + static_cast<double>(k) * h; }
  std::size_t samples() const { return n_steps == 0 ? 0 : n_steps + 1; }
  double t_end() const { return time(n_steps); }

  /// Grid covering [t0, t0 + horizon]; throws DomainError for h <= 0 or horizon < 0.
  static TimeGrid over(double horizon, double h, double t0 = 0.0);
  static TimeGrid discrete(std::size_t n_steps);
};

/// Time-stamped vector samples.
struct SignalTrace {
  std::vector<double> t;
  std::vector<Vec> values;

  std::size_t size() const { return t.size(); }
  bool empty() const { return t.empty(); }
  void push(double time, Vec v) {
    t.push_back(time);
    values.push_back(std::move(v));
  }
  void push(double time, double v) {
    Vec s(1);
    s(0) = v;
    push(time, std::move(s));
  }
  /// Scalar view of component `i`.
  std::vector<double> component(Eigen::Index i = 0) const;
};

// ---------------------------------------------------------------------------
// Analytic scalar signals

/// Closed-form scalar signal of time. The active terms depend on `kind`:
///   constant:    value
///   sine:        offset + amplitude sin(omega t + phase)
///   exp_sum:     sum_i weights[i] exp(rates[i] t)
///   pulse:       value on [t_on, t_off], 0 elsewhere
///   rational:    value / (offset + t^2)
///   damped_cos:  amplitude exp(rate t) cos(omega t + phase)
///   piecewise:   levels[i] on [breaks[i], breaks[i+1]), last level afterwards
struct SignalSpec {
  enum class Kind { Constant, Sine, ExpSum, Pulse, Rational, DampedCos, Piecewise };
  Kind kind = Kind::Constant;
  double value = 0.0;
  double offset = 0.0;
  double amplitude = 0.0;
  double omega = 0.0;
  double phase = 0.0;
  double rate = 0.0;
  double t_on = 0.0;
  double t_off = 0.0;
  std::vector<double> weights;
  std::vector<double> rates;
  std::vector<double> breaks;
  std::vector<double> levels;

  double operator()(double t) const;
  /// Upper bound on |s(t)| for t >= 0.
  double sup_norm() const;

  static SignalSpec constant(double v);
  static SignalSpec sine(double offset, double amplitude, double omega, double phase = 0.0);
  static SignalSpec exp_sum(std::vector<double> weights, std::vector<double> rates);
  static SignalSpec pulse(double level, double t_on, double t_off);
  static SignalSpec rational(double numerator, double offset);
  static SignalSpec damped_cos(double amplitude, double rate, double omega, double phase = 0.0);
  static SignalSpec piecewise(std::vector<double> breaks, std::vector<double> levels);
};

/// Name used in scenario files ("sine", "exp_sum", ...).
std::string to_string(SignalSpec::Kind kind);
SignalSpec::Kind signal_kind_from_string(const std::string& name);

// ---------------------------------------------------------------------------
// Gain schedules

/// gamma_g(tau) as used by the first estimation stage.
///   constant:  c
///   decaying:  c / (b + t^2)   (CT; integrable)
///   growing:   c (b + k^2)     (DT; 1/gamma_g summable)
struct GainSchedule {
  enum class Kind { Constant, Decaying, Growing };
  Kind kind = Kind::Constant;
  double c = 1.0;
  double b = 1.0;

  double operator()(double tau) const;
  /// Closed-form integral over [t0, t1] (CT).
  double integral(double t0, double t1) const;
  /// Closed-form or summed sum_{k=k0}^{k1} 1/gamma_g(k) (DT).
  double inverse_sum(std::size_t k0, std::size_t k1) const;
  /// True if the schedule satisfies the boundedness condition for `mode`.
  bool robust_for(TimeMode mode) const;
  /// Throws ValidationError naming `field` if c or b is not positive.
  void validate(const std::string& field) const;

  static GainSchedule constant(double c) { return {Kind::Constant, c, 1.0}; }
  static GainSchedule decaying(double c, double b) { return {Kind::Decaying, c, b}; }
  static GainSchedule growing(double c, double b) { return {Kind::Growing, c, b}; }
};

// ---------------------------------------------------------------------------
// Disturbances

/// Bounded additive perturbation of an LRE: y = phi^T theta + d.
///   measurement: d_y = a sin(w t + psi) added to y
///   regressor:   d_phi = a sin(w t + psi) added to every measured phi entry
///   drift:       theta(t) = theta + a sin(w t + psi) (entrywise)
///   sinusoid:    xi injected on the mixed scalar LREs (rejection scenarios)
struct Disturbance {
  enum class Kind { None, Measurement, Regressor, Drift, Sinusoid };
  Kind kind = Kind::None;
  double amplitude = 0.0;
  double omega = 0.0;
  double phase = 0.0;

  double value(double t) const;
  double bound() const { return kind == Kind::None ? 0.0 : std::abs(amplitude); }
  void validate(const std::string& field) const;
};

std::string to_string(Disturbance::Kind kind);
Disturbance::Kind disturbance_kind_from_string(const std::string& name);

// ---------------------------------------------------------------------------
// Linear regression sources

/// One measured pair of an LRE plus, when the generator knows them, the
/// unperturbed output and the equivalent additive disturbance d.
struct LreSample {
  Vec phi;
  double y = 0.0;
  double d = 0.0;
};

/// Generator of (y, phi) on a time grid. sample() reads the current values;
/// advance() moves the internal state across one step with inputs held.
class Lre {
 public:
  virtual ~Lre() = default;
  virtual int dimension() const = 0;
  virtual LreSample sample(double t) const = 0;
  virtual void advance(double t, double h) = 0;
  virtual void reset() = 0;
  /// True parameter vector when known.
  virtual std::optional<Vec> truth() const = 0;
};

/// phi_i(t) given by closed-form signals, y = phi^T theta + d(t).
class SignalLre final : public Lre {
 public:
  SignalLre(std::vector<SignalSpec> regressor, Vec theta, Disturbance disturbance = {});

  int dimension() const override { return static_cast<int>(regressor_.size()); }
  LreSample sample(double t) const override;
  void advance(double, double) override {}
  void reset() override {}
  std::optional<Vec> truth() const override { return theta_; }

 private:
  std::vector<SignalSpec> regressor_;
  Vec theta_;
  Disturbance disturbance_;
};

/// Identification LRE of y_p = B(P)/A(P) u_p filtered by 1/R(P):
///   phi = col(P^i/(A R) B u_p, i < n;  P^i/R u_p, i < n),  y = y_p,
///   theta = col(r_i - a_i, b_i).
/// Each entry is realized separately from the same held input, so the
/// regression holds exactly on the grid.
class IdentificationLre final : public Lre {
 public:
  IdentificationLre(Poly plant_num, Poly plant_den, Poly filter_den, SignalSpec input,
                    Disturbance disturbance = {});

  int dimension() const override { return 2 * order_; }
  LreSample sample(double t) const override;
  void advance(double t, double h) override;
  void reset() override;
  std::optional<Vec> truth() const override { return theta_; }

 private:
  int order_ = 0;
  SignalSpec input_;
  Disturbance disturbance_;
  LtiFilter plant_;
  LtiFilter regressor_bank_y_;  // P^i B/(A R), i < n
  LtiFilter regressor_bank_u_;  // P^i / R, i < n
  Vec theta_;
};

/// Collects phi samples of an LRE over a grid.
SignalTrace record_regressor(Lre& lre, const TimeGrid& grid);

}  // namespace gdest
