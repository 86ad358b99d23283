#include "gdest/mrac.hpp"

#include <algorithm>
#include <cmath>

namespace gdest {

namespace {

bool monic(const Poly& p) {
  const Poly t = poly_trim(p);
  return !t.empty() && std::abs(t.front() - 1.0) < 1e-12;
}

}  // namespace

void Plant::validate() const {
  if (poly_trim(denominator).empty() || poly_degree(denominator) < 1) {
    throw ValidationError("plant.den", "degree must be at least 1");
  }
  if (!monic(denominator)) throw ValidationError("plant.den", "must be monic");
  const Poly num = poly_trim(numerator);
  if (num.empty() || num.front() == 0.0) throw ValidationError("plant.num", "must be nonzero");
  if (numerator_degree() >= order()) throw ValidationError("plant.num", "relative degree must be at least 1");
  if (numerator_degree() > 0 && !is_hurwitz(poly_scale(num, 1.0 / num.front()))) {
    throw ValidationError("plant.num", "N(P) must be Hurwitz");
  }
  if (has_unmodeled()) {
    if (poly_degree(unmodeled_num) > poly_degree(unmodeled_den)) {
      throw ValidationError("plant.unmodeled_num", "unmodeled dynamics must be proper");
    }
    if (!is_hurwitz(unmodeled_den)) throw ValidationError("plant.unmodeled_den", "must be Hurwitz");
  }
}

LtiFilter Plant::realize() const {
  LtiFilter nominal = realize_rational(numerator, denominator);
  if (!has_unmodeled()) return nominal;
  return series(nominal, realize_rational(unmodeled_num, unmodeled_den));
}

void ReferenceModel::validate(int relative_degree) const {
  if (!monic(D_m)) throw ValidationError("model.D_m", "must be monic");
  if (poly_degree(D_m) != relative_degree) {
    throw ValidationError("model.D_m", "degree must equal the plant relative degree");
  }
  if (!is_hurwitz(D_m)) throw ValidationError("model.D_m", "must be Hurwitz");
  if (!std::isfinite(k_m) || k_m == 0.0) throw ValidationError("model.k_m", "must be finite and nonzero");
}

void MracFilters::validate(int n_p) const {
  if (!monic(lambda)) throw ValidationError("filters.lambda", "must be monic");
  if (poly_degree(lambda) != n_p - 1) throw ValidationError("filters.lambda", "degree must be n_p - 1");
  if (n_p > 1 && !is_hurwitz(lambda)) throw ValidationError("filters.lambda", "must be Hurwitz");
}

double plant_step(LtiFilter& plant, double u_p, double h) { return plant.step_scalar(u_p, h); }

// ---------------------------------------------------------------------------

MracSignals::MracSignals(const Plant& plant, const ReferenceModel& model, const MracFilters& filters) {
  plant.validate();
  n_p_ = plant.order();
  model.validate(n_p_ - plant.numerator_degree());
  filters.validate(n_p_);
  k_m_ = model.k_m;

  const LtiFilter pl = plant.realize();
  if (pl.D().cwiseAbs().maxCoeff() != 0.0) throw ValidationError("plant", "must be strictly proper");

  // Blocks driven by u_p (source 0) or y_p (source 1).
  struct Block {
    LtiFilter f;
    int source;
    int role;  // 0: phi_PE, 1: phi_N, 2: u_IE
  };
  std::vector<Block> blocks;
  const int nd = n_p_ - 1;
  std::vector<Poly> derivs;
  for (int i = 0; i < nd; ++i) derivs.push_back(poly_monomial(i));
  const Poly lam_dm = poly_mul(filters.lambda, model.D_m);
  if (nd > 0) {
    blocks.push_back({realize_rational_bank(derivs, filters.lambda), 0, 0});
    blocks.push_back({realize_rational_bank(derivs, filters.lambda), 1, 0});
    blocks.push_back({realize_rational_bank(derivs, lam_dm), 0, 1});
  }
  std::vector<Poly> y_nums = derivs;
  y_nums.push_back(filters.lambda);
  blocks.push_back({realize_rational_bank(y_nums, lam_dm), 1, 1});
  blocks.push_back({realize_rational({1.0}, model.D_m), 0, 2});

  int n = pl.order();
  for (const auto& b : blocks) n += b.f.order();
  a_ = Mat::Zero(n, n);
  b_ = Vec::Zero(n);
  c_y_ = Eigen::RowVectorXd::Zero(n);
  const int n_pe = 2 * nd;
  c_pe_ = Mat::Zero(n_pe, n);
  c_n_ = Mat::Zero(2 * n_p_ - 1, n);
  c_ie_u_ = Eigen::RowVectorXd::Zero(n);

  const int np = pl.order();
  a_.topLeftCorner(np, np) = pl.A();
  b_.head(np) = pl.B().col(0);
  c_y_.head(np) = pl.C().row(0);

  int off = np;
  int pe_row = 0;
  int n_row = 0;
  for (const auto& b : blocks) {
    const int m = b.f.order();
    if (b.f.D().cwiseAbs().maxCoeff() != 0.0) throw ValidationError("filters", "regressor filters must be strictly proper");
    a_.block(off, off, m, m) = b.f.A();
    if (b.source == 0) {
      b_.segment(off, m) = b.f.B().col(0);
    } else {
      a_.block(off, 0, m, np) = b.f.B() * pl.C();
    }
    const int rows = b.f.outputs();
    if (b.role == 0) {
      c_pe_.block(pe_row, off, rows, m) = b.f.C();
      pe_row += rows;
    } else if (b.role == 1) {
      c_n_.block(n_row, off, rows, m) = b.f.C();
      n_row += rows;
    } else {
      c_ie_u_.segment(off, m) = b.f.C().row(0);
    }
    off += m;
  }
  x_ = Vec::Zero(n);
}

double MracSignals::y_p() const { return c_y_.dot(x_); }

Vec MracSignals::phi_pe(double r) const {
  Vec v(2 * n_p_);
  v.head(2 * n_p_ - 2) = c_pe_ * x_;
  v(2 * n_p_ - 2) = y_p();
  v(2 * n_p_ - 1) = r;
  return v;
}

Vec MracSignals::phi_ie() const {
  Vec v(2 * n_p_);
  v.head(2 * n_p_ - 1) = c_n_ * x_;
  v(2 * n_p_ - 1) = y_p() / k_m_;
  return v;
}

double MracSignals::u_ie() const { return c_ie_u_.dot(x_); }

void MracSignals::advance(double u_p, double h) {
  auto field = [&](double, const Vec& x) -> Vec { return a_ * x + b_ * u_p; };
  x_ = rk4_step(field, 0.0, x_, h);
}

void MracSignals::reset() { x_.setZero(); }

// ---------------------------------------------------------------------------

std::optional<Vec> ideal_theta(const Plant& plant, const ReferenceModel& model) {
  if (plant.order() != 1 || plant.numerator_degree() != 0 || poly_degree(model.D_m) != 1) return std::nullopt;
  const Poly den = poly_trim(plant.denominator);
  const Poly dm = poly_trim(model.D_m);
  const double k_p = plant.high_frequency_gain();
  Vec theta(2);
  theta << (den[1] - dm[1]) / k_p, model.k_m / k_p;
  return theta;
}

MracRun mrac_closed_loop(const Plant& plant, const ReferenceModel& model, const MracFilters& filters, GdConfig cfg,
                         const TimeGrid& grid, const MracOptions& options) {
  MracSignals sig(plant, model, filters);
  cfg.q = sig.dimension();
  cfg.validate();
  const std::size_t stride = std::max<std::size_t>(options.stride, 1);

  LtiFilter ref = realize_rational({model.k_m}, model.D_m);
  MracRun run;
  run.ideal = ideal_theta(plant, model);
  const bool check_lre = run.ideal.has_value() && !plant.has_unmodeled();
  GdState est = gd_initial_state(cfg);

  for (std::size_t k = 0; k < grid.samples(); ++k) {
    const double t = grid.time(k);
    const double r = model.r(t);
    const Vec phi_pe = sig.phi_pe(r);
    const double u = est.theta.dot(phi_pe);
    const double y = sig.y_p();
    const double y_m = ref.output_scalar(r);
    const Vec phi_ie = sig.phi_ie();
    const double u_ie = sig.u_ie();
    if (check_lre) run.lre_residual = std::max(run.lre_residual, std::abs(u_ie - run.ideal->dot(phi_ie)));

    const double peak = std::max({sig.state().lpNorm<Eigen::Infinity>(), std::abs(u),
                                  est.theta.lpNorm<Eigen::Infinity>(), est.theta_g.lpNorm<Eigen::Infinity>()});
    run.peak = std::max(run.peak, peak);
    const bool blown = !std::isfinite(peak) || peak > options.divergence_level;
    if (k % stride == 0 || k == grid.n_steps || blown) {
      run.y_p.push(t, y);
      run.y_m.push(t, y_m);
      run.e_t.push(t, y - y_m);
      run.u_p.push(t, u);
      run.theta.push(t, est.theta);
      run.delta.push(t, est.Delta);
      if (run.ideal) run.error_norm.push(t, (est.theta - *run.ideal).norm());
    }
    if (blown) {
      run.diverged = true;
      run.diverged_at = t;
      break;
    }
    if (k == grid.n_steps) break;

    try {
      if (options.adapt) est = gd_step(est, phi_ie, u_ie, t, grid.h, cfg);
      sig.advance(u, grid.h);
    } catch (const NumericOverflow&) {
      run.diverged = true;
      run.diverged_at = t;
      break;
    }
    ref.step_scalar(r, grid.h);
  }
  return run;
}

}  // namespace gdest
