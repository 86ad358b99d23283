// Acceptance checks. One PASS/FAIL line per criterion.
//
//   gdest_acceptance [--scenarios DIR] [--expect-fail 8,10]
//
// Exit status is 0 when the failing criteria are exactly the expected ones.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "gdest/excitation.hpp"
#include "gdest/gd_estimator.hpp"
#include "gdest/harness.hpp"
#include "gdest/mrac.hpp"
#include "gdest/nlpre.hpp"
#include "gdest/scenario.hpp"

namespace fs = std::filesystem;
using namespace gdest;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// 1

RegressorTrace smooth_trace(std::mt19937_64& rng, int q, bool exciting, TimeMode mode) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> freq(0.3, 2.5);
  const std::size_t n = 200;
  // Exciting: q distinct frequencies through a random mixing matrix.
  // Otherwise: fewer sources than entries, or a window that ends before the
  // second source switches on.
  const int sources = exciting ? q : std::max(1, static_cast<int>(rng() % q));
  const bool late = !exciting && q > 1 && rng() % 2 == 0;
  Mat mix = Mat::NullaryExpr(q, late ? q : sources, [&]() { return u(rng); });
  std::vector<double> w(mix.cols());
  for (auto& x : w) x = freq(rng);
  for (std::size_t j = 1; j < w.size(); ++j) w[j] = w[j - 1] + 0.2 + freq(rng);

  RegressorTrace tr;
  tr.mode = mode;
  const double h = mode == TimeMode::Discrete ? 1.0 : 0.05;
  tr.grid = mode == TimeMode::Discrete ? TimeGrid::discrete(n - 1) : TimeGrid::over((n - 1) * h, h);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * h;
    Vec s(mix.cols());
    for (Eigen::Index j = 0; j < s.size(); ++j) {
      s(j) = j == 0 ? 1.0 + 0.5 * std::sin(w[0] * t) : std::sin(w[j] * t + 0.3 * j);
      if (late && j > 0) s(j) = 0.0;
    }
    tr.samples.push_back(mix * s);
  }
  return tr;
}

Outcome c1_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1);
  int agree = 0, excited = 0;
  const int n = 200;
  for (int i = 0; i < n; ++i) {
    const int q = 1 + i % 3;
    const bool want = (i / 3) % 2 == 0;
    const auto tr = smooth_trace(rng, q, want, i % 4 < 2 ? TimeMode::Continuous : TimeMode::Discrete);
    const bool ie = check_ie(tr, default_ie_threshold(q)).excited;
    const bool id = check_identifiability(tr, 1e-8).identifiable;
    agree += ie == id;
    excited += ie;
  }
  const double secs = seconds_since(t0);
  return {agree == n && secs < 10.0, std::to_string(agree) + "/" + std::to_string(n) + " agree (" +
                                         std::to_string(excited) + " excited), " + fmt("%.2f s", secs)};
}

// ---------------------------------------------------------------------------
// 2

Outcome c2_dt_oracle(const fs::path& dir) {
  const Scenario s = load_scenario(dir / "dt_scalar.toml");
  SignalLre lre({s.signals.at(s.regressor.at(0))}, s.theta);
  GdConfig cfg = s.gd;
  cfg.validate();
  GdState st = gd_initial_state(cfg);
  const double theta = s.theta(0);
  double err_oracle = cfg.theta0(0) - theta;
  double worst = 0.0;
  for (std::size_t k = 0; k < 50; ++k) {
    const auto smp = lre.sample(static_cast<double>(k));
    // theta~(k+1) = theta~(k) gamma / (gamma + Delta(k)^2), Delta(k) = 1 - 0.5^k.
    const double delta_k = 1.0 - std::pow(0.5, static_cast<double>(k));
    err_oracle *= cfg.gamma / (cfg.gamma + delta_k * delta_k);
    st = gd_step_dt(st, smp.phi, smp.y, k, cfg);
    const double p = std::pow(0.5, static_cast<double>(k + 1));
    worst = std::max({worst, std::abs(st.Phi(0, 0) - p), std::abs(st.Delta - (1.0 - p)),
                      std::abs(st.theta(0) - theta - err_oracle)});
  }
  return {worst <= 1e-12, "max deviation " + fmt("%.3g", worst) + " over 50 steps"};
}

// ---------------------------------------------------------------------------
// 3, 4

struct IdentityResiduals {
  double extended = 0.0;
  double mixing = 0.0;
  double op_y = 0.0;
  double op_d = 0.0;
};

IdentityResiduals lti_identities(const Scenario& s) {
  IdentificationLre lre(s.plant_num, s.plant_den, s.filter_den, s.signals.at(s.input));
  const Vec theta = *lre.truth();
  GdConfig cfg = s.gd;
  cfg.validate();
  GdState st = gd_initial_state(cfg);
  DremOperatorState op = drem_initial_state(cfg.q);
  const TimeGrid grid = s.grid();
  IdentityResiduals r;
  for (std::size_t k = 0; k < grid.n_steps; ++k) {
    const double t = grid.time(k);
    const auto smp = lre.sample(t);
    st = gd_step_ct(st, smp.phi, smp.y, t, grid.h, cfg);
    op = drem_operator_step(op, smp.phi, smp.y, t, grid.h, cfg);
    lre.advance(t, grid.h);
    const Vec rhs = st.theta_g - st.Phi * cfg.theta_g0;
    r.extended = std::max(r.extended, (st.D * theta - rhs).cwiseAbs().maxCoeff());
    r.mixing = std::max(r.mixing, (st.Y - st.Delta * theta).cwiseAbs().maxCoeff());
    r.op_y = std::max(r.op_y, (op.x_y - rhs).cwiseAbs().maxCoeff());
    r.op_d = std::max(r.op_d, (op.x_phi - st.D).cwiseAbs().maxCoeff());
  }
  return r;
}

// ---------------------------------------------------------------------------
// 5

Outcome c5_delta_bounds(const Scenario& s) {
  IdentificationLre lre(s.plant_num, s.plant_den, s.filter_den, s.signals.at(s.input));
  const TimeGrid grid = TimeGrid::over(20.0, s.h);
  const RegressorTrace trace = RegressorTrace::from(record_regressor(lre, grid), TimeMode::Continuous);
  const int q = trace.dimension();
  const IeCertificate cert = check_ie(trace, default_ie_threshold(q));
  lre.reset();

  GdConfig cfg = s.gd;
  cfg.validate();
  const double gbar = cfg.gamma_g(0.0);
  GdState st = gd_initial_state(cfg);
  double min_delta = INFINITY;
  for (std::size_t k = 0; k < grid.n_steps; ++k) {
    const double t = grid.time(k);
    const auto smp = lre.sample(t);
    st = gd_step_ct(st, smp.phi, smp.y, t, grid.h, cfg);
    lre.advance(t, grid.h);
    if (grid.time(k + 1) >= cert.horizon) min_delta = std::min(min_delta, std::abs(st.Delta));
  }
  const double bound = std::pow(lemma3_epsilon(gbar, cert.level, cert.horizon, cert.phi_max_sq), q);
  const bool ct_ok = cert.excited && min_delta >= bound;

  // DT: Phi(k) contracts by alpha_0 < 1 once the window [0, k_d] is in, and
  // |Delta(k)| >= (1 - alpha_0)^q from then on.
  const std::size_t n = 200;
  RegressorTrace dt;
  dt.mode = TimeMode::Discrete;
  dt.grid = TimeGrid::discrete(n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    const double kk = static_cast<double>(k);
    Vec phi(3);
    phi << 1.0, std::sin(0.7 * kk), std::cos(1.3 * kk);
    dt.samples.push_back(phi);
  }
  const IeCertificate dcert = check_ie(dt, default_ie_threshold(3));
  GdConfig dcfg;
  dcfg.q = 3;
  dcfg.mode = TimeMode::Discrete;
  dcfg.gamma = 1.0;
  dcfg.gamma_g = GainSchedule::constant(2.0);
  dcfg.validate();
  GdState ds = gd_initial_state(dcfg);
  std::vector<double> norms, deltas;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    ds = gd_step_dt(ds, dt.samples[k], 0.0, k, dcfg);
    if (k >= dcert.horizon_index) {
      norms.push_back(ds.Phi.operatorNorm());
      deltas.push_back(ds.Delta);
    }
  }
  const double alpha0 = norms.empty() ? 1.0 : *std::max_element(norms.begin(), norms.end());
  const double dmin = deltas.empty() ? 0.0 : *std::min_element(deltas.begin(), deltas.end());
  const bool monotone = std::is_sorted(norms.rbegin(), norms.rend());
  const bool dt_ok = dcert.excited && alpha0 < 1.0 && monotone && dmin >= std::pow(1.0 - alpha0, 3);

  std::ostringstream d;
  d << "CT min|Delta| " << fmt("%.3g", min_delta) << " >= eps^q " << fmt("%.3g", bound) << " (t_c "
    << fmt("%.3g", cert.horizon) << "); DT alpha0 " << fmt("%.3g", alpha0) << ", min Delta " << fmt("%.3g", dmin)
    << " >= " << fmt("%.3g", std::pow(1.0 - alpha0, 3));
  return {ct_ok && dt_ok, d.str()};
}

// ---------------------------------------------------------------------------
// 6 - 10 read the first pass of the bundled scenarios.

using Reports = std::map<std::string, RunReport>;

const RunReport* find(const Reports& r, const std::string& name) {
  auto it = r.find(name);
  return it == r.end() ? nullptr : &it->second;
}

double metric(const RunReport& r, const std::string& key, double fallback = NAN) {
  auto it = r.metrics.find(key);
  return it == r.metrics.end() ? fallback : it->second;
}

std::vector<const RunReport*> family(const Reports& reports, const std::string& fam) {
  std::vector<const RunReport*> out;
  for (const auto& [name, r] : reports) {
    if (r.family == fam) out.push_back(&r);
  }
  std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->sweep_value < b->sweep_value; });
  return out;
}

bool converged(const RunReport& r) {
  return !r.diverged && r.final_error && r.truth_norm && *r.final_error < 0.01 * *r.truth_norm;
}

Outcome c6_lti(const Reports& reports) {
  const auto runs = family(reports, "lti_gd");
  if (runs.size() != 4) return {false, "expected 4 lti_gd runs, found " + std::to_string(runs.size())};
  bool ok = true;
  double wall = 0.0, prev = INFINITY;
  std::ostringstream d;
  d << "t(1%)";
  for (const auto* r : runs) {
    ok = ok && converged(*r) && r->convergence_time && *r->convergence_time < prev;
    if (r->convergence_time) prev = *r->convergence_time;
    wall += r->wall_seconds;
    d << " " << fmt("%.4g", r->convergence_time.value_or(NAN));
  }
  d << " s for gamma_g " << fmt("%g", *runs.front()->sweep_value) << ".." << fmt("%g", *runs.back()->sweep_value)
    << ", " << fmt("%.1f s", wall);
  return {ok && wall < 60.0, d.str()};
}

Outcome c7_mrac(const Reports& reports) {
  Plant p;
  p.numerator = {2.0};
  p.denominator = {1.0, 1.0};
  ReferenceModel m;
  m.k_m = 3.0;
  m.D_m = {1.0, 3.0};
  const Vec ideal = *ideal_theta(p, m);
  // Gains listed as (r, y_p) are the reverse of the regressor order.
  const bool gains = ideal(1) == 1.5 && ideal(0) == -1.0;

  bool ok = gains;
  std::ostringstream d;
  for (const char* name : {"mrac_r1", "mrac_r2", "mrac_negative_gain"}) {
    const RunReport* r = find(reports, name);
    if (!r) return {false, std::string("missing ") + name};
    const double e_t = metric(*r, "e_t_tail_max");
    ok = ok && !r->diverged && r->final_error && *r->final_error < 1e-2 && e_t < 1e-2;
    d << name << " |theta~| " << fmt("%.2g", r->final_error.value_or(NAN)) << " |e_T| " << fmt("%.2g", e_t) << "; ";
  }
  return {ok, d.str() + "ideal (r, y_p) gains (1.5, -1)"};
}

Outcome c8_rohrs(const Reports& reports) {
  const RunReport* c = find(reports, "rohrs_constant");
  const RunReport* v = find(reports, "rohrs_decaying");
  if (!c || !v) return {false, "missing rohrs scenarios"};
  const double peak_v = metric(*v, "peak");
  std::ostringstream d;
  d << "constant gain " << (c->diverged ? "diverged" : "bounded") << " (peak " << fmt("%.3g", metric(*c, "peak"))
    << "); decaying gain peak " << fmt("%.3g", peak_v);
  return {c->diverged && !v->diverged && peak_v < 1e3, d.str()};
}

std::vector<double> last_row(const fs::path& csv) {
  std::ifstream in(csv);
  std::string line, last;
  while (std::getline(in, line)) {
    if (!line.empty()) last = line;
  }
  std::vector<double> out;
  std::stringstream ss(last);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(std::strtod(cell.c_str(), nullptr));
  return out;
}

Outcome c9_reject(const Reports& reports) {
  bool ok = true;
  std::ostringstream d;
  for (const char* name : {"reject_pulse", "reject_rational", "reject_damped_cos"}) {
    const RunReport* r = find(reports, name);
    if (!r) return {false, std::string("missing ") + name};
    const auto row = last_row(r->csv_path);
    if (row.size() < 3) return {false, std::string("no samples in ") + name};
    const double t1 = row[1], t2 = row[2];
    const double res = metric(*r, "lre_residual");
    ok = ok && !r->diverged && std::abs(t1 - 5.0) <= 0.02 * 5.0 && std::abs(t2 - 0.04) <= 0.02 * 0.04 && res <= 1e-4;
    d << std::string(name).substr(7) << " (" << fmt("%.5g", t1) << ", " << fmt("%.4g", t2) << ") res " << fmt("%.2g", res) << "; ";
  }
  const MonotoneMap map = MonotoneMap::frequency_product();
  Box box{Vec::Constant(2, -10.0), Vec::Constant(2, 10.0)};
  const auto cert = check_p_monotone(map, box);
  ok = ok && cert.passed && cert.symmetric_part_deviation == 0.0;
  d << "P dS + (P dS)^T - 2I max " << fmt("%g", cert.symmetric_part_deviation);
  return {ok, d.str()};
}

Outcome c10_dg(const Reports& reports) {
  const auto runs = family(reports, "lti_dg");
  if (runs.empty()) return {false, "no lti_dg runs"};
  bool all = true;
  double below = 0.0, above = INFINITY, norm = 0.0;
  std::ostringstream d;
  d << "tail max |theta~|";
  for (const auto* r : runs) {
    all = all && converged(*r);
    const double osc = r->oscillation_metric.value_or(NAN);
    norm = r->truth_norm.value_or(norm);
    if (*r->sweep_value < 1.0) below = std::max(below, osc);
    if (*r->sweep_value > 1.0) above = std::min(above, osc);
    d << " b=" << fmt("%g", *r->sweep_value) << ":" << fmt("%.2g", osc);
  }
  // Rounding-level differences do not count as oscillation.
  const bool ordered = above > below && above > 1e-6 * norm;
  d << (all ? "; all converge" : "; not all converge");
  return {all && ordered, d.str()};
}

// ---------------------------------------------------------------------------
// 11

Outcome c11_determinism(const std::vector<RunReport>& a, const std::vector<RunReport>& b) {
  if (a.size() != b.size() || a.empty()) return {false, "run sets differ"};
  std::size_t same = 0;
  std::string first_diff;
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool eq = a[i].name == b[i].name && slurp(a[i].csv_path) == slurp(b[i].csv_path);
    same += eq;
    if (!eq && first_diff.empty()) first_diff = a[i].name;
  }
  std::string d = std::to_string(same) + "/" + std::to_string(a.size()) + " CSV files identical";
  if (!first_diff.empty()) d += ", first difference in " + first_diff;
  return {same == a.size(), d};
}

std::set<int> parse_list(const std::string& s) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.insert(std::atoi(item.c_str()));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  fs::path dir = GDEST_SCENARIO_DIR;
  std::set<int> expected;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--scenarios" && i + 1 < argc) {
      dir = argv[++i];
    } else if (a == "--expect-fail" && i + 1 < argc) {
      expected = parse_list(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--scenarios DIR] [--expect-fail N,M]\n", argv[0]);
      return 2;
    }
  }

  std::set<int> failed;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) failed.insert(id);
    std::printf("[%s] %2d %-24s %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
  };

  const fs::path work = fs::temp_directory_path() / ("gdest_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(work);

  report(1, "ie-identifiability", c1_equivalence);
  report(2, "dt-closed-form", [&] { return c2_dt_oracle(dir); });

  const Scenario lti = load_scenario(dir / "lti_gd_2500.toml");
  IdentityResiduals ids;
  bool ids_ok = true;
  std::string ids_err;
  try {
    ids = lti_identities(lti);
  } catch (const std::exception& e) {
    ids_ok = false;
    ids_err = e.what();
  }
  report(3, "extended-mixing-identity", [&]() -> Outcome {
    if (!ids_ok) return {false, ids_err};
    return {ids.extended <= 1e-7 && ids.mixing <= 1e-7,
            "extended " + fmt("%.2g", ids.extended) + ", mixing " + fmt("%.2g", ids.mixing)};
  });
  report(4, "operator-identity", [&]() -> Outcome {
    if (!ids_ok) return {false, ids_err};
    return {ids.op_y <= 1e-8 && ids.op_d <= 1e-8,
            "x_y " + fmt("%.2g", ids.op_y) + ", D columns " + fmt("%.2g", ids.op_d)};
  });
  report(5, "delta-lower-bounds", [&] { return c5_delta_bounds(lti); });

  RunOptions o1, o2;
  o1.out_dir = work / "first";
  o2.out_dir = work / "second";
  std::vector<RunReport> first, second;
  Reports by_name;
  std::string run_err;
  try {
    first = run_directory(dir, o1, 1);
    second = run_directory(dir, o2, 0);
    for (const auto& r : first) by_name[r.name] = r;
  } catch (const std::exception& e) {
    run_err = e.what();
  }
  auto guarded = [&](const std::function<Outcome(const Reports&)>& fn) {
    return [&, fn]() -> Outcome {
      if (!run_err.empty()) return {false, "scenario run failed: " + run_err};
      return fn(by_name);
    };
  };
  report(6, "lti-gd-sweep", guarded(c6_lti));
  report(7, "mrac-ideal", guarded(c7_mrac));
  report(8, "rohrs-dichotomy", guarded(c8_rohrs));
  report(9, "disturbance-rejection", guarded(c9_reject));
  report(10, "dg-baseline", guarded(c10_dg));
  report(11, "determinism", [&]() -> Outcome {
    if (!run_err.empty()) return {false, "scenario run failed: " + run_err};
    return c11_determinism(first, second);
  });

  fs::remove_all(work);

  std::printf("%zu/11 passed", 11 - failed.size());
  if (!expected.empty()) {
    std::printf(", expected failures:");
    for (int e : expected) std::printf(" %d", e);
  }
  std::printf("\n");
  if (failed == expected) return 0;
  for (int f : failed) {
    if (!expected.count(f)) std::printf("unexpected failure: %d\n", f);
  }
  for (int e : expected) {
    if (!failed.count(e)) std::printf("expected failure now passes: %d\n", e);
  }
  return 1;
}
