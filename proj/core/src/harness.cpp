#include "gdest/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "gdest/dg_baseline.hpp"
#include "gdest/errors.hpp"
#include "gdest/excitation.hpp"
#include "gdest/mrac.hpp"
#include "gdest/nlpre.hpp"
#include "gdest/robust_reject.hpp"

namespace gdest {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", *v);
  return buf;
}

// Watches the estimator's regressor: IE Gramian until the threshold is
// reached, and |y - phi^T theta| when the truth is known.
class ObservedLre final : public Lre {
 public:
  ObservedLre(Lre& inner, TimeMode mode, double h) : inner_(inner), mode_(mode), h_(h) {
    const int q = inner.dimension();
    gram_ = Mat::Zero(q, q);
    threshold_ = default_ie_threshold(q);
    truth_ = inner.truth();
  }

  int dimension() const override { return inner_.dimension(); }

  LreSample sample(double t) const override {
    LreSample s = inner_.sample(t);
    if (truth_) residual_ = std::max(residual_, std::abs(s.y - s.phi.dot(*truth_)));
    if (!t_c_) {
      if (mode_ == TimeMode::Discrete) {
        gram_.noalias() += s.phi * s.phi.transpose();
      } else if (has_prev_) {
        gram_.noalias() += 0.5 * h_ * (prev_ * prev_.transpose() + s.phi * s.phi.transpose());
      }
      if (!has_prev_) t0_ = t;
      prev_ = s.phi;
      has_prev_ = true;
      if (min_symmetric_eigenvalue(gram_) >= threshold_) {
        t_c_ = mode_ == TimeMode::Discrete ? static_cast<double>(count_) : t - t0_;
        t_c_abs_ = t;
      }
      ++count_;
    }
    return s;
  }

  void advance(double t, double h) override { inner_.advance(t, h); }

  void reset() override {
    inner_.reset();
    gram_.setZero();
    has_prev_ = false;
    t_c_.reset();
    count_ = 0;
    residual_ = 0.0;
  }

  std::optional<Vec> truth() const override { return truth_; }

  std::optional<double> t_c() const { return t_c_; }
  std::optional<double> t_c_absolute() const { return t_c_ ? std::optional<double>(t_c_abs_) : std::nullopt; }
  double residual() const { return residual_; }

 private:
  Lre& inner_;
  TimeMode mode_;
  double h_;
  std::optional<Vec> truth_;
  double threshold_ = 0.0;
  mutable Mat gram_;
  mutable Vec prev_;
  mutable bool has_prev_ = false;
  mutable std::optional<double> t_c_;
  mutable double t_c_abs_ = 0.0;
  mutable double t0_ = 0.0;
  mutable std::size_t count_ = 0;
  mutable double residual_ = 0.0;
};

std::unique_ptr<Lre> make_lre(const Scenario& s) {
  switch (s.system) {
    case SystemKind::Identification:
      return std::make_unique<IdentificationLre>(s.plant_num, s.plant_den, s.filter_den, s.signals.at(s.input),
                                                 s.disturbance);
    case SystemKind::Signal: {
      std::vector<SignalSpec> specs;
      for (const auto& n : s.regressor) specs.push_back(s.signals.at(n));
      return std::make_unique<SignalLre>(std::move(specs), s.theta, s.disturbance);
    }
    case SystemKind::Rejection:
      return std::make_unique<RejectionLre>(s.signals.at(s.delta_signal), s.reject_theta, s.disturbance, s.lambda,
                                            s.steady_state);
    case SystemKind::Mrac:
      break;
  }
  throw std::logic_error("make_lre: system has no open-loop regression");
}

int trace_dimension(const Scenario& s, const std::string& trace) {
  if (trace == "theta") {
    if (s.estimator == EstimatorKind::Dg) return s.dg.q;
    if (s.estimator == EstimatorKind::Nlpre) return s.map_name == "identity" ? s.gd.q : 2;
    return s.gd.q;
  }
  if (trace == "theta_g") return s.gd.q;
  if (trace == "regressor") return s.dg.q;
  return 1;
}

struct Traces {
  std::map<std::string, const SignalTrace*> by_name;
};

void fill_error_summary(RunReport& r, const SignalTrace& err, double t_first, double t_last) {
  if (err.empty()) return;
  r.final_error = err.values.back()(0);
  double sup = 0.0;
  for (const auto& v : err.values) sup = std::max(sup, v(0));
  r.sup_error = std::max(r.sup_error.value_or(0.0), sup);
  const double tail_start = t_first + 0.8 * (t_last - t_first);
  double osc = 0.0;
  for (std::size_t i = 0; i < err.size(); ++i) {
    if (err.t[i] >= tail_start) osc = std::max(osc, err.values[i](0));
  }
  r.oscillation_metric = osc;
  if (r.truth_norm && !r.diverged) {
    const double thr = 0.01 * *r.truth_norm;
    std::optional<double> conv;
    for (std::size_t i = err.size(); i-- > 0;) {
      if (!(err.values[i](0) < thr)) break;
      conv = err.t[i];
    }
    r.convergence_time = conv;
  }
}

// In DT the first step that sees the exciting sample is k_d + 1.
void fill_delta_summary(RunReport& r, const SignalTrace& delta, const std::optional<double>& t_c_abs, TimeMode mode) {
  if (!t_c_abs || delta.empty()) return;
  const double from = mode == TimeMode::Discrete ? *t_c_abs + 1.0 : *t_c_abs;
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < delta.size(); ++i) {
    if (delta.t[i] >= from) m = std::min(m, std::abs(delta.values[i](0)));
  }
  if (std::isfinite(m)) r.min_abs_delta_after_tc = m;
}

void write_csv(const std::filesystem::path& path, const Scenario& s, const Traces& traces, std::size_t& rows) {
  const auto cols = csv_columns(s);
  const SignalTrace* time_source = nullptr;
  for (const auto& name : s.traces) {
    const auto* tr = traces.by_name.at(name);
    if (!tr->empty()) {
      time_source = tr;
      break;
    }
  }
  rows = time_source ? time_source->size() : 0;
  for (const auto& name : s.traces) {
    const auto* tr = traces.by_name.at(name);
    if (!tr->empty() && tr->size() != rows) throw std::logic_error("trace '" + name + "' is not aligned");
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  std::string line;
  for (std::size_t i = 0; i < cols.size(); ++i) line += (i ? "," : "") + cols[i];
  line += "\n";
  out << line;
  for (std::size_t k = 0; k < rows; ++k) {
    line = fmt(time_source->t[k]);
    for (const auto& name : s.traces) {
      const auto* tr = traces.by_name.at(name);
      const int dim = trace_dimension(s, name);
      for (int j = 0; j < dim; ++j) {
        line += ',';
        line += tr->empty() ? std::string("nan") : fmt(tr->values[k](j));
      }
    }
    line += "\n";
    out << line;
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_script(const std::filesystem::path& path, const Scenario& s, const std::string& csv_name) {
  const auto cols = csv_columns(s);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# " << s.name << ": columns of " << csv_name << "\n";
  for (std::size_t i = 0; i < cols.size(); ++i) out << "#   " << (i + 1) << " " << cols[i] << "\n";
  out << "set datafile separator \",\"\n";
  out << "set key autotitle columnhead\n";
  out << "set xlabel \"" << cols.front() << "\"\n";
  out << "plot for [i=2:" << cols.size() << "] \"" << csv_name << "\" using 1:i with lines\n";
}

}  // namespace

std::vector<std::string> csv_columns(const Scenario& s) {
  std::vector<std::string> cols{s.mode == TimeMode::Discrete ? "k" : "time"};
  for (const auto& name : s.traces) {
    const int dim = trace_dimension(s, name);
    if (dim == 1) {
      cols.push_back(name);
    } else {
      for (int j = 1; j <= dim; ++j) cols.push_back(name + "_" + std::to_string(j));
    }
  }
  return cols;
}

RunReport run_scenario(Scenario s, const RunOptions& options) {
  if (options.h) {
    if (!(*options.h > 0.0)) throw ValidationError("grid.h", "override must be positive");
    if (s.mode == TimeMode::Discrete && *options.h != 1.0) throw ValidationError("grid.h", "must be 1 in discrete time");
    s.h = *options.h;
  }
  if (options.t_end) {
    if (!(*options.t_end >= 0.0)) throw ValidationError("grid.t_end", "override must be non-negative");
    s.t_end = *options.t_end;
  }

  const auto start = std::chrono::steady_clock::now();
  RunReport r;
  r.name = s.name;
  r.family = s.family;
  r.sweep_value = s.sweep_value;
  r.system = to_string(s.system);
  r.estimator = to_string(s.estimator);

  const TimeGrid grid = s.grid();
  const double t_first = grid.t0;
  const double t_last = grid.samples() ? grid.t_end() : grid.t0;
  SignalTrace empty;
  Traces traces;
  for (const auto& n : available_traces(s)) traces.by_name[n] = &empty;

  // Results are kept alive until the CSV is written.
  std::optional<PerturbedRun> gd_run;
  std::optional<DgRun> dg_run;
  std::optional<NlpreRun> nl_run;
  std::optional<MracRun> mrac_run;

  if (s.system == SystemKind::Mrac) {
    MracOptions mo;
    mo.adapt = s.adapt;
    mo.stride = s.stride;
    mrac_run = mrac_closed_loop(s.plant, s.model, s.filters, s.gd, grid, mo);
    const MracRun& m = *mrac_run;
    if (m.ideal) r.truth_norm = m.ideal->norm();
    r.diverged = m.diverged;
    r.diverged_at = m.diverged_at;
    r.metrics["peak"] = m.peak;
    if (m.ideal && !s.plant.has_unmodeled()) r.metrics["lre_residual"] = m.lre_residual;
    if (!m.e_t.empty()) {
      r.metrics["e_t_final_abs"] = std::abs(m.e_t.values.back()(0));
      const double tail_start = t_first + 0.8 * (t_last - t_first);
      double tail = 0.0;
      for (std::size_t i = 0; i < m.e_t.size(); ++i) {
        if (m.e_t.t[i] >= tail_start) tail = std::max(tail, std::abs(m.e_t.values[i](0)));
      }
      r.metrics["e_t_tail_max"] = tail;
    }
    traces.by_name["theta"] = &m.theta;
    traces.by_name["delta"] = &m.delta;
    traces.by_name["error_norm"] = &m.error_norm;
    traces.by_name["y_p"] = &m.y_p;
    traces.by_name["y_m"] = &m.y_m;
    traces.by_name["e_t"] = &m.e_t;
    traces.by_name["u_p"] = &m.u_p;
    fill_error_summary(r, m.error_norm, t_first, t_last);
  } else {
    auto inner = make_lre(s);
    ObservedLre lre(*inner, s.mode, grid.h);
    if (s.estimator == EstimatorKind::Gd) {
      gd_run = run_perturbed_gd(lre, s.gd.gamma_g, s.gd, grid, s.stride);
      const PerturbedRun& g = *gd_run;
      if (auto t = lre.truth()) r.truth_norm = t->norm();
      r.diverged = g.diverged;
      r.diverged_at = g.diverged_at;
      r.sup_error = g.sup_error;
      if (s.disturbance.kind != Disturbance::Kind::None) {
        r.metrics["energy_margin"] = g.worst_energy_margin;
        r.metrics["energy_holds"] = g.energy_holds ? 1.0 : 0.0;
        r.metrics["disturbance_bound"] = g.disturbance_bound;
      }
      traces.by_name["theta"] = &g.run.theta;
      traces.by_name["theta_g"] = &g.run.theta_g;
      traces.by_name["delta"] = &g.run.delta;
      traces.by_name["error_norm"] = &g.run.error_norm;
      if (traces.by_name.count("energy")) {
        traces.by_name["energy"] = &g.energy;
        traces.by_name["energy_bound"] = &g.energy_bound;
      }
      fill_error_summary(r, g.run.error_norm, t_first, t_last);
      fill_delta_summary(r, g.run.delta, lre.t_c_absolute(), s.mode);
    } else if (s.estimator == EstimatorKind::Dg) {
      try {
        dg_run = run_dg(lre, s.dg, grid, s.stride);
      } catch (const NumericOverflow& e) {
        r.diverged = true;
        r.diverged_at = e.time();
        dg_run = DgRun{};
      }
      const DgRun& d = *dg_run;
      if (auto t = lre.truth()) r.truth_norm = t->norm();
      r.metrics["extension_peak"] = d.extension_peak;
      if (!d.new_lre_residual.empty()) {
        double res = 0.0;
        for (const auto& v : d.new_lre_residual.values) res = std::max(res, v(0));
        r.metrics["new_lre_residual"] = res;
      }
      traces.by_name["theta"] = &d.theta;
      traces.by_name["delta"] = &d.delta;
      traces.by_name["error_norm"] = &d.error_norm;
      traces.by_name["regressor"] = &d.regressor;
      traces.by_name["new_lre_residual"] = &d.new_lre_residual;
      fill_error_summary(r, d.error_norm, t_first, t_last);
      fill_delta_summary(r, d.delta, lre.t_c_absolute(), s.mode);
    } else {
      const MonotoneMap map = s.map_name == "identity" ? MonotoneMap::identity(s.gd.q) : MonotoneMap::frequency_product();
      Vec truth;
      if (s.system == SystemKind::Rejection) {
        truth = *static_cast<const RejectionLre&>(*inner).reduced_truth();
      } else if (auto t = inner->truth()) {
        truth = *t;
      }
      try {
        nl_run = run_nlpre(lre, map, s.gd, grid, truth, s.stride);
      } catch (const NumericOverflow& e) {
        r.diverged = true;
        r.diverged_at = e.time();
        nl_run = NlpreRun{};
      }
      const NlpreRun& n = *nl_run;
      if (truth.size()) r.truth_norm = truth.norm();
      r.metrics["identity_residual"] = n.identity_residual;
      if (s.system == SystemKind::Rejection && !n.theta.empty()) {
        const double th2 = n.theta.values.back()(1);
        if (th2 > 1e-9) r.metrics["omega_estimate"] = frequency_from_estimate(th2);
      }
      traces.by_name["theta"] = &n.theta;
      traces.by_name["delta"] = &n.delta;
      traces.by_name["error_norm"] = &n.error_norm;
      fill_error_summary(r, n.error_norm, t_first, t_last);
      fill_delta_summary(r, n.delta, lre.t_c_absolute(), s.mode);
    }
    r.t_c = lre.t_c();
    if (lre.truth()) r.metrics["lre_residual"] = lre.residual();
  }

  if (options.write_files) {
    std::filesystem::create_directories(options.out_dir);
    r.csv_path = options.out_dir / s.csv;
    write_csv(r.csv_path, s, traces, r.rows);
    r.script_path = r.csv_path;
    r.script_path.replace_extension(".gp");
    write_script(r.script_path, s, r.csv_path.filename().string());
  } else {
    for (const auto& name : s.traces) r.rows = std::max(r.rows, traces.by_name.at(name)->size());
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::string format_report(const RunReport& r) {
  std::ostringstream o;
  o << "scenario       " << r.name << " (" << r.system << ", " << r.estimator << ")\n";
  o << "family         " << r.family;
  if (r.sweep_value) o << "  sweep=" << fmt_short(r.sweep_value);
  o << "\n";
  o << "final error    " << fmt_short(r.final_error) << "\n";
  o << "sup error      " << fmt_short(r.sup_error) << "\n";
  o << "|theta|        " << fmt_short(r.truth_norm) << "\n";
  o << "t(1%)          " << fmt_short(r.convergence_time) << "\n";
  o << "tail max error " << fmt_short(r.oscillation_metric) << "\n";
  o << "t_c            " << fmt_short(r.t_c) << "\n";
  o << "min|Delta|>t_c " << fmt_short(r.min_abs_delta_after_tc) << "\n";
  o << "diverged       " << (r.diverged ? "yes at t=" + fmt_short(r.diverged_at) : std::string("no")) << "\n";
  for (const auto& [k, v] : r.metrics) {
    std::string key = k;
    key.resize(std::max<std::size_t>(key.size(), 14), ' ');
    o << key << " " << fmt_short(v) << "\n";
  }
  o << "rows           " << r.rows << "\n";
  if (!r.csv_path.empty()) o << "csv            " << r.csv_path.string() << "\n";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", r.wall_seconds);
  o << "wall seconds   " << buf << "\n";
  return o.str();
}

std::vector<RunReport> run_directory(const std::filesystem::path& dir, const RunOptions& options, unsigned threads) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".toml") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  // Parse everything first so validation errors surface before any run.
  std::vector<Scenario> scenarios;
  for (const auto& f : files) scenarios.push_back(load_scenario(f));

  std::vector<RunReport> reports(scenarios.size());
  std::vector<std::exception_ptr> errors(scenarios.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(scenarios.size(), 1)));
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < scenarios.size(); i = next++) {
      try {
        reports[i] = run_scenario(scenarios[i], options);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::sort(reports.begin(), reports.end(), [](const RunReport& a, const RunReport& b) { return a.name < b.name; });
  return reports;
}

// ---------------------------------------------------------------------------

ComparisonTable compare_runs(const std::vector<RunReport>& a, const std::vector<RunReport>& b) {
  if (a.size() != b.size()) throw ValidationError("family", "run sets differ in size");
  std::map<std::string, const RunReport*> by_name;
  for (const auto& r : b) by_name[r.name] = &r;
  ComparisonTable table;
  for (const auto& ra : a) {
    const auto it = by_name.find(ra.name);
    if (it == by_name.end()) throw ValidationError("name", "no run named '" + ra.name + "' in the second set");
    const RunReport& rb = *it->second;
    if (ra.family != rb.family) throw ValidationError("family", "'" + ra.name + "' belongs to different families");
    table.rows.push_back({ra.name, ra.convergence_time, rb.convergence_time, ra.final_error, rb.final_error});
  }
  return table;
}

std::string ComparisonTable::text() const {
  std::ostringstream o;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-28s %12s %12s %12s %12s %12s\n", "name", "t1%(a)", "t1%(b)", "final(a)", "final(b)",
                "diff");
  o << buf;
  for (const auto& r : rows) {
    std::optional<double> diff;
    if (r.final_a && r.final_b) diff = *r.final_a - *r.final_b;
    std::snprintf(buf, sizeof buf, "%-28s %12s %12s %12s %12s %12s\n", r.name.c_str(),
                  fmt_short(r.convergence_a).c_str(), fmt_short(r.convergence_b).c_str(), fmt_short(r.final_a).c_str(),
                  fmt_short(r.final_b).c_str(), fmt_short(diff).c_str());
    o << buf;
  }
  return o.str();
}

std::string ComparisonTable::csv() const {
  auto cell = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
  std::string out = "name,convergence_a,convergence_b,final_a,final_b\n";
  for (const auto& r : rows) {
    out += r.name + "," + cell(r.convergence_a) + "," + cell(r.convergence_b) + "," + cell(r.final_a) + "," +
           cell(r.final_b) + "\n";
  }
  return out;
}

std::vector<FamilySummary> summarize_families(const std::vector<RunReport>& runs) {
  std::map<std::string, FamilySummary> groups;
  for (const auto& r : runs) {
    auto& g = groups[r.family];
    g.family = r.family;
    g.runs.push_back(r);
  }
  std::vector<FamilySummary> out;
  for (auto& [name, g] : groups) {
    std::sort(g.runs.begin(), g.runs.end(), [](const RunReport& a, const RunReport& b) {
      const double va = a.sweep_value.value_or(0.0);
      const double vb = b.sweep_value.value_or(0.0);
      return va != vb ? va < vb : a.name < b.name;
    });
    g.all_converged = std::all_of(g.runs.begin(), g.runs.end(),
                                  [](const RunReport& r) { return r.convergence_time.has_value() && !r.diverged; });
    g.convergence_decreasing = g.all_converged && g.runs.size() > 1;
    for (std::size_t i = 1; g.convergence_decreasing && i < g.runs.size(); ++i) {
      if (!(*g.runs[i].convergence_time < *g.runs[i - 1].convergence_time)) g.convergence_decreasing = false;
    }
    out.push_back(std::move(g));
  }
  return out;
}

std::string FamilySummary::text() const {
  std::ostringstream o;
  char buf[256];
  o << "family " << family << "\n";
  std::snprintf(buf, sizeof buf, "  %-28s %10s %12s %12s %14s %9s\n", "name", "sweep", "t1%", "final", "tail max",
                "diverged");
  o << buf;
  for (const auto& r : runs) {
    std::snprintf(buf, sizeof buf, "  %-28s %10s %12s %12s %14s %9s\n", r.name.c_str(),
                  fmt_short(r.sweep_value).c_str(), fmt_short(r.convergence_time).c_str(),
                  fmt_short(r.final_error).c_str(), fmt_short(r.oscillation_metric).c_str(),
                  r.diverged ? "yes" : "no");
    o << buf;
  }
  o << "  all converged: " << (all_converged ? "yes" : "no")
    << ", convergence time decreasing in sweep value: " << (convergence_decreasing ? "yes" : "no") << "\n";
  return o.str();
}

std::string FamilySummary::csv() const {
  auto cell = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
  std::string out;
  for (const auto& r : runs) {
    out += family + "," + r.name + "," + cell(r.sweep_value) + "," + cell(r.convergence_time) + "," +
           cell(r.final_error) + "," + cell(r.oscillation_metric) + "," + (r.diverged ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace gdest
