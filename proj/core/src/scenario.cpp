#include "gdest/scenario.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "gdest/errors.hpp"

namespace gdest {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Drops a trailing comment that is not inside a string.
std::string strip_comment(const std::string& s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  return std::all_of(k.begin(), k.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
  });
}

double parse_number(const std::string& tok, int line) {
  if (tok.empty()) throw ParseError("expected a number", line);
  const char* begin = tok.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end != begin + tok.size() || errno == ERANGE) throw ParseError("invalid number '" + tok + "'", line);
  if (!std::isfinite(v)) throw ParseError("non-finite number '" + tok + "'", line);
  return v;
}

std::string parse_string(const std::string& tok, int line) {
  if (tok.size() < 2 || tok.front() != '"' || tok.back() != '"') throw ParseError("unterminated string", line);
  const std::string body = tok.substr(1, tok.size() - 2);
  if (body.find('"') != std::string::npos) throw ParseError("embedded quote in string", line);
  return body;
}

ConfigValue parse_value(const std::string& raw, int line) {
  ConfigValue out;
  out.line = line;
  const std::string tok = trim(raw);
  if (tok.empty()) throw ParseError("missing value", line);
  if (tok == "true" || tok == "false") {
    out.value = tok == "true";
    return out;
  }
  if (tok.front() == '"') {
    out.value = parse_string(tok, line);
    return out;
  }
  if (tok.front() == '[') {
    if (tok.back() != ']') throw ParseError("unterminated array", line);
    const std::string body = trim(tok.substr(1, tok.size() - 2));
    std::vector<std::string> items;
    if (!body.empty()) {
      std::string cur;
      bool in_string = false;
      for (char c : body) {
        if (c == '"') in_string = !in_string;
        if (c == ',' && !in_string) {
          items.push_back(trim(cur));
          cur.clear();
        } else {
          cur.push_back(c);
        }
      }
      if (in_string) throw ParseError("unterminated string in array", line);
      items.push_back(trim(cur));
    }
    const bool strings = !items.empty() && !items.front().empty() && items.front().front() == '"';
    if (strings) {
      std::vector<std::string> v;
      for (const auto& it : items) v.push_back(parse_string(it, line));
      out.value = std::move(v);
    } else {
      std::vector<double> v;
      for (const auto& it : items) v.push_back(parse_number(it, line));
      out.value = std::move(v);
    }
    return out;
  }
  out.value = parse_number(tok, line);
  return out;
}

// ---------------------------------------------------------------------------
// Typed access with field-named validation errors

class SectionReader {
 public:
  SectionReader(const ConfigDocument& doc, std::string section) : section_(std::move(section)) {
    const auto it = doc.sections.find(section_);
    if (it != doc.sections.end()) values_ = &it->second;
  }

  bool present() const { return values_ != nullptr; }
  bool has(const std::string& key) const { return values_ && values_->count(key); }
  std::string field(const std::string& key) const { return section_.empty() ? key : section_ + "." + key; }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const ConfigValue* v = find(key);
    if (!v) return require(key, fallback);
    if (const auto* d = std::get_if<double>(&v->value)) return *d;
    throw ValidationError(field(key), "expected a number");
  }

  bool boolean(const std::string& key, bool fallback) {
    const ConfigValue* v = find(key);
    if (!v) return fallback;
    if (const auto* b = std::get_if<bool>(&v->value)) return *b;
    throw ValidationError(field(key), "expected true or false");
  }

  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    const ConfigValue* v = find(key);
    if (!v) return require(key, fallback);
    if (const auto* s = std::get_if<std::string>(&v->value)) return *s;
    throw ValidationError(field(key), "expected a string");
  }

  std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt) {
    const ConfigValue* v = find(key);
    if (!v) return require(key, fallback);
    if (const auto* a = std::get_if<std::vector<double>>(&v->value)) return *a;
    if (const auto* a = std::get_if<std::vector<std::string>>(&v->value); a && a->empty()) return {};
    if (const auto* d = std::get_if<double>(&v->value)) return {*d};
    throw ValidationError(field(key), "expected an array of numbers");
  }

  std::vector<std::string> strings(const std::string& key,
                                   std::optional<std::vector<std::string>> fallback = std::nullopt) {
    const ConfigValue* v = find(key);
    if (!v) return require(key, fallback);
    if (const auto* a = std::get_if<std::vector<std::string>>(&v->value)) return *a;
    if (const auto* a = std::get_if<std::vector<double>>(&v->value); a && a->empty()) return {};
    throw ValidationError(field(key), "expected an array of strings");
  }

  /// Rejects keys outside `allowed`.
  void only(const std::set<std::string>& allowed) const {
    if (!values_) return;
    for (const auto& [k, v] : *values_) {
      if (!allowed.count(k)) throw ValidationError(field(k), "unknown key");
    }
  }

 private:
  const ConfigValue* find(const std::string& key) const {
    if (!values_) return nullptr;
    const auto it = values_->find(key);
    return it == values_->end() ? nullptr : &it->second;
  }

  template <typename T>
  T require(const std::string& key, const std::optional<T>& fallback) const {
    if (!fallback) throw ValidationError(field(key), "missing required key");
    return *fallback;
  }

  std::string section_;
  const ConfigSection* values_ = nullptr;
};

Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

Poly to_poly(const std::vector<double>& v, const std::string& field) {
  const Poly p = poly_trim(v);
  if (p.empty()) throw ValidationError(field, "polynomial must be nonzero");
  return v;
}

void require_hurwitz(const Poly& p, const std::string& field) {
  if (poly_degree(p) >= 1 && !is_hurwitz(p)) throw ValidationError(field, "polynomial must be Hurwitz");
}

SignalSpec read_signal(SectionReader& r) {
  r.only({"kind", "value", "offset", "amplitude", "omega", "phase", "rate", "t_on", "t_off", "weights", "rates",
          "breaks", "levels"});
  SignalSpec s;
  const std::string kind = r.text("kind");
  try {
    s.kind = signal_kind_from_string(kind);
  } catch (const ValidationError&) {
    throw ValidationError(r.field("kind"), "unknown signal kind '" + kind + "'");
  }
  s.value = r.number("value", 0.0);
  s.offset = r.number("offset", 0.0);
  s.amplitude = r.number("amplitude", 0.0);
  s.omega = r.number("omega", 0.0);
  s.phase = r.number("phase", 0.0);
  s.rate = r.number("rate", 0.0);
  s.t_on = r.number("t_on", 0.0);
  s.t_off = r.number("t_off", 0.0);
  s.weights = r.numbers("weights", std::vector<double>{});
  s.rates = r.numbers("rates", std::vector<double>{});
  s.breaks = r.numbers("breaks", std::vector<double>{});
  s.levels = r.numbers("levels", std::vector<double>{});
  switch (s.kind) {
    case SignalSpec::Kind::ExpSum:
      if (s.weights.size() != s.rates.size()) throw ValidationError(r.field("rates"), "must match weights in length");
      break;
    case SignalSpec::Kind::Rational:
      if (!(s.offset > 0.0)) throw ValidationError(r.field("offset"), "must be positive");
      break;
    case SignalSpec::Kind::Pulse:
      if (s.t_off < s.t_on) throw ValidationError(r.field("t_off"), "must not precede t_on");
      break;
    case SignalSpec::Kind::Piecewise:
      if (s.levels.empty() || s.levels.size() != s.breaks.size()) {
        throw ValidationError(r.field("levels"), "needs one level per break");
      }
      break;
    default:
      break;
  }
  return s;
}

const SignalSpec& lookup_signal(const Scenario& s, const std::string& name, const std::string& field) {
  const auto it = s.signals.find(name);
  if (it == s.signals.end()) throw ValidationError(field, "no [signal." + name + "] section");
  return it->second;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
  return out + "]";
}

std::string fmt_list(const Vec& v) { return fmt_list(std::vector<double>(v.data(), v.data() + v.size())); }

std::string fmt_strings(const std::vector<std::string>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", \"" : "\"") + v[i] + "\"";
  return out + "]";
}

std::string quote(const std::string& s) { return "\"" + s + "\""; }

std::string schedule_name(GainSchedule::Kind k) {
  switch (k) {
    case GainSchedule::Kind::Constant: return "constant";
    case GainSchedule::Kind::Decaying: return "decaying";
    case GainSchedule::Kind::Growing: return "growing";
  }
  return "constant";
}

}  // namespace

// ---------------------------------------------------------------------------

ConfigDocument parse_document(const std::string& text) {
  ConfigDocument doc;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  bool any = false;
  doc.sections[""];
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    any = true;
    if (s.front() == '[') {
      if (s.back() != ']') throw ParseError("unterminated section header", line);
      section = trim(s.substr(1, s.size() - 2));
      std::stringstream parts(section);
      std::string part;
      bool ok = !section.empty();
      while (ok && std::getline(parts, part, '.')) ok = valid_key(part);
      if (!ok || section.back() == '.') throw ParseError("invalid section name '" + section + "'", line);
      if (doc.section_lines.count(section)) throw ParseError("duplicate section [" + section + "]", line);
      doc.section_lines[section] = line;
      doc.sections[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line);
    const std::string key = trim(s.substr(0, eq));
    if (!valid_key(key)) throw ParseError("invalid key '" + key + "'", line);
    auto& sec = doc.sections[section];
    if (sec.count(key)) throw ParseError("duplicate key '" + key + "'", line);
    sec[key] = parse_value(s.substr(eq + 1), line);
  }
  if (!any) throw ParseError("empty scenario", line == 0 ? 1 : line);
  return doc;
}

std::string to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::Identification: return "identification";
    case SystemKind::Signal: return "signal";
    case SystemKind::Mrac: return "mrac";
    case SystemKind::Rejection: return "rejection";
  }
  return "signal";
}

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Gd: return "gd";
    case EstimatorKind::Dg: return "dg";
    case EstimatorKind::Nlpre: return "nlpre";
  }
  return "gd";
}

TimeGrid Scenario::grid() const {
  if (mode == TimeMode::Discrete) return TimeGrid::discrete(static_cast<std::size_t>(std::llround(t_end)));
  return TimeGrid::over(t_end, h);
}

std::vector<std::string> available_traces(const Scenario& s) {
  std::vector<std::string> out;
  switch (s.estimator) {
    case EstimatorKind::Gd:
      out = {"theta", "theta_g", "delta", "error_norm"};
      if (s.system == SystemKind::Mrac) out.insert(out.end(), {"y_p", "y_m", "e_t", "u_p"});
      if (s.disturbance.kind != Disturbance::Kind::None && s.system != SystemKind::Mrac &&
          s.system != SystemKind::Rejection) {
        out.insert(out.end(), {"energy", "energy_bound"});
      }
      break;
    case EstimatorKind::Dg: out = {"theta", "delta", "error_norm", "regressor", "new_lre_residual"}; break;
    case EstimatorKind::Nlpre: out = {"theta", "delta", "error_norm"}; break;
  }
  return out;
}

Scenario parse_scenario(const std::string& text) {
  const ConfigDocument doc = parse_document(text);
  Scenario s;

  for (const auto& [name, sec] : doc.sections) {
    if (name.empty() || name == "grid" || name == "system" || name == "disturbance" || name == "estimator" ||
        name == "output") {
      continue;
    }
    if (name.rfind("signal.", 0) == 0 && name.size() > 7 && name.find('.', 7) == std::string::npos) {
      SectionReader r(doc, name);
      s.signals[name.substr(7)] = read_signal(r);
      continue;
    }
    throw ValidationError(name, "unknown section");
  }

  SectionReader root(doc, "");
  root.only({"name", "family", "sweep_value", "mode"});
  s.name = root.text("name");
  if (s.name.empty() || !valid_key(s.name)) throw ValidationError("name", "must be a non-empty identifier");
  s.family = root.text("family", s.name);
  if (root.has("sweep_value")) s.sweep_value = root.number("sweep_value");
  const std::string mode = root.text("mode", std::string("ct"));
  if (mode == "ct") {
    s.mode = TimeMode::Continuous;
  } else if (mode == "dt") {
    s.mode = TimeMode::Discrete;
  } else {
    throw ValidationError("mode", "must be \"ct\" or \"dt\"");
  }

  SectionReader grid(doc, "grid");
  grid.only({"t_end", "h", "stride"});
  s.t_end = grid.number("t_end");
  if (!(s.t_end >= 0.0)) throw ValidationError("grid.t_end", "must be non-negative");
  s.h = grid.number("h", s.mode == TimeMode::Discrete ? 1.0 : 1e-3);
  if (!(s.h > 0.0)) throw ValidationError("grid.h", "must be positive");
  if (s.mode == TimeMode::Discrete) {
    if (s.h != 1.0) throw ValidationError("grid.h", "must be 1 in discrete time");
    if (s.t_end != std::floor(s.t_end)) throw ValidationError("grid.t_end", "must be an integer step count");
  }
  const double stride = grid.number("stride", 1.0);
  if (!(stride >= 1.0) || stride != std::floor(stride)) throw ValidationError("grid.stride", "must be a positive integer");
  s.stride = static_cast<std::size_t>(stride);

  SectionReader sys(doc, "system");
  if (!sys.present()) throw ValidationError("system", "missing section");
  const std::string kind = sys.text("kind");
  if (kind == "identification") {
    s.system = SystemKind::Identification;
    sys.only({"kind", "plant_num", "plant_den", "filter_den", "input"});
    s.plant_num = to_poly(sys.numbers("plant_num"), "system.plant_num");
    s.plant_den = to_poly(sys.numbers("plant_den"), "system.plant_den");
    s.filter_den = to_poly(sys.numbers("filter_den"), "system.filter_den");
    require_hurwitz(s.filter_den, "system.filter_den");
    if (poly_degree(s.filter_den) != poly_degree(s.plant_den)) {
      throw ValidationError("system.filter_den", "degree must equal the plant order");
    }
    if (poly_degree(s.plant_num) >= poly_degree(s.plant_den)) {
      throw ValidationError("system.plant_num", "plant must be strictly proper");
    }
    s.input = sys.text("input");
    lookup_signal(s, s.input, "system.input");
  } else if (kind == "signal") {
    s.system = SystemKind::Signal;
    sys.only({"kind", "regressor", "theta"});
    s.regressor = sys.strings("regressor");
    if (s.regressor.empty()) throw ValidationError("system.regressor", "needs at least one entry");
    for (const auto& n : s.regressor) lookup_signal(s, n, "system.regressor");
    s.theta = to_vec(sys.numbers("theta"));
    if (s.theta.size() != static_cast<Eigen::Index>(s.regressor.size())) {
      throw ValidationError("system.theta", "length must match system.regressor");
    }
  } else if (kind == "mrac") {
    s.system = SystemKind::Mrac;
    sys.only({"kind", "plant_num", "plant_den", "unmodeled_num", "unmodeled_den", "k_m", "model_den", "lambda",
              "reference", "adapt"});
    s.plant.numerator = to_poly(sys.numbers("plant_num"), "system.plant_num");
    s.plant.denominator = to_poly(sys.numbers("plant_den"), "system.plant_den");
    s.plant.unmodeled_num = sys.numbers("unmodeled_num", std::vector<double>{});
    s.plant.unmodeled_den = sys.numbers("unmodeled_den", std::vector<double>{});
    if (s.plant.unmodeled_num.empty() != s.plant.unmodeled_den.empty()) {
      throw ValidationError("system.unmodeled_den", "unmodeled numerator and denominator go together");
    }
    s.model.k_m = sys.number("k_m");
    s.model.D_m = to_poly(sys.numbers("model_den"), "system.model_den");
    s.filters.lambda = sys.numbers("lambda", std::vector<double>{1.0});
    s.reference = sys.text("reference");
    s.model.r = lookup_signal(s, s.reference, "system.reference");
    s.adapt = sys.boolean("adapt", true);
    s.plant.validate();
    s.model.validate(s.plant.order() - s.plant.numerator_degree());
    s.filters.validate(s.plant.order());
    if (s.mode != TimeMode::Continuous) throw ValidationError("mode", "mrac scenarios are continuous-time");
  } else if (kind == "rejection") {
    s.system = SystemKind::Rejection;
    sys.only({"kind", "delta", "theta", "lambda", "steady_state"});
    s.delta_signal = sys.text("delta");
    lookup_signal(s, s.delta_signal, "system.delta");
    s.reject_theta = sys.number("theta");
    s.lambda = sys.number("lambda", 1.0);
    if (!(s.lambda > 0.0)) throw ValidationError("system.lambda", "must be positive");
    s.steady_state = sys.boolean("steady_state", true);
    if (s.mode != TimeMode::Continuous) throw ValidationError("mode", "rejection scenarios are continuous-time");
  } else {
    throw ValidationError("system.kind", "unknown system kind '" + kind + "'");
  }

  SectionReader dist(doc, "disturbance");
  dist.only({"kind", "amplitude", "omega", "phase"});
  s.disturbance.kind = disturbance_kind_from_string(dist.text("kind", std::string("none")));
  s.disturbance.amplitude = dist.number("amplitude", 0.0);
  s.disturbance.omega = dist.number("omega", 0.0);
  s.disturbance.phase = dist.number("phase", 0.0);
  s.disturbance.validate("disturbance");
  if (s.system == SystemKind::Rejection && s.disturbance.kind != Disturbance::Kind::Sinusoid) {
    throw ValidationError("disturbance.kind", "rejection scenarios need a sinusoid");
  }
  if (s.system != SystemKind::Rejection && s.disturbance.kind == Disturbance::Kind::Sinusoid) {
    throw ValidationError("disturbance.kind", "sinusoid applies to rejection scenarios only");
  }
  if (s.system == SystemKind::Mrac && s.disturbance.kind != Disturbance::Kind::None) {
    throw ValidationError("disturbance.kind", "mrac scenarios model perturbations as unmodeled dynamics");
  }

  SectionReader est(doc, "estimator");
  if (!est.present()) throw ValidationError("estimator", "missing section");
  const std::string ek = est.text("kind");
  int q = 0;
  switch (s.system) {
    case SystemKind::Identification: q = 2 * poly_degree(s.plant_den); break;
    case SystemKind::Signal: q = static_cast<int>(s.regressor.size()); break;
    case SystemKind::Mrac: q = 2 * s.plant.order(); break;
    case SystemKind::Rejection: q = 3; break;
  }
  if (ek == "gd" || ek == "nlpre") {
    s.estimator = ek == "gd" ? EstimatorKind::Gd : EstimatorKind::Nlpre;
    est.only({"kind", "gamma", "gamma_g", "gamma_g_schedule", "gamma_g_b", "theta_g0", "theta0", "map"});
    s.gd.q = q;
    s.gd.mode = s.mode;
    s.gd.gamma = est.number("gamma");
    const std::string sched = est.text("gamma_g_schedule", std::string("constant"));
    const double c = est.number("gamma_g");
    const double b = est.number("gamma_g_b", 1.0);
    if (sched == "constant") {
      s.gd.gamma_g = GainSchedule::constant(c);
    } else if (sched == "decaying") {
      s.gd.gamma_g = GainSchedule::decaying(c, b);
    } else if (sched == "growing") {
      s.gd.gamma_g = GainSchedule::growing(c, b);
    } else {
      throw ValidationError("estimator.gamma_g_schedule", "must be constant, decaying or growing");
    }
    s.gd.theta_g0 = to_vec(est.numbers("theta_g0", std::vector<double>{}));
    s.gd.theta0 = to_vec(est.numbers("theta0", std::vector<double>{}));
    if (s.estimator == EstimatorKind::Nlpre) {
      s.map_name = est.text("map", std::string("frequency_product"));
      if (s.map_name != "frequency_product" && s.map_name != "identity") {
        throw ValidationError("estimator.map", "must be frequency_product or identity");
      }
      if (s.system != SystemKind::Rejection && s.map_name == "frequency_product") {
        throw ValidationError("estimator.map", "frequency_product needs a rejection system");
      }
      if (s.mode != TimeMode::Continuous) throw ValidationError("mode", "nlpre is continuous-time only");
      const int q_map = s.map_name == "identity" ? q : 2;
      if (s.gd.theta0.size() == 0) s.gd.theta0 = Vec::Zero(q_map);
      if (s.gd.theta0.size() != q_map) {
        throw ValidationError("estimator.theta0", "expected " + std::to_string(q_map) + " entries");
      }
      const Vec theta0 = s.gd.theta0;
      s.gd.theta0 = Vec();
      s.gd.validate();
      s.gd.theta0 = theta0;
    } else {
      if (s.system == SystemKind::Rejection) throw ValidationError("estimator.kind", "rejection scenarios use nlpre");
      s.gd.validate();
      if (s.gd.mode == TimeMode::Discrete && s.gd.gamma_g.kind == GainSchedule::Kind::Decaying) {
        throw ValidationError("estimator.gamma_g_schedule", "decaying schedules are for continuous time");
      }
    }
  } else if (ek == "dg") {
    s.estimator = EstimatorKind::Dg;
    if (s.system == SystemKind::Mrac || s.system == SystemKind::Rejection) {
      throw ValidationError("estimator.kind", "dg runs on identification or signal systems");
    }
    if (s.mode != TimeMode::Continuous) throw ValidationError("mode", "dg is continuous-time only");
    est.only({"kind", "lambda", "g", "k", "beta", "kappa", "theta0"});
    s.dg.q = q;
    s.dg.lambda = est.number("lambda", 1.0);
    s.dg.g = est.number("g", 1.0);
    s.dg.k = est.number("k", 0.4);
    s.dg.beta = est.number("beta");
    s.dg.kappa = est.number("kappa", 10.0);
    s.dg.theta0 = to_vec(est.numbers("theta0", std::vector<double>{}));
    s.dg.validate();
  } else {
    throw ValidationError("estimator.kind", "unknown estimator kind '" + ek + "'");
  }

  SectionReader out(doc, "output");
  out.only({"csv", "traces"});
  s.csv = out.text("csv", s.name + ".csv");
  if (s.csv.empty()) throw ValidationError("output.csv", "must not be empty");
  const auto avail = available_traces(s);
  s.traces = out.strings("traces", avail);
  for (const auto& t : s.traces) {
    if (std::find(avail.begin(), avail.end(), t) == avail.end()) {
      throw ValidationError("output.traces", "trace '" + t + "' is not produced by this scenario");
    }
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string Scenario::echo() const {
  std::ostringstream o;
  o << "name = " << quote(name) << "\n";
  o << "family = " << quote(family) << "\n";
  if (sweep_value) o << "sweep_value = " << fmt(*sweep_value) << "\n";
  o << "mode = " << quote(mode == TimeMode::Continuous ? "ct" : "dt") << "\n";

  o << "\n[grid]\n";
  o << "t_end = " << fmt(t_end) << "\nh = " << fmt(h) << "\nstride = " << stride << "\n";

  o << "\n[system]\nkind = " << quote(to_string(system)) << "\n";
  switch (system) {
    case SystemKind::Identification:
      o << "plant_num = " << fmt_list(plant_num) << "\nplant_den = " << fmt_list(plant_den)
        << "\nfilter_den = " << fmt_list(filter_den) << "\ninput = " << quote(input) << "\n";
      break;
    case SystemKind::Signal:
      o << "regressor = " << fmt_strings(regressor) << "\ntheta = " << fmt_list(theta) << "\n";
      break;
    case SystemKind::Mrac:
      o << "plant_num = " << fmt_list(plant.numerator) << "\nplant_den = " << fmt_list(plant.denominator) << "\n";
      if (plant.has_unmodeled()) {
        o << "unmodeled_num = " << fmt_list(plant.unmodeled_num) << "\nunmodeled_den = "
          << fmt_list(plant.unmodeled_den) << "\n";
      }
      o << "k_m = " << fmt(model.k_m) << "\nmodel_den = " << fmt_list(model.D_m) << "\nlambda = "
        << fmt_list(filters.lambda) << "\nreference = " << quote(reference) << "\nadapt = "
        << (adapt ? "true" : "false") << "\n";
      break;
    case SystemKind::Rejection:
      o << "delta = " << quote(delta_signal) << "\ntheta = " << fmt(reject_theta) << "\nlambda = " << fmt(lambda)
        << "\nsteady_state = " << (steady_state ? "true" : "false") << "\n";
      break;
  }

  for (const auto& [n, sig] : signals) {
    o << "\n[signal." << n << "]\nkind = " << quote(to_string(sig.kind)) << "\n";
    switch (sig.kind) {
      case SignalSpec::Kind::Constant: o << "value = " << fmt(sig.value) << "\n"; break;
      case SignalSpec::Kind::Sine:
        o << "offset = " << fmt(sig.offset) << "\namplitude = " << fmt(sig.amplitude) << "\nomega = "
          << fmt(sig.omega) << "\nphase = " << fmt(sig.phase) << "\n";
        break;
      case SignalSpec::Kind::ExpSum:
        o << "weights = " << fmt_list(sig.weights) << "\nrates = " << fmt_list(sig.rates) << "\n";
        break;
      case SignalSpec::Kind::Pulse:
        o << "value = " << fmt(sig.value) << "\nt_on = " << fmt(sig.t_on) << "\nt_off = " << fmt(sig.t_off) << "\n";
        break;
      case SignalSpec::Kind::Rational:
        o << "value = " << fmt(sig.value) << "\noffset = " << fmt(sig.offset) << "\n";
        break;
      case SignalSpec::Kind::DampedCos:
        o << "amplitude = " << fmt(sig.amplitude) << "\nrate = " << fmt(sig.rate) << "\nomega = " << fmt(sig.omega)
          << "\nphase = " << fmt(sig.phase) << "\n";
        break;
      case SignalSpec::Kind::Piecewise:
        o << "breaks = " << fmt_list(sig.breaks) << "\nlevels = " << fmt_list(sig.levels) << "\n";
        break;
    }
  }

  o << "\n[disturbance]\nkind = " << quote(to_string(disturbance.kind)) << "\n";
  if (disturbance.kind != Disturbance::Kind::None) {
    o << "amplitude = " << fmt(disturbance.amplitude) << "\nomega = " << fmt(disturbance.omega) << "\nphase = "
      << fmt(disturbance.phase) << "\n";
  }

  o << "\n[estimator]\nkind = " << quote(to_string(estimator)) << "\n";
  if (estimator == EstimatorKind::Dg) {
    o << "lambda = " << fmt(dg.lambda) << "\ng = " << fmt(dg.g) << "\nk = " << fmt(dg.k) << "\nbeta = " << fmt(dg.beta)
      << "\nkappa = " << fmt(dg.kappa) << "\ntheta0 = " << fmt_list(dg.theta0) << "\n";
  } else {
    o << "gamma = " << fmt(gd.gamma) << "\ngamma_g = " << fmt(gd.gamma_g.c) << "\ngamma_g_schedule = "
      << quote(schedule_name(gd.gamma_g.kind)) << "\ngamma_g_b = " << fmt(gd.gamma_g.b) << "\ntheta_g0 = "
      << fmt_list(gd.theta_g0) << "\ntheta0 = " << fmt_list(gd.theta0) << "\n";
    if (estimator == EstimatorKind::Nlpre) o << "map = " << quote(map_name) << "\n";
  }

  o << "\n[output]\ncsv = " << quote(csv) << "\ntraces = " << fmt_strings(traces) << "\n";
  return o.str();
}

}  // namespace gdest
