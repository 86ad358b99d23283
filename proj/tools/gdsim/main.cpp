#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "gdest/errors.hpp"
#include "gdest/excitation.hpp"
#include "gdest/harness.hpp"
#include "gdest/scenario.hpp"
#include "trace_csv.hpp"

namespace {

enum Exit : int { kOk = 0, kValidation = 2, kDiverged = 3, kIo = 4 };

struct Overrides {
  std::optional<double> h;
  std::optional<double> t_end;
  std::string out_dir = ".";
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->set_help_flag("--help", "Print this help message and exit");
  cmd->add_option("--h", o.h, "Override the step size");
  cmd->add_option("--t-end", o.t_end, "Override the horizon");
  cmd->add_option("--out-dir", o.out_dir, "Directory for CSV and plot scripts");
}

gdest::RunOptions to_options(const Overrides& o) {
  gdest::RunOptions opt;
  opt.h = o.h;
  opt.t_end = o.t_end;
  opt.out_dir = o.out_dir;
  return opt;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

int cmd_run(const std::string& file, const Overrides& o, bool echo) {
  const gdest::Scenario s = gdest::load_scenario(file);
  if (echo) std::cout << s.echo() << "\n";
  const auto report = gdest::run_scenario(s, to_options(o));
  std::cout << gdest::format_report(report);
  return report.diverged ? kDiverged : kOk;
}

int cmd_compare(const std::string& dir, const std::string& against, const Overrides& o, unsigned threads) {
  const auto opt = to_options(o);
  const auto runs = gdest::run_directory(dir, opt, threads);
  bool diverged = false;
  std::string csv = "family,name,sweep_value,convergence_time,final_error,tail_max_error,diverged\n";
  for (const auto& fam : gdest::summarize_families(runs)) {
    std::cout << fam.text() << "\n";
    csv += fam.csv();
  }
  for (const auto& r : runs) diverged = diverged || r.diverged;
  std::filesystem::create_directories(opt.out_dir);
  write_text(opt.out_dir / "summary.csv", csv);

  if (!against.empty()) {
    gdest::RunOptions other = opt;
    other.out_dir = opt.out_dir / "against";
    const auto runs_b = gdest::run_directory(against, other, threads);
    const auto table = gdest::compare_runs(runs, runs_b);
    std::cout << table.text();
    write_text(opt.out_dir / "comparison.csv", table.csv());
  }
  return diverged ? kDiverged : kOk;
}

int cmd_check_excitation(const std::string& file, const std::string& prefix, std::optional<double> threshold,
                         double tol) {
  const auto table = gdsim::read_csv(file);
  const auto trace = gdsim::regressor_from_csv(table, prefix);
  const int q = trace.dimension();
  const double thr = threshold.value_or(gdest::default_ie_threshold(q));
  const auto ie = gdest::check_ie(trace, thr);
  const auto id = gdest::check_identifiability(trace, tol);
  const bool dt = trace.mode == gdest::TimeMode::Discrete;

  std::printf("dimension        %d\n", q);
  std::printf("samples          %zu\n", trace.samples.size());
  std::printf("IE               %s (threshold %.6g)\n", ie.excited ? "yes" : "no", thr);
  std::printf("lambda_min       %.6g\n", ie.level);
  if (ie.excited) std::printf("%s  %.6g\n", dt ? "k_d            " : "t_c            ", ie.horizon);
  std::printf("max |phi|^2      %.6g\n", ie.phi_max_sq);
  std::printf("identifiable     %s\n", id.identifiable ? "yes" : "no");
  if (id.identifiable) {
    std::printf("instants        ");
    for (auto i : id.indices) std::printf(" %.6g", trace.grid.time(i));
    std::printf("\n");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gdsim: scenario runner for interlaced parameter estimators"};
  app.require_subcommand(1);

  Overrides run_o;
  std::string run_file;
  bool echo = false;
  auto* run = app.add_subcommand("run", "Run one scenario file");
  run->add_option("scenario", run_file, "Scenario file")->required();
  run->add_flag("--echo", echo, "Print the resolved scenario first");
  add_overrides(run, run_o);

  Overrides cmp_o;
  std::string cmp_dir, against;
  unsigned threads = 0;
  auto* cmp = app.add_subcommand("compare", "Run every scenario in a directory and summarize by family");
  cmp->add_option("dir", cmp_dir, "Directory of *.toml scenarios")->required();
  cmp->add_option("--against", against, "Second directory; pairs runs by name");
  cmp->add_option("--threads", threads, "Worker threads (0 = hardware)");
  add_overrides(cmp, cmp_o);

  std::string csv_file, prefix;
  std::optional<double> threshold;
  double tol = 1e-8;
  auto* chk = app.add_subcommand("check-excitation", "Excitation diagnostics for a regressor trace");
  chk->add_option("trace", csv_file, "CSV with a time column first")->required();
  chk->add_option("--columns", prefix, "Use columns whose names start with this prefix");
  chk->add_option("--threshold", threshold, "IE level on lambda_min of the Gramian");
  chk->add_option("--tol", tol, "Rank tolerance for identifiability");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*run) return cmd_run(run_file, run_o, echo);
    if (*cmp) return cmd_compare(cmp_dir, against, cmp_o, threads);
    return cmd_check_excitation(csv_file, prefix, threshold, tol);
  } catch (const gdest::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kValidation;
  } catch (const gdest::ValidationError& e) {
    std::cerr << "invalid: " << e.what() << "\n";
    return kValidation;
  } catch (const gdest::DimensionError& e) {
    std::cerr << "invalid: " << e.what() << "\n";
    return kValidation;
  } catch (const gdest::DomainError& e) {
    std::cerr << "invalid: " << e.what() << "\n";
    return kValidation;
  } catch (const gdest::NumericOverflow& e) {
    std::cerr << "diverged: " << e.what() << "\n";
    return kDiverged;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "i/o: " << e.what() << "\n";
    return kIo;
  }
}
