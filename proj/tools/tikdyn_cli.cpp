// tikdyn: run experiment sweeps, check parameter conditions, fit decay rates.
//
// Exit status: 0 success, 1 usage or runtime error, 2 infeasible parameters,
// 3 a sweep point aborted (partial artifacts are still written).

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tikdyn/tikdyn.h"

namespace {

int ExitFor(tkd_status s) {
  switch (s) {
    case TKD_OK: return 0;
    case TKD_INFEASIBLE: return 2;
    case TKD_ABORTED_RUN: return 3;
    default: return 1;
  }
}

int Report(tkd_status s, tkd_string* report) {
  if (report) {
    std::fputs(tkd_string_data(report), stdout);
    tkd_string_destroy(report);
  }
  if (s != TKD_OK) std::fprintf(stderr, "error (%s): %s\n", tkd_status_name(s), tkd_last_error());
  return ExitFor(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tikhonov-regularized inertial dynamics with Moreau envelope smoothing"};
  app.require_subcommand(1);

  std::size_t workers = 0;
  bool allow_infeasible = false;
  app.add_option("--workers", workers, "Concurrent sweep points (default: config value)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--allow-infeasible", allow_infeasible,
               "Run (l, d) pairs outside the convergence conditions");

  std::string config_path;
  std::string output_dir;
  auto* run = app.add_subcommand("run", "Integrate every sweep point and write CSV artifacts");
  run->add_option("config", config_path, "JSON config")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output-dir", output_dir, "Override the config output directory");

  auto* check = app.add_subcommand("check", "Print the condition report only");
  check->add_option("config", config_path, "JSON config")->required()->check(CLI::ExistingFile);

  std::string csv_path;
  std::string column = "phi_gap";
  std::vector<double> window;
  auto* fit = app.add_subcommand("fit", "Fit a log-log slope to a trajectory column");
  fit->add_option("csv", csv_path, "Trajectory CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--column", column, "Column to fit")->capture_default_str();
  fit->add_option("--window", window, "Fit window a,b (default: last decade)")
      ->delimiter(',')
      ->expected(2);

  CLI11_PARSE(app, argc, argv);

  if (*run) {
    tkd_string* report = nullptr;
    const tkd_status s = tkd_run_config(config_path.c_str(), workers, allow_infeasible ? 1 : 0,
                                        output_dir.empty() ? nullptr : output_dir.c_str(), &report);
    return Report(s, report);
  }
  if (*check) {
    tkd_string* report = nullptr;
    int runnable = 0;
    const tkd_status s = tkd_check_config(config_path.c_str(), &report, &runnable);
    const int code = Report(s, report);
    if (code != 0) return code;
    if (!runnable && !allow_infeasible) {
      std::fprintf(stderr, "some sweep points violate the convergence conditions\n");
      return 2;
    }
    return 0;
  }
  tkd_rate_fit out{};
  const double lo = window.empty() ? 0.0 : window[0];
  const double hi = window.empty() ? 0.0 : window[1];
  const tkd_status s = tkd_fit_csv(csv_path.c_str(), column.c_str(), lo, hi, &out);
  if (s != TKD_OK) return Report(s, nullptr);
  std::printf("column %s window [%.6g, %.6g] samples %zu\n", column.c_str(), out.t_lo, out.t_hi,
              out.samples);
  std::printf("slope %.6f intercept %.6f r2 %.6f\n", out.slope, out.intercept, out.r_squared);
  return 0;
}
