#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tikdyn/dynamics.hpp"
#include "tikdyn/objective.hpp"
#include "tikdyn/schedule.hpp"

namespace tikdyn {

// One (l, d) pair of a sweep. An empty d means the run without the Tikhonov
// term (damping still follows eps = t^-damping_d).
struct SweepPoint {
  double l = 0.0;
  std::optional<double> d;

  std::string tag() const;  // e.g. "l1_d1.9", "l1_dnone"
  bool feasible() const;    // polynomial feasibility; always true for the no-Tikhonov run
};

struct LyapunovOverrides {
  std::optional<double> gamma;
  std::optional<double> a;
  std::optional<double> c;
  std::optional<double> t1;
};

// JSON keys mirror the field names; "x0"/"v0" accept a number (broadcast
// to every coordinate) or an array, "sweep" holds "l" and "d" lists where
// a d entry of "none" removes the Tikhonov term.
struct RunConfig {
  std::string name = "run";
  std::string objective = "abs_quad";
  std::size_t dimension = 1;
  double alpha = 10.0;
  double beta = 1.0;
  double t0 = 1.0;
  double horizon = 1000.0;
  double step = 1e-3;
  std::size_t stride = 100;
  std::vector<double> x0{10.0};
  std::vector<double> v0{0.0};
  std::vector<double> sweep_l;
  std::vector<std::optional<double>> sweep_d;
  double damping_d = 1.5;
  LyapunovOverrides lyapunov;
  std::string output_dir = "out";
  bool allow_infeasible = false;
  std::size_t workers = 1;
  std::string plot_series = "moreau_value";

  std::vector<SweepPoint> Points() const;  // l-major cartesian product
  SolverConfig Solver() const;             // throws kConfig on a bad x0/v0 length
  ParamSchedule Schedule(const SweepPoint& p) const;
};

// Throws kConfig on malformed input or unknown keys, kIo if unreadable.
RunConfig ParseRunConfig(const std::string& json_text);
RunConfig LoadRunConfig(const std::string& path);

// Lyapunov constants for one sweep point: overrides first, then the
// defaults; t1 is the override, else the detected activation time, else t0.
struct ResolvedLyapunov {
  LyapunovParams params;
  std::string t1_source;  // "config", "detected", "t0 (assumptions not verified)"
  bool verified = false;
};
ResolvedLyapunov ResolveLyapunov(const RunConfig& config, const ParamSchedule& schedule);

// Condition report for every sweep point (the `check` command).
struct PreflightResult {
  std::string text;
  bool all_feasible = true;
};
PreflightResult Preflight(const RunConfig& config);

struct PointResult {
  SweepPoint point;
  std::string status = "pending";  // "ok", "aborted", "failed"
  std::string error;
  std::vector<std::string> warnings;
  std::size_t samples = 0;
  double final_phi_gap = 0.0;
  double final_norm_x = 0.0;
  std::optional<double> fitted_slope;
  bool fit_truncated = false;
  std::optional<double> predicted_slope;
  std::optional<bool> cr_bounds_hold;     // nullopt without the Tikhonov term
  std::optional<double> residual_fraction;
  std::optional<bool> energy_bound_holds;
  std::string t1_source;
  std::string trajectory_csv;
  std::string diagnostics_csv;
  std::string plot_data;
};

struct SweepResult {
  std::vector<PointResult> points;
  std::string summary_csv;
  bool any_aborted() const;
  bool any_failed() const;
};

struct RunOptions {
  std::optional<std::size_t> workers;
  bool allow_infeasible = false;  // ORed with the config flag
  std::optional<std::string> output_dir;
};

// Integrates every sweep point (concurrently up to the worker count) and
// writes traj_<tag>.csv, diag_<tag>.csv, plot_<tag>.dat and summary.csv
// into the output directory. Throws kInfeasible before any work when an
// infeasible pair is swept without the flag. Per-point aborts are recorded
// in the result, not thrown.
SweepResult RunSweep(const RunConfig& config, const RunOptions& options, std::ostream& log);

// One row per sweep point.
std::string SweepSummary(const std::vector<PointResult>& results);

}  // namespace tikdyn
