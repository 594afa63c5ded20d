#include "tikdyn/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "json.hpp"
#include "tikdyn/diagnostics.hpp"

namespace tikdyn {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string Num(double v) { return fmt::format("{:.6g}", v); }
std::string Opt(const std::optional<double>& v) { return v ? Num(*v) : "na"; }

std::vector<double> VectorField(const json& j, const char* key) {
  if (j.is_number()) return {j.get<double>()};
  if (j.is_array()) {
    std::vector<double> out;
    for (const auto& e : j) {
      if (!e.is_number()) Throw(ErrorCode::kConfig, fmt::format("'{}' must hold numbers", key));
      out.push_back(e.get<double>());
    }
    return out;
  }
  Throw(ErrorCode::kConfig, fmt::format("'{}' must be a number or an array", key));
}

template <typename T>
T Get(const json& j, const char* key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    Throw(ErrorCode::kConfig, fmt::format("'{}' has the wrong type", key));
  }
}

Vector Expand(const std::vector<double>& v, std::size_t n, const char* what) {
  if (v.size() == 1) return Vector::Constant(static_cast<Eigen::Index>(n), v.front());
  if (v.size() != n) {
    Throw(ErrorCode::kConfig, fmt::format("'{}' has {} entries; dimension is {}", what, v.size(), n));
  }
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(n));
}

void WritePlotData(const std::string& path, const Trajectory& traj, const std::string& series) {
  const auto t = traj.Column("t");
  const auto v = traj.Column(series);
  std::ofstream os(path);
  if (!os) Throw(ErrorCode::kIo, "cannot open " + path + " for writing");
  fmt::print(os, "# t {}\n", series);
  for (std::size_t i = 0; i < t.size(); ++i) fmt::print(os, "{:.17g} {:.17g}\n", t[i], v[i]);
  if (!os) Throw(ErrorCode::kIo, "write failed for " + path);
}

PointResult RunPoint(const RunConfig& config, const SweepPoint& point, const fs::path& dir) {
  PointResult r;
  r.point = point;
  const std::string tag = point.tag();
  const ObjectivePtr f = MakeObjective(config.objective, config.dimension);
  const ParamSchedule schedule = config.Schedule(point);
  const SolverConfig solver = config.Solver();

  Trajectory traj;
  try {
    traj = Integrate(solver, *f, schedule);
    r.status = "ok";
  } catch (const AbortedRunError& e) {
    traj = e.partial();
    r.status = "aborted";
    r.error = e.what();
  } catch (const Error& e) {
    r.status = "failed";
    r.error = e.what();
    return r;
  }
  r.warnings = traj.warnings();
  r.samples = traj.size();
  r.trajectory_csv = "traj_" + tag + ".csv";
  traj.WriteCsv((dir / r.trajectory_csv).string());
  r.plot_data = "plot_" + tag + ".dat";
  WritePlotData((dir / r.plot_data).string(), traj, config.plot_series);
  if (!traj.empty()) {
    r.final_phi_gap = traj.back().phi_gap;
    r.final_norm_x = traj.back().norm_x;
  }
  if (r.status != "ok") return r;

  const auto t = traj.Column("t");
  try {
    const RateFit fit = FitRatePositivePrefix(t, traj.Column("phi_gap"), config.horizon / 10.0,
                                              config.horizon);
    r.fitted_slope = fit.slope;
    r.fit_truncated = fit.truncated;
  } catch (const Error& e) {
    r.warnings.push_back(fmt::format("no rate fit: {}", e.what()));
  }
  if (schedule.tikhonov_off()) return r;

  const ResolvedLyapunov lyap = ResolveLyapunov(config, schedule);
  r.t1_source = lyap.t1_source;
  if (point.feasible()) {
    r.predicted_slope =
        PredictedSlope(RateSeries::kPhiGap, schedule, config.alpha, lyap.params.gamma);
  }
  std::vector<double> energies;
  energies.reserve(traj.size());
  for (const auto& rec : traj.records()) {
    energies.push_back(Energy(rec, *f, schedule, solver, lyap.params));
  }
  r.cr_bounds_hold = CheckCrBounds(traj, energies, schedule, *f).all_hold();
  try {
    const ResidualReport res = LyapunovResidual(traj, *f, schedule, solver, lyap.params);
    r.residual_fraction = res.fraction();
    r.energy_bound_holds = IntegratedBounds(res, *f, solver).energy_holds;
    r.diagnostics_csv = "diag_" + tag + ".csv";
    WriteDiagnosticsCsv((dir / r.diagnostics_csv).string(), res);
  } catch (const Error& e) {
    r.warnings.push_back(fmt::format("no energy diagnostics: {}", e.what()));
  }
  return r;
}

}  // namespace

std::string SweepPoint::tag() const {
  return d ? fmt::format("l{:g}_d{:g}", l, *d) : fmt::format("l{:g}_dnone", l);
}

bool SweepPoint::feasible() const { return !d || PolynomialFeasible(l, *d); }

std::vector<SweepPoint> RunConfig::Points() const {
  std::vector<SweepPoint> out;
  for (double l : sweep_l) {
    for (const auto& d : sweep_d) out.push_back({l, d});
  }
  return out;
}

SolverConfig RunConfig::Solver() const {
  SolverConfig c;
  c.alpha = alpha;
  c.beta = beta;
  c.t0 = t0;
  c.horizon = horizon;
  c.step = step;
  c.stride = stride;
  c.x0 = Expand(x0, dimension, "x0");
  c.v0 = Expand(v0, dimension, "v0");
  return c;
}

ParamSchedule RunConfig::Schedule(const SweepPoint& p) const {
  if (p.d) return ParamSchedule::Polynomial(p.l, *p.d);
  return MakeNamedSchedule("no_tikhonov", p.l, damping_d);
}

RunConfig ParseRunConfig(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    Throw(ErrorCode::kConfig, fmt::format("config is not valid JSON: {}", e.what()));
  }
  if (!j.is_object()) Throw(ErrorCode::kConfig, "config must be a JSON object");
  static const std::set<std::string> kKeys{
      "name",  "objective", "dimension", "alpha",     "beta",       "t0",
      "horizon", "step",    "stride",    "x0",        "v0",         "sweep",
      "damping_d", "lyapunov", "output_dir", "allow_infeasible", "workers", "plot_series"};
  for (const auto& [key, value] : j.items()) {
    if (!kKeys.count(key)) Throw(ErrorCode::kConfig, fmt::format("unknown config key '{}'", key));
  }
  RunConfig c;
  if (j.contains("name")) c.name = Get<std::string>(j["name"], "name");
  if (j.contains("objective")) c.objective = Get<std::string>(j["objective"], "objective");
  if (j.contains("dimension")) {
    const auto n = Get<long>(j["dimension"], "dimension");
    if (n <= 0) Throw(ErrorCode::kConfig, "'dimension' must be positive");
    c.dimension = static_cast<std::size_t>(n);
  }
  for (auto [key, field] : {std::pair{"alpha", &c.alpha}, std::pair{"beta", &c.beta},
                            std::pair{"t0", &c.t0}, std::pair{"horizon", &c.horizon},
                            std::pair{"step", &c.step}, std::pair{"damping_d", &c.damping_d}}) {
    if (j.contains(key)) *field = Get<double>(j[key], key);
  }
  if (j.contains("stride")) {
    const auto s = Get<long>(j["stride"], "stride");
    if (s <= 0) Throw(ErrorCode::kConfig, "'stride' must be positive");
    c.stride = static_cast<std::size_t>(s);
  }
  if (j.contains("workers")) {
    const auto w = Get<long>(j["workers"], "workers");
    if (w <= 0) Throw(ErrorCode::kConfig, "'workers' must be positive");
    c.workers = static_cast<std::size_t>(w);
  }
  if (j.contains("x0")) c.x0 = VectorField(j["x0"], "x0");
  if (j.contains("v0")) c.v0 = VectorField(j["v0"], "v0");
  if (j.contains("output_dir")) c.output_dir = Get<std::string>(j["output_dir"], "output_dir");
  if (j.contains("allow_infeasible")) {
    c.allow_infeasible = Get<bool>(j["allow_infeasible"], "allow_infeasible");
  }
  if (j.contains("plot_series")) c.plot_series = Get<std::string>(j["plot_series"], "plot_series");
  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    if (!s.is_object()) Throw(ErrorCode::kConfig, "'sweep' must be an object with 'l' and 'd'");
    for (const auto& [key, value] : s.items()) {
      if (key != "l" && key != "d") Throw(ErrorCode::kConfig, "unknown sweep key '" + key + "'");
    }
    if (s.contains("l")) {
      if (!s["l"].is_array()) Throw(ErrorCode::kConfig, "'sweep.l' must be an array");
      c.sweep_l = VectorField(s["l"], "sweep.l");
    }
    if (s.contains("d")) {
      if (!s["d"].is_array()) Throw(ErrorCode::kConfig, "'sweep.d' must be an array");
      for (const auto& e : s["d"]) {
        if (e.is_number()) {
          c.sweep_d.emplace_back(e.get<double>());
        } else if (e.is_string() && e.get<std::string>() == "none") {
          c.sweep_d.emplace_back(std::nullopt);
        } else {
          Throw(ErrorCode::kConfig, "'sweep.d' entries must be numbers or \"none\"");
        }
      }
    }
  }
  if (j.contains("lyapunov")) {
    const json& l = j["lyapunov"];
    if (!l.is_object()) Throw(ErrorCode::kConfig, "'lyapunov' must be an object");
    for (const auto& [key, value] : l.items()) {
      std::optional<double>* slot = key == "gamma" ? &c.lyapunov.gamma
                                    : key == "a"   ? &c.lyapunov.a
                                    : key == "c"   ? &c.lyapunov.c
                                    : key == "t1"  ? &c.lyapunov.t1
                                                   : nullptr;
      if (!slot) Throw(ErrorCode::kConfig, "unknown lyapunov key '" + key + "'");
      *slot = Get<double>(value, key.c_str());
    }
  }
  // Fail early on everything that does not need a run.
  MakeObjective(c.objective, c.dimension);
  try {
    c.Solver().Validate();
  } catch (const Error& e) {
    Throw(ErrorCode::kConfig, e.what());
  }
  const auto names = Trajectory::ColumnNames(c.dimension);
  if (std::find(names.begin(), names.end(), c.plot_series) == names.end()) {
    Throw(ErrorCode::kConfig, fmt::format("'plot_series' {} is not a trajectory column",
                                          c.plot_series));
  }
  for (const auto& p : c.Points()) {
    if (p.l < 0.0 || (p.d && !(*p.d > 0.0))) {
      Throw(ErrorCode::kConfig, fmt::format("sweep point {} needs l >= 0 and d > 0", p.tag()));
    }
  }
  return c;
}

RunConfig LoadRunConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) Throw(ErrorCode::kIo, "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseRunConfig(ss.str());
}

ResolvedLyapunov ResolveLyapunov(const RunConfig& config, const ParamSchedule& schedule) {
  ResolvedLyapunov out;
  LyapunovParams p = config.lyapunov.gamma
                         ? LyapunovParamsForGamma(config.alpha, *config.lyapunov.gamma, config.t0)
                         : DefaultLyapunovParams(config.alpha, config.t0);
  if (config.lyapunov.a) p.a = *config.lyapunov.a;
  if (config.lyapunov.c) p.c = *config.lyapunov.c;
  ValidateLyapunovParams(p, config.alpha);
  if (config.lyapunov.t1) {
    p.t1 = *config.lyapunov.t1;
    Require(p.t1 >= config.t0 && p.t1 < config.horizon, ErrorCode::kConfig,
            "lyapunov.t1 must lie in [t0, horizon)");
    out.t1_source = "config";
    out.verified = CheckAssumptions(schedule, config.alpha, config.beta, p, p.t1).all_hold();
  } else if (auto t1 = schedule.tikhonov_off()
                           ? std::nullopt
                           : DetectActivationTime(schedule, config.alpha, config.beta, p,
                                                  config.t0, config.horizon)) {
    p.t1 = *t1;
    out.t1_source = "detected";
    out.verified = true;
  } else {
    p.t1 = config.t0;
    out.t1_source = "t0 (assumptions not verified)";
  }
  out.params = p;
  return out;
}

PreflightResult Preflight(const RunConfig& config) {
  PreflightResult out;
  std::string& s = out.text;
  const GammaRange range = GammaFeasibleRange(config.alpha);
  s += fmt::format("config '{}': objective {} (n={}), alpha={:g}, beta={:g}, t0={:g}, horizon={:g}, "
                   "step={:g}\n",
                   config.name, config.objective, config.dimension, config.alpha, config.beta,
                   config.t0, config.horizon, config.step);
  s += fmt::format("gamma range: {}{:.6g}, {:.6g})\n", range.lo_inclusive ? "[" : "(", range.lo,
                   range.hi);
  const auto points = config.Points();
  if (points.empty()) s += "empty sweep\n";
  for (const auto& p : points) {
    const ParamSchedule schedule = config.Schedule(p);
    s += fmt::format("[{}] {}\n", p.tag(), schedule.name());
    if (!p.d) {
      s += fmt::format("  Tikhonov term off; damping uses eps = t^-{:g}\n", config.damping_d);
      continue;
    }
    const bool feasible = p.feasible();
    if (!feasible) out.all_feasible = false;
    s += fmt::format("  polynomial feasible (1 <= d <= 2, 0 <= l < d): {}\n",
                     feasible ? "yes" : "NO");
    const ConditionResult prod = CheckProductVanishes(schedule, config.horizon, config.t0);
    s += fmt::format("  lambda*eps -> 0: {} ({})\n", prod.holds ? "yes" : "no", prod.witness);
    const ResolvedLyapunov lyap = ResolveLyapunov(config, schedule);
    const CondSetReport limits =
        CheckCondSets(schedule, config.alpha, lyap.params.gamma, config.horizon, config.t0);
    for (const auto& lim : limits.limits) {
      s += fmt::format("  {:<50} {} ({})\n", lim.expression, lim.holds ? "yes" : "no", lim.detail);
    }
    s += fmt::format("  gamma={:.6g} a={:.6g} c={:.6g} t1={:g} [{}]\n", lyap.params.gamma,
                     lyap.params.a, lyap.params.c, lyap.params.t1, lyap.t1_source);
    const AssumptionReport rep =
        CheckAssumptions(schedule, config.alpha, config.beta, lyap.params, config.horizon);
    static const char* kLabels[4] = {"(ii)", "(iii)", "(iv)", "(v)"};
    s += fmt::format("  assumptions at t={:g}:", config.horizon);
    for (std::size_t i = 0; i < 4; ++i) {
      s += fmt::format(" {} {} (margin {:.3g})", kLabels[i],
                       rep.conditions[i].holds ? "ok" : "fails", rep.conditions[i].margin);
    }
    s += "\n";
  }
  return out;
}

bool SweepResult::any_aborted() const {
  return std::any_of(points.begin(), points.end(),
                     [](const PointResult& p) { return p.status == "aborted"; });
}

bool SweepResult::any_failed() const {
  return std::any_of(points.begin(), points.end(),
                     [](const PointResult& p) { return p.status == "failed"; });
}

std::string SweepSummary(const std::vector<PointResult>& results) {
  std::string out =
      "tag,l,d,feasible,status,final_phi_gap,fitted_slope,predicted_slope,cr_bounds,"
      "residual_fraction,energy_bound,final_norm_x,trajectory_csv,diagnostics_csv,plot_data\n";
  auto flag = [](const std::optional<bool>& b) -> std::string {
    return b ? (*b ? "pass" : "fail") : "na";
  };
  for (const auto& r : results) {
    out += fmt::format("{},{:g},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.point.tag(), r.point.l,
                       r.point.d ? fmt::format("{:g}", *r.point.d) : "none",
                       r.point.feasible() ? "yes" : "no", r.status, Num(r.final_phi_gap),
                       Opt(r.fitted_slope), Opt(r.predicted_slope), flag(r.cr_bounds_hold),
                       Opt(r.residual_fraction), flag(r.energy_bound_holds), Num(r.final_norm_x),
                       r.trajectory_csv, r.diagnostics_csv, r.plot_data);
  }
  return out;
}

SweepResult RunSweep(const RunConfig& config, const RunOptions& options, std::ostream& log) {
  const auto points = config.Points();
  const bool allow = options.allow_infeasible || config.allow_infeasible;
  std::vector<std::string> bad;
  for (const auto& p : points) {
    if (!p.feasible()) bad.push_back(p.tag());
  }
  if (!bad.empty() && !allow) {
    Throw(ErrorCode::kInfeasible,
          fmt::format("sweep points {} violate 1 <= d <= 2, 0 <= l < d; the convergence theory "
                      "does not cover them. Set allow_infeasible or pass --allow-infeasible to "
                      "run them anyway",
                      fmt::join(bad, ", ")));
  }
  const fs::path dir = options.output_dir.value_or(config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) Throw(ErrorCode::kIo, fmt::format("cannot create {}: {}", dir.string(), ec.message()));

  SweepResult result;
  result.points.resize(points.size());
  const std::size_t workers =
      std::max<std::size_t>(1, std::min(options.workers.value_or(config.workers), points.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        result.points[i] = RunPoint(config, points[i], dir);
      } catch (const std::exception& e) {
        result.points[i].point = points[i];
        result.points[i].status = "failed";
        result.points[i].error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  for (const auto& r : result.points) {
    fmt::print(log, "[{}] {}: samples={} final phi_gap={} final |x|={}", r.point.tag(), r.status,
               r.samples, Num(r.final_phi_gap), Num(r.final_norm_x));
    if (r.fitted_slope) {
      fmt::print(log, " slope={}{}", Num(*r.fitted_slope), r.fit_truncated ? " (truncated)" : "");
    }
    if (r.predicted_slope) fmt::print(log, " predicted={}", Num(*r.predicted_slope));
    if (r.cr_bounds_hold) fmt::print(log, " bounds={}", *r.cr_bounds_hold ? "pass" : "FAIL");
    if (r.residual_fraction) fmt::print(log, " residual_ok={:.4f}", *r.residual_fraction);
    if (!r.t1_source.empty()) fmt::print(log, " t1={}", r.t1_source);
    fmt::print(log, "\n");
    for (const auto& w : r.warnings) fmt::print(log, "  warning: {}\n", w);
    if (!r.error.empty()) fmt::print(log, "  error: {}\n", r.error);
  }
  result.summary_csv = (dir / "summary.csv").string();
  std::ofstream os(result.summary_csv);
  if (!os) Throw(ErrorCode::kIo, "cannot write " + result.summary_csv);
  os << SweepSummary(result.points);
  fmt::print(log, "summary: {}\n", result.summary_csv);
  return result;
}

}  // namespace tikdyn
