#include "tikdyn/tikdyn.h"

#include <exception>
#include <new>
#include <sstream>
#include <string>

#include "tikdyn/csv.hpp"
#include "tikdyn/diagnostics.hpp"
#include "tikdyn/dynamics.hpp"
#include "tikdyn/experiment.hpp"
#include "tikdyn/prox.hpp"
#include "tikdyn/tikhonov.hpp"

struct tkd_objective {
  tikdyn::ObjectivePtr f;
};
struct tkd_schedule {
  tikdyn::ParamSchedule s;
};
struct tkd_trajectory {
  tikdyn::Trajectory traj;
};
struct tkd_string {
  std::string text;
};

namespace {

thread_local std::string g_last_error;

tkd_status FromCode(tikdyn::ErrorCode c) {
  using tikdyn::ErrorCode;
  switch (c) {
    case ErrorCode::kInvalidParameter: return TKD_INVALID_PARAMETER;
    case ErrorCode::kUnsupportedObjective: return TKD_UNSUPPORTED_OBJECTIVE;
    case ErrorCode::kWrongBranch: return TKD_WRONG_BRANCH;
    case ErrorCode::kPrecondition: return TKD_PRECONDITION;
    case ErrorCode::kAbortedRun: return TKD_ABORTED_RUN;
    case ErrorCode::kInsufficientData: return TKD_INSUFFICIENT_DATA;
    case ErrorCode::kDomain: return TKD_DOMAIN;
    case ErrorCode::kIo: return TKD_IO;
    case ErrorCode::kConfig: return TKD_CONFIG;
    case ErrorCode::kInfeasible: return TKD_INFEASIBLE;
  }
  return TKD_INTERNAL;
}

tkd_status Fail(tkd_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

template <typename Fn>
tkd_status Guard(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const tikdyn::Error& e) {
    return Fail(FromCode(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return Fail(TKD_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return Fail(TKD_INTERNAL, e.what());
  }
}

#define TKD_REQUIRE(p) \
  if (!(p)) return Fail(TKD_NULL_ARGUMENT, "null argument: " #p)

tikdyn::Vector In(const tkd_objective* f, const double* x) {
  return Eigen::Map<const tikdyn::Vector>(x, static_cast<Eigen::Index>(f->f->dimension()));
}

void Out(const tikdyn::Vector& v, double* out) {
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v[i];
}

void FillFit(const tikdyn::RateFit& fit, tkd_rate_fit* out) {
  out->t_lo = fit.t_lo;
  out->t_hi = fit.t_hi;
  out->slope = fit.slope;
  out->intercept = fit.intercept;
  out->r_squared = fit.r_squared;
  out->samples = fit.samples;
}

}  // namespace

extern "C" {

const char* tkd_last_error(void) { return g_last_error.c_str(); }

const char* tkd_status_name(tkd_status status) {
  switch (status) {
    case TKD_OK: return "ok";
    case TKD_INVALID_PARAMETER: return "invalid parameter";
    case TKD_UNSUPPORTED_OBJECTIVE: return "unsupported objective";
    case TKD_WRONG_BRANCH: return "wrong branch";
    case TKD_PRECONDITION: return "precondition violated";
    case TKD_ABORTED_RUN: return "aborted run";
    case TKD_INSUFFICIENT_DATA: return "insufficient data";
    case TKD_DOMAIN: return "domain error";
    case TKD_IO: return "i/o error";
    case TKD_CONFIG: return "config error";
    case TKD_INFEASIBLE: return "infeasible parameters";
    case TKD_NULL_ARGUMENT: return "null argument";
    case TKD_INTERNAL: return "internal error";
  }
  return "unknown status";
}

tkd_status tkd_objective_create(const char* name, size_t dimension, tkd_objective** out) {
  TKD_REQUIRE(name);
  TKD_REQUIRE(out);
  return Guard([&] {
    *out = new tkd_objective{tikdyn::MakeObjective(name, dimension)};
    return TKD_OK;
  });
}

void tkd_objective_destroy(tkd_objective* f) { delete f; }

tkd_status tkd_objective_dimension(const tkd_objective* f, size_t* out) {
  TKD_REQUIRE(f);
  TKD_REQUIRE(out);
  *out = f->f->dimension();
  return TKD_OK;
}

tkd_status tkd_objective_value(const tkd_objective* f, const double* x, double* out) {
  TKD_REQUIRE(f);
  TKD_REQUIRE(x);
  TKD_REQUIRE(out);
  return Guard([&] {
    *out = f->f->Value(In(f, x));
    return TKD_OK;
  });
}

tkd_status tkd_objective_minimal_norm_point(const tkd_objective* f, double* out) {
  TKD_REQUIRE(f);
  TKD_REQUIRE(out);
  Out(f->f->MinimalNormPoint(), out);
  return TKD_OK;
}

tkd_status tkd_prox(const tkd_objective* f, double s, const double* x, double* out) {
  TKD_REQUIRE(f);
  TKD_REQUIRE(x);
  TKD_REQUIRE(out);
  return Guard([&] {
    Out(tikdyn::Prox(*f->f, s, In(f, x)), out);
    return TKD_OK;
  });
}

tkd_status tkd_numeric_prox(const tkd_objective* f, double s, const double* x, double* out) {
  TKD_REQUIRE(f);
  TKD_REQUIRE(x);
  TKD_REQUIRE(out);
  return Guard([&] {
    Out(tikdyn::NumericProxOracle(*f->f, s, In(f, x)), out);
    return TKD_OK;
  });
}

tkd_status tkd_moreau_value(const tkd_objective* f, double lambda, const double* x, double* out) {
  TKD_REQUIRE(f);
  TKD_REQUIRE(x);
  TKD_REQUIRE(out);
  return Guard([&] {
    *out = tikdyn::MoreauValue(*f->f, lambda, In(f, x));
    return TKD_OK;
  });
}

tkd_status tkd_moreau_grad(const tkd_objective* f, double lambda, const double* x, double* out) {
  TKD_REQUIRE(f);
  TKD_REQUIRE(x);
  TKD_REQUIRE(out);
  return Guard([&] {
    Out(tikdyn::MoreauGrad(*f->f, lambda, In(f, x)), out);
    return TKD_OK;
  });
}

tkd_status tkd_regularized_min(const tkd_objective* f, double epsilon, double lambda,
                               double* point, double* reg_value) {
  TKD_REQUIRE(f);
  return Guard([&] {
    const auto r = tikdyn::RegularizedMin(*f->f, epsilon, lambda);
    if (point) Out(r.point, point);
    if (reg_value) *reg_value = r.reg_value;
    return TKD_OK;
  });
}

tkd_status tkd_schedule_polynomial(double l, double d, tkd_schedule** out) {
  TKD_REQUIRE(out);
  return Guard([&] {
    *out = new tkd_schedule{tikdyn::ParamSchedule::Polynomial(l, d)};
    return TKD_OK;
  });
}

tkd_status tkd_schedule_named(const char* name, double l, double d, tkd_schedule** out) {
  TKD_REQUIRE(name);
  TKD_REQUIRE(out);
  return Guard([&] {
    *out = new tkd_schedule{tikdyn::MakeNamedSchedule(name, l, d)};
    return TKD_OK;
  });
}

void tkd_schedule_destroy(tkd_schedule* s) { delete s; }

tkd_status tkd_schedule_eval(const tkd_schedule* s, double t, double* lambda, double* lambda_dot,
                             double* eps, double* eps_dot) {
  TKD_REQUIRE(s);
  return Guard([&] {
    if (lambda) *lambda = s->s.lambda(t);
    if (lambda_dot) *lambda_dot = s->s.lambda_dot(t);
    if (eps) *eps = s->s.eps(t);
    if (eps_dot) *eps_dot = s->s.eps_dot(t);
    return TKD_OK;
  });
}

int tkd_polynomial_feasible(double l, double d) { return tikdyn::PolynomialFeasible(l, d) ? 1 : 0; }

tkd_status tkd_gamma_feasible_range(double alpha, double* lo, double* hi, int* lo_inclusive) {
  TKD_REQUIRE(lo);
  TKD_REQUIRE(hi);
  return Guard([&] {
    const auto r = tikdyn::GammaFeasibleRange(alpha);
    *lo = r.lo;
    *hi = r.hi;
    if (lo_inclusive) *lo_inclusive = r.lo_inclusive ? 1 : 0;
    return TKD_OK;
  });
}

tkd_solver_params tkd_solver_defaults(void) {
  const tikdyn::SolverConfig c;
  return tkd_solver_params{c.alpha, c.beta, c.t0, c.horizon, c.step, c.stride};
}

tkd_status tkd_integrate(const tkd_solver_params* params, const tkd_objective* f,
                         const tkd_schedule* s, const double* x0, const double* v0,
                         tkd_trajectory** out) {
  TKD_REQUIRE(params);
  TKD_REQUIRE(f);
  TKD_REQUIRE(s);
  TKD_REQUIRE(x0);
  TKD_REQUIRE(v0);
  TKD_REQUIRE(out);
  *out = nullptr;
  return Guard([&] {
    tikdyn::SolverConfig c;
    c.alpha = params->alpha;
    c.beta = params->beta;
    c.t0 = params->t0;
    c.horizon = params->horizon;
    c.step = params->step;
    c.stride = params->stride;
    c.x0 = In(f, x0);
    c.v0 = In(f, v0);
    try {
      *out = new tkd_trajectory{tikdyn::Integrate(c, *f->f, s->s)};
    } catch (const tikdyn::AbortedRunError& e) {
      *out = new tkd_trajectory{e.partial()};
      return Fail(TKD_ABORTED_RUN, e.what());
    }
    return TKD_OK;
  });
}

void tkd_trajectory_destroy(tkd_trajectory* traj) { delete traj; }

tkd_status tkd_trajectory_size(const tkd_trajectory* traj, size_t* out) {
  TKD_REQUIRE(traj);
  TKD_REQUIRE(out);
  *out = traj->traj.size();
  return TKD_OK;
}

size_t tkd_trajectory_warning_count(const tkd_trajectory* traj) {
  return traj ? traj->traj.warnings().size() : 0;
}

tkd_status tkd_trajectory_column(const tkd_trajectory* traj, const char* name, double* out,
                                 size_t capacity, size_t* count) {
  TKD_REQUIRE(traj);
  TKD_REQUIRE(name);
  return Guard([&] {
    const auto col = traj->traj.Column(name);
    if (count) *count = col.size();
    if (out) {
      for (size_t i = 0; i < col.size() && i < capacity; ++i) out[i] = col[i];
    }
    return TKD_OK;
  });
}

tkd_status tkd_trajectory_write_csv(const tkd_trajectory* traj, const char* path) {
  TKD_REQUIRE(traj);
  TKD_REQUIRE(path);
  return Guard([&] {
    traj->traj.WriteCsv(std::string(path));
    return TKD_OK;
  });
}

tkd_status tkd_rate_fit_series(const double* t, const double* values, size_t n, double t_lo,
                               double t_hi, tkd_rate_fit* out) {
  TKD_REQUIRE(t);
  TKD_REQUIRE(values);
  TKD_REQUIRE(out);
  return Guard([&] {
    const std::vector<double> ts(t, t + n);
    const std::vector<double> vs(values, values + n);
    const auto fit = (t_lo == 0.0 && t_hi == 0.0) ? tikdyn::FitRate(ts, vs)
                                                  : tikdyn::FitRate(ts, vs, t_lo, t_hi);
    FillFit(fit, out);
    return TKD_OK;
  });
}

tkd_status tkd_fit_csv(const char* path, const char* column, double t_lo, double t_hi,
                       tkd_rate_fit* out) {
  TKD_REQUIRE(path);
  TKD_REQUIRE(column);
  TKD_REQUIRE(out);
  return Guard([&] {
    const auto table = tikdyn::ReadCsv(path);
    const auto& ts = table.Column("t");
    const auto& vs = table.Column(column);
    const auto fit = (t_lo == 0.0 && t_hi == 0.0) ? tikdyn::FitRate(ts, vs)
                                                  : tikdyn::FitRate(ts, vs, t_lo, t_hi);
    FillFit(fit, out);
    return TKD_OK;
  });
}

tkd_status tkd_run_config(const char* config_path, size_t workers, int allow_infeasible,
                          const char* output_dir, tkd_string** report) {
  TKD_REQUIRE(config_path);
  TKD_REQUIRE(report);
  *report = new tkd_string{};
  std::string& text = (*report)->text;
  return Guard([&] {
    const auto config = tikdyn::LoadRunConfig(config_path);
    text += tikdyn::Preflight(config).text;
    tikdyn::RunOptions opts;
    if (workers > 0) opts.workers = workers;
    opts.allow_infeasible = allow_infeasible != 0;
    if (output_dir) opts.output_dir = output_dir;
    std::ostringstream log;
    const auto result = tikdyn::RunSweep(config, opts, log);
    text += log.str();
    if (result.any_aborted()) return Fail(TKD_ABORTED_RUN, "at least one sweep point aborted");
    if (result.any_failed()) return Fail(TKD_INTERNAL, "at least one sweep point failed");
    return TKD_OK;
  });
}

tkd_status tkd_check_config(const char* config_path, tkd_string** report, int* runnable) {
  TKD_REQUIRE(config_path);
  TKD_REQUIRE(report);
  *report = new tkd_string{};
  return Guard([&] {
    const auto config = tikdyn::LoadRunConfig(config_path);
    const auto pre = tikdyn::Preflight(config);
    (*report)->text = pre.text;
    if (runnable) *runnable = (pre.all_feasible || config.allow_infeasible) ? 1 : 0;
    return TKD_OK;
  });
}

const char* tkd_string_data(const tkd_string* s) { return s ? s->text.c_str() : ""; }

void tkd_string_destroy(tkd_string* s) { delete s; }

}  // extern "C"
