#include <cmath>
#include <functional>
#include <optional>
#include <sstream>

#include <gtest/gtest.h>

#include "tikdyn/diagnostics.hpp"
#include "tikdyn/dynamics.hpp"
#include "tikdyn/error.hpp"
#include "tikdyn/prox.hpp"
#include "tikdyn/schedule.hpp"
#include "tikdyn/tikhonov.hpp"

using namespace tikdyn;

namespace {

Vector V(double x) { return Vector::Constant(1, x); }

std::optional<ErrorCode> CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

ParamSchedule Constant(double lambda, double eps) {
  return ParamSchedule::Custom(
      "constant", [lambda](double) { return lambda; }, [](double) { return 0.0; },
      [eps](double) { return eps; }, [](double) { return 0.0; });
}

SolverConfig Config(double alpha, double beta, double horizon, double step, std::size_t stride,
                    double x0) {
  SolverConfig c;
  c.alpha = alpha;
  c.beta = beta;
  c.t0 = 1.0;
  c.horizon = horizon;
  c.step = step;
  c.stride = stride;
  c.x0 = V(x0);
  c.v0 = V(0.0);
  return c;
}

std::vector<double> Energies(const Trajectory& traj, const ProxObjective& f, const ParamSchedule& s,
                             const SolverConfig& c, const LyapunovParams& p) {
  std::vector<double> e;
  for (const auto& r : traj.records()) e.push_back(Energy(r, f, s, c, p));
  return e;
}

}  // namespace

TEST(Energy, VanishesOnTheRegularizedPath) {
  const auto s = ParamSchedule::Polynomial(1.0, 1.5);
  const double beta = 1.0, gamma = 9.97, t = 3.0;
  for (const char* name : {"shifted_abs", "abs_quad", "quadratic"}) {
    auto f = MakeObjective(name, 2);
    const Vector xr = RegularizedMin(*f, s.eps(t), s.lambda(t)).point;
    const Vector v = -beta * MoreauGrad(*f, s.lambda(t), xr);
    EXPECT_NEAR(EnergyAt(*f, s, beta, gamma, t, xr, v), 0.0, 1e-14) << name;
  }
}

TEST(Energy, KineticOnly) {
  auto f = MakeObjective("abs", 1);
  const auto s = ParamSchedule::Polynomial(1.0, 1.5);
  for (double beta : {0.0, 1.0, 7.0}) {
    for (double gamma : {0.5, 3.0}) {
      EXPECT_DOUBLE_EQ(EnergyAt(*f, s, beta, gamma, 2.0, V(0.0), V(1.0)), 0.5);
    }
  }
}

TEST(Energy, InitialValueOfDefaultRun) {
  auto f = MakeObjective("abs_quad", 1);
  const auto s = ParamSchedule::Polynomial(1.0, 1.9);
  const auto cfg = Config(10, 1, 1000, 1e-3, 100, 10.0);
  const auto p = DefaultLyapunovParams(10.0, 1.0);
  // f_1(10) = f(4.5) + 5.5^2/2 = 29.75, |x|^2/2 = 50, x_reg = 0, grad f_1(10) = 5.5.
  const double expected = 29.75 + 50.0 + 0.5 * std::pow(p.gamma * 10.0 + 5.5, 2);
  const auto traj = Integrate(Config(10, 1, 1.01, 1e-3, 10, 10.0), *f, s);
  EXPECT_NEAR(Energy(traj.records()[0], *f, s, cfg, p), expected, 1e-12 * expected);
}

TEST(Energy, RejectsNonpositiveParameters) {
  auto f = MakeObjective("abs", 1);
  EXPECT_EQ(CodeOf([&] { EnergyAt(*f, Constant(1, 0), 1, 1, 1, V(0), V(0)); }),
            ErrorCode::kInvalidParameter);
}

TEST(GammaFactor, StartsAtOne) {
  const ParamSchedule all[] = {ParamSchedule::Polynomial(1, 1.5), ParamSchedule::Polynomial(0, 2),
                               MakeNamedSchedule("log_tikhonov", 0.5)};
  for (const auto& s : all) {
    EXPECT_DOUBLE_EQ(GammaFactor(s, 10, 9.97, 3.0, 3.0), 1.0) << s.name();
    EXPECT_DOUBLE_EQ(LogGammaQuadrature(s, 10, 9.97, 3.0, 3.0), 0.0) << s.name();
  }
}

TEST(GammaFactor, SquareTwoClosedForm) {
  const auto s = ParamSchedule::Polynomial(1, 2);
  const double alpha = 10, gamma = 9.97;
  for (double t : {2.0, 3.5, 50.0, 1e3}) {
    EXPECT_DOUBLE_EQ(Mu(s, alpha, gamma, t), (alpha - gamma + 1) / t);
    EXPECT_NEAR(GammaFactor(s, alpha, gamma, 2.0, t), std::pow(t / 2.0, alpha - gamma + 1),
                1e-12 * std::pow(t / 2.0, alpha - gamma + 1));
  }
  EXPECT_EQ(CodeOf([&] { GammaFactor(s, alpha, gamma, 2.0, 1.0); }), ErrorCode::kInvalidParameter);
}

TEST(GammaFactor, QuadratureMatchesClosedForm) {
  const double alpha = 10, gamma = 9.97;
  for (double d : {1.0, 1.5, 1.9}) {
    const auto s = ParamSchedule::Polynomial(1, d);
    for (double t : {1.5, 10.0, 100.0, 1e3}) {
      const double exact = LogGammaClosedFormBelowTwo(s, alpha, gamma, 1.0, t);
      const double quad = LogGammaQuadrature(s, alpha, gamma, 1.0, t);
      // Relative 1e-6 on Gamma itself.
      EXPECT_LE(std::abs(std::expm1(quad - exact)), 1e-6) << "d=" << d << " t=" << t;
    }
  }
  const auto two = ParamSchedule::Polynomial(1, 2);
  EXPECT_LE(std::abs(LogGammaQuadrature(two, alpha, gamma, 1.0, 1e3) -
                     LogGammaClosedFormTwo(two, alpha, gamma, 1.0, 1e3)),
            1e-6);
}

TEST(GammaFactor, WrongBranch) {
  EXPECT_EQ(CodeOf([] { LogGammaClosedFormTwo(ParamSchedule::Polynomial(1, 1.5), 10, 9.97, 1, 2); }),
            ErrorCode::kWrongBranch);
  EXPECT_EQ(CodeOf([] { LogGammaClosedFormBelowTwo(ParamSchedule::Polynomial(1, 2), 10, 9.97, 1, 2); }),
            ErrorCode::kWrongBranch);
  EXPECT_EQ(
      CodeOf([] { LogGammaClosedFormBelowTwo(MakeNamedSchedule("log_tikhonov", 1), 10, 9.97, 1, 2); }),
      ErrorCode::kWrongBranch);
}

TEST(GammaFactor, DominatesEpsRatio) {
  // mu >= -eps'/(2 eps) gives Gamma(t) >= sqrt(eps(t1) / eps(t)).
  const ParamSchedule all[] = {ParamSchedule::Polynomial(1, 1.25), ParamSchedule::Polynomial(0.5, 2),
                               MakeNamedSchedule("log_tikhonov", 0.5)};
  for (const auto& s : all) {
    for (double t : {2.0, 30.0, 400.0}) {
      EXPECT_GE(LogGammaFactor(s, 3.0, 2.0, 1.0, t), 0.5 * std::log(s.eps(1.0) / s.eps(t)) - 1e-12)
          << s.name();
    }
  }
}

TEST(Coefficients, GPositive) {
  const double alpha = 10;
  const auto p = DefaultLyapunovParams(alpha, 1.0);
  for (double d : {1.0, 1.5, 1.9, 2.0}) {
    const auto s = ParamSchedule::Polynomial(1, d);
    for (double t = 100; t <= 1e4; t *= 1.5) {
      const double g = G(s, p, 1.0, t);
      EXPECT_GT(g, 0.0) << "d=" << d << " t=" << t;
      EXPECT_LE(g, GTilde(s, p, 1.0, t));
    }
  }
}

TEST(Coefficients, GValue) {
  const auto s = ParamSchedule::Polynomial(1, 2);
  const LyapunovParams p{1.0, 2.0, 3.0, 1.0};
  // t = 4: lambda' = 1, eps = 1/16, eps' = -2/64, sqrt(eps) = 1/4, 2/t + 2/t = 1.
  const double expected = 1.0 / 256 + 2.0 / 64 - 0.5 * 2.0 / 64 * 0.25 + 1.0 * (4 + 3) * 0.25 * 1.0;
  EXPECT_NEAR(G(s, p, 1.0, 4.0), expected, 1e-15);
  EXPECT_NEAR(GTilde(s, p, 1.0, 4.0), expected + 0.5 * 2.0 / 64 * 0.25, 1e-15);
  EXPECT_DOUBLE_EQ(Mu(s, 2.0, 1.0, 4.0), 0.25 + 0.25);
}

TEST(Residual, StationaryAtMinimizer) {
  auto f = MakeObjective("abs", 1);
  const auto s = Constant(1.0, 0.01);
  const auto cfg = Config(1.0, 1.0, 11, 0.01, 1, 0.0);
  const auto traj = Integrate(cfg, *f, s);
  const auto p = LyapunovParamsForGamma(1.0, 0.6, 1.0);
  const auto rep = LyapunovResidual(traj, *f, s, cfg, p);
  EXPECT_EQ(rep.checked, rep.records.size() - 2);
  EXPECT_DOUBLE_EQ(rep.fraction(), 1.0);
  for (const auto& r : rep.records) {
    EXPECT_EQ(r.energy, 0.0);
    EXPECT_EQ(r.g_val, 0.0);
    if (!std::isnan(r.residual)) EXPECT_EQ(r.residual, 0.0);
  }
  EXPECT_TRUE(std::isnan(rep.records.front().residual));
  EXPECT_TRUE(std::isnan(rep.records.back().residual));
}

TEST(Residual, HoldsOnFeasibleRun) {
  auto f = MakeObjective("shifted_abs", 1);
  const auto s = ParamSchedule::Polynomial(1, 1.5);
  const auto cfg = Config(1.0, 1.0, 101, 1e-3, 20, 3.0);
  const auto traj = Integrate(cfg, *f, s);
  auto p = DefaultLyapunovParams(1.0, 1.0);
  p.t1 = 10.0;
  const auto rep = LyapunovResidual(traj, *f, s, cfg, p);
  EXPECT_DOUBLE_EQ(rep.records.front().t, 10.0);
  EXPECT_GE(rep.fraction(), 0.99);
  const auto ib = IntegratedBounds(rep, *f, cfg);
  EXPECT_TRUE(ib.dissipation_holds);
  EXPECT_TRUE(ib.energy_holds);
  EXPECT_EQ(ib.times.size(), rep.records.size());
  for (std::size_t k = 0; k < ib.times.size(); ++k) {
    EXPECT_LE(rep.records[k].energy, ib.energy_bound[k] + 1e-3 * (1 + ib.energy_bound[k]));
  }
}

TEST(Residual, CoarseningIsSecondOrder) {
  auto f = MakeObjective("quadratic", 1);
  const auto s = ParamSchedule::Polynomial(1, 1.5);
  const auto p = DefaultLyapunovParams(1.0, 1.0);
  auto residual_at = [&](std::size_t stride, double t) {
    const auto cfg = Config(1.0, 1.0, 7, 1e-3, stride, 2.0);
    const auto rep = LyapunovResidual(Integrate(cfg, *f, s), *f, s, cfg, p);
    for (const auto& r : rep.records) {
      if (std::abs(r.t - t) < 1e-9) return r.residual;
    }
    return std::nan("");
  };
  for (double t : {2.0, 3.0, 5.0}) {
    const double r5 = residual_at(5, t), r10 = residual_at(10, t), r20 = residual_at(20, t);
    const double ratio = (r20 - r10) / (r10 - r5);
    EXPECT_GE(ratio, 3.5) << "t=" << t;
    EXPECT_LE(ratio, 4.5) << "t=" << t;
  }
}

TEST(Residual, Preconditions) {
  auto f = MakeObjective("abs_quad", 1);
  const auto s = ParamSchedule::Polynomial(1, 1.5);
  const auto p = DefaultLyapunovParams(10.0, 1.0);
  const auto coarse_cfg = Config(10, 1, 11, 0.01, 20, 1.0);
  const auto coarse = Integrate(coarse_cfg, *f, s);
  EXPECT_EQ(CodeOf([&] { LyapunovResidual(coarse, *f, s, coarse_cfg, p); }), ErrorCode::kPrecondition);

  const auto off = MakeNamedSchedule("no_tikhonov", 1);
  const auto cfg = Config(10, 1, 11, 0.01, 10, 1.0);
  const auto traj_off = Integrate(cfg, *f, off);
  EXPECT_EQ(CodeOf([&] { LyapunovResidual(traj_off, *f, off, cfg, p); }), ErrorCode::kPrecondition);

  auto late = p;
  late.t1 = 10.95;
  const auto traj = Integrate(cfg, *f, s);
  EXPECT_EQ(CodeOf([&] { LyapunovResidual(traj, *f, s, cfg, late); }), ErrorCode::kInsufficientData);
}

TEST(CrBounds, HoldOnFeasibleRun) {
  const auto s = ParamSchedule::Polynomial(1, 1.5);
  const auto cfg = Config(10, 1, 51, 1e-3, 50, 5.0);
  const auto p = DefaultLyapunovParams(10.0, 1.0);
  for (const char* name : {"abs_quad", "shifted_abs", "dead_zone"}) {
    auto f = MakeObjective(name, 1);
    const auto traj = Integrate(cfg, *f, s);
    const auto rep = CheckCrBounds(traj, Energies(traj, *f, s, cfg, p), s, *f);
    EXPECT_TRUE(rep.all_hold()) << name;
    EXPECT_EQ(rep.samples, traj.size());
    EXPECT_EQ(rep.bounds[0].name, "moreau_gap");
    EXPECT_EQ(rep.bounds[3].name, "reg_distance");
  }
}

TEST(CrBounds, TrivialAtOrigin) {
  auto f = MakeObjective("abs", 1);
  const auto s = ParamSchedule::Polynomial(1, 1.5);
  const auto traj = Integrate(Config(10, 1, 3, 0.01, 10, 0.0), *f, s);
  const std::vector<double> zeros(traj.size(), 0.0);
  const auto rep = CheckCrBounds(traj, zeros, s, *f);
  EXPECT_TRUE(rep.all_hold());
  for (const auto& b : rep.bounds) EXPECT_LE(b.worst_excess, 0.0);
}

TEST(CrBounds, DetectViolation) {
  auto f = MakeObjective("abs_quad", 1);
  const auto s = ParamSchedule::Polynomial(1, 1.5);
  const auto traj = Integrate(Config(10, 1, 3, 0.01, 10, 5.0), *f, s);
  const std::vector<double> zeros(traj.size(), 0.0);
  const auto rep = CheckCrBounds(traj, zeros, s, *f);
  EXPECT_FALSE(rep.all_hold());
  EXPECT_FALSE(rep.bounds[0].holds);
  EXPECT_GT(rep.bounds[0].worst_excess, 0.0);
  EXPECT_DOUBLE_EQ(rep.bounds[0].worst_time, 1.0);
  EXPECT_EQ(CodeOf([&] { CheckCrBounds(traj, {1.0}, s, *f); }), ErrorCode::kInvalidParameter);
}

TEST(FitRate, ExactPowerLaw) {
  std::vector<double> t, v;
  for (int k = 0; k <= 200; ++k) {
    t.push_back(std::pow(10.0, 3.0 * k / 200));
    v.push_back(3.0 * std::pow(t.back(), -1.9));
  }
  const auto fit = FitRate(t, v);
  EXPECT_NEAR(fit.slope, -1.9, 1e-6);
  EXPECT_NEAR(fit.intercept, std::log(3.0), 1e-6);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(fit.t_lo, 100.0);
  EXPECT_DOUBLE_EQ(fit.t_hi, 1000.0);
  EXPECT_EQ(fit.samples, 67u);
  EXPECT_FALSE(fit.truncated);
  EXPECT_NEAR(FitRate(t, v, 1.0, 10.0).slope, -1.9, 1e-6);
}

TEST(FitRate, Errors) {
  std::vector<double> t, v;
  for (int k = 1; k <= 19; ++k) {
    t.push_back(k);
    v.push_back(1.0 / k);
  }
  EXPECT_EQ(CodeOf([&] { FitRate(t, v, 1, 19); }), ErrorCode::kInsufficientData);
  t.push_back(20);
  v.push_back(0.0);
  EXPECT_EQ(CodeOf([&] { FitRate(t, v, 1, 20); }), ErrorCode::kDomain);
  v.back() = -1.0;
  EXPECT_EQ(CodeOf([&] { FitRate(t, v, 1, 20); }), ErrorCode::kDomain);
  v.back() = 1.0 / 20;
  EXPECT_NEAR(FitRate(t, v, 1, 20).slope, -1.0, 1e-12);
  EXPECT_EQ(CodeOf([&] { FitRate(t, {1.0}, 1, 20); }), ErrorCode::kInvalidParameter);
}

TEST(FitRate, PositivePrefix) {
  std::vector<double> t, v;
  for (int k = 1; k <= 100; ++k) {
    t.push_back(k);
    v.push_back(k <= 60 ? std::pow(k, -2.0) : 0.0);
  }
  const auto fit = FitRatePositivePrefix(t, v, 1, 100);
  EXPECT_TRUE(fit.truncated);
  EXPECT_DOUBLE_EQ(fit.t_hi, 60.0);
  EXPECT_EQ(fit.samples, 60u);
  EXPECT_NEAR(fit.slope, -2.0, 1e-12);
  v[10] = 0.0;  // fewer than 20 positive samples before the first zero
  EXPECT_EQ(CodeOf([&] { FitRatePositivePrefix(t, v, 1, 100); }), ErrorCode::kInsufficientData);
}

TEST(PredictedSlope, Values) {
  const double alpha = 10, gamma = 9.97;
  const auto s = ParamSchedule::Polynomial(1, 1.5);
  EXPECT_DOUBLE_EQ(*PredictedSlope(RateSeries::kPhiGap, s, alpha, gamma), -1.5);
  EXPECT_DOUBLE_EQ(*PredictedSlope(RateSeries::kProxDisplacementSq, s, alpha, gamma), -0.75);
  EXPECT_DOUBLE_EQ(*PredictedSlope(RateSeries::kRegDistanceSq, s, alpha, gamma), -0.25);
  const auto two = ParamSchedule::Polynomial(1, 2);
  EXPECT_NEAR(*PredictedSlope(RateSeries::kPhiGap, two, alpha, gamma), -1.03, 1e-12);
  EXPECT_DOUBLE_EQ(*PredictedSlope(RateSeries::kPhiGap, two, 10, 5), -2.0);
  EXPECT_FALSE(PredictedSlope(RateSeries::kPhiGap, ParamSchedule::Polynomial(2, 1), alpha, gamma));
  EXPECT_FALSE(PredictedSlope(RateSeries::kPhiGap, MakeNamedSchedule("log_tikhonov", 1), alpha, gamma));
}

TEST(DerivedSeries, Values) {
  auto f = MakeObjective("abs_quad", 1);
  const auto s = ParamSchedule::Polynomial(1, 1.5);
  const auto traj = Integrate(Config(10, 1, 3, 0.01, 10, 5.0), *f, s);
  const auto pd = ProxDisplacementSq(traj, s);
  const auto rd = RegDistanceSq(traj);
  ASSERT_EQ(pd.size(), traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto& r = traj.records()[k];
    const double lam = s.lambda(r.t);
    EXPECT_NEAR(pd[k], (Prox(*f, lam, r.x) - r.x).squaredNorm(), 1e-12 * (1 + pd[k]));
    EXPECT_DOUBLE_EQ(rd[k], r.reg_distance * r.reg_distance);
  }
}

TEST(DiagnosticsCsv, Header) {
  auto f = MakeObjective("abs_quad", 1);
  const auto s = ParamSchedule::Polynomial(1, 1.5);
  const auto cfg = Config(10, 1, 2, 0.01, 1, 5.0);
  const auto rep = LyapunovResidual(Integrate(cfg, *f, s), *f, s, cfg, DefaultLyapunovParams(10, 1));
  std::ostringstream os;
  WriteDiagnosticsCsv(os, rep);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "t,E,mu,Gamma,g,residual");
  std::size_t rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, rep.records.size());
}
