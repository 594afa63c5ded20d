#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "tikdyn/dynamics.hpp"
#include "tikdyn/error.hpp"
#include "tikdyn/prox.hpp"
#include "tikdyn/schedule.hpp"
#include "tikdyn/tikhonov.hpp"

using namespace tikdyn;

namespace {

Vector V(double x) { return Vector::Constant(1, x); }

SolverConfig Config(double alpha, double beta, double horizon, double step, std::size_t stride,
                    double x0, double v0 = 0.0) {
  SolverConfig c;
  c.alpha = alpha;
  c.beta = beta;
  c.t0 = 1.0;
  c.horizon = horizon;
  c.step = step;
  c.stride = stride;
  c.x0 = V(x0);
  c.v0 = V(v0);
  return c;
}

ParamSchedule Constant(double lambda, double eps) {
  return ParamSchedule::Custom(
      "constant", [lambda](double) { return lambda; }, [](double) { return 0.0; },
      [eps](double) { return eps; }, [](double) { return 0.0; });
}

std::optional<ErrorCode> CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace

TEST(Rhs, EquilibriumAtMinimalNormPoint) {
  auto f = MakeObjective("abs", 2);
  const auto s = ParamSchedule::Polynomial(1.0, 1.5);
  const SolverState st{3.0, Vector::Zero(2), Vector::Zero(2)};
  const auto pos = RhsBetaPositive(st, Config(10, 1, 2, 1, 1, 0), *f, s);
  const auto zero = RhsBetaZero(st, Config(10, 0, 2, 1, 1, 0), *f, s);
  EXPECT_EQ(pos.dx.norm(), 0.0);
  EXPECT_EQ(pos.dw.norm(), 0.0);
  EXPECT_EQ(zero.dx.norm(), 0.0);
  EXPECT_EQ(zero.dw.norm(), 0.0);
}

TEST(Rhs, BetaZeroExample) {
  auto f = MakeObjective("abs", 1);
  const auto d = RhsBetaZero({1.0, V(2.0), V(0.0)}, Config(2, 0, 2, 1, 1, 0), *f, Constant(1, 1));
  EXPECT_DOUBLE_EQ(d.dx[0], 0.0);
  EXPECT_DOUBLE_EQ(d.dw[0], -3.0);
}

TEST(Rhs, LiftAndBetaPositiveExample) {
  auto f = MakeObjective("abs_quad", 1);
  const auto s = ParamSchedule::Polynomial(1.0, 1.5);
  const auto cfg = Config(10, 1, 2, 1, 1, 10.0);
  EXPECT_DOUBLE_EQ(MoreauGrad(*f, 1.0, V(10.0))[0], 5.5);
  const SolverState st = InitialLift(cfg, *f, s);
  EXPECT_DOUBLE_EQ(st.t, 1.0);
  EXPECT_DOUBLE_EQ(st.w[0], -95.5);
  const auto d = RhsBetaPositive(st, cfg, *f, s);
  // x' = -5.5 - 9 * 10 + 95.5 = v0 = 0
  EXPECT_NEAR(d.dx[0], 0.0, 1e-12);
  // y' = -(10 * (-1.5) / 2 - 1 - 1 + 10) * 10 + 95.5
  EXPECT_NEAR(d.dw[0], 90.5, 1e-12);
  EXPECT_NEAR(VelocityOf(st, cfg, *f, s)[0], 0.0, 1e-12);
}

TEST(Rhs, WrongBranch) {
  auto f = MakeObjective("abs", 1);
  const auto s = ParamSchedule::Polynomial(1.0, 1.5);
  const SolverState st{1.0, V(1.0), V(0.0)};
  EXPECT_EQ(CodeOf([&] { RhsBetaPositive(st, Config(10, 0, 2, 1, 1, 0), *f, s); }),
            ErrorCode::kWrongBranch);
  EXPECT_EQ(CodeOf([&] { RhsBetaZero(st, Config(10, 1, 2, 1, 1, 0), *f, s); }),
            ErrorCode::kWrongBranch);
}

TEST(Rhs, LiftRecoversVelocity) {
  const auto s = ParamSchedule::Polynomial(0.5, 1.25);
  for (const auto& name : CatalogNames()) {
    auto f = MakeObjective(name, 1);
    for (double beta : {0.0, 0.3, 1.0, 4.0}) {
      auto cfg = Config(3, beta, 10, 1, 1, 2.5, -1.25);
      const auto st = InitialLift(cfg, *f, s);
      EXPECT_NEAR(VelocityOf(st, cfg, *f, s)[0], -1.25, 1e-12) << name << " beta=" << beta;
      EXPECT_NEAR(Rhs(st, cfg, *f, s).dx[0], -1.25, 1e-12) << name << " beta=" << beta;
    }
  }
}

TEST(Rhs, SmallBetaApproachesBetaZero) {
  // From the lift, v' = (-y' - beta^2 d/dt grad + (1 - alpha beta sqrt(eps)) v
  // - alpha beta eps' x / (2 sqrt(eps))) / beta; dropping the grad term costs O(beta).
  auto f = MakeObjective("quadratic", 1);
  const auto s = ParamSchedule::Polynomial(1.0, 1.5);
  const double t = 2.0, x = 1.7, v = -0.6;
  auto zero_cfg = Config(2, 0, 3, 1, 1, x, v);
  zero_cfg.t0 = t;
  const double target = RhsBetaZero({t, V(x), V(v)}, zero_cfg, *f, s).dw[0];
  for (double beta : {1e-2, 1e-3, 1e-4}) {
    auto cfg = zero_cfg;
    cfg.beta = beta;
    const auto st = InitialLift(cfg, *f, s);
    const auto d = RhsBetaPositive(st, cfg, *f, s);
    const double e = s.eps(t), se = std::sqrt(e);
    const double vdot =
        (-d.dw[0] + (1 - 2 * beta * se) * v - 2 * beta * s.eps_dot(t) * x / (2 * se)) / beta;
    const double err = std::abs(vdot - target);
    EXPECT_LE(err, 50 * beta) << beta;
  }
}

TEST(Integrate, EquilibriumStaysPut) {
  for (double beta : {0.0, 1.0}) {
    auto f = MakeObjective("dead_zone", 1);
    const auto traj = Integrate(Config(10, beta, 11, 0.01, 10, 0.0), *f,
                                ParamSchedule::Polynomial(1, 1.5));
    for (const auto& r : traj.records()) {
      EXPECT_EQ(r.x[0], 0.0);
      EXPECT_EQ(r.velocity[0], 0.0);
    }
  }
}

TEST(Integrate, FourthOrderConvergence) {
  auto f = MakeObjective("quadratic", 1);
  const auto s = ParamSchedule::Polynomial(1.0, 1.5);
  auto final_x = [&](double h, double beta) {
    const auto n = static_cast<std::size_t>(std::lround(10.0 / h));
    return Integrate(Config(1, beta, 11, h, n, 3.0, 1.0), *f, s).back().x[0];
  };
  for (double beta : {0.0, 1.0}) {
    // Coarser steps are pre-asymptotic for beta = 1 (the error changes sign near h = 0.1).
    const double ref = final_x(0.1 / 256, beta);
    const double e1 = std::abs(final_x(0.025, beta) - ref);
    const double e2 = std::abs(final_x(0.0125, beta) - ref);
    const double ratio = e1 / e2;
    EXPECT_GE(ratio, 12.0) << "beta=" << beta;
    EXPECT_LE(ratio, 20.0) << "beta=" << beta;
  }
}

TEST(Integrate, SatisfiesSecondOrderEquation) {
  auto f = MakeObjective("quadratic", 1);
  const auto s = ParamSchedule::Polynomial(1.0, 1.5);
  const double alpha = 3.0, beta = 1.0, h = 1e-3;
  const auto traj = Integrate(Config(alpha, beta, 6, h, 1, 2.0, -1.0), *f, s);
  const auto& r = traj.records();
  auto grad = [&](std::size_t k) { return MoreauGrad(*f, s.lambda(r[k].t), r[k].x)[0]; };
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < r.size(); k += 50) {
    const double t = r[k].t;
    const double xdd = (r[k + 1].x[0] - 2 * r[k].x[0] + r[k - 1].x[0]) / (h * h);
    const double gd = (grad(k + 1) - grad(k - 1)) / (2 * h);
    const double xd = (r[k + 1].x[0] - r[k - 1].x[0]) / (2 * h);
    EXPECT_NEAR(xd, r[k].velocity[0], 1e-5);
    const double res = xdd + alpha * std::sqrt(s.eps(t)) * xd + beta * gd + grad(k) +
                       s.eps(t) * r[k].x[0];
    worst = std::max(worst, std::abs(res));
  }
  EXPECT_LE(worst, 1e-4);
}

TEST(Integrate, EnergyNonincreasingForFrozenParameters) {
  // With lambda, eps frozen: d/dt (|x'|^2/2 + f_lambda + eps|x|^2/2) =
  // -alpha sqrt(eps)|x'|^2 - beta <x', d/dt grad f_lambda> <= 0.
  for (const char* name : {"abs", "abs_quad", "shifted_abs", "dead_zone"}) {
    auto f = MakeObjective(name, 1);
    const auto s = Constant(0.5, 0.04);
    const auto traj = Integrate(Config(1, 0.5, 41, 1e-3, 10, 4.0, 2.0), *f, s);
    double prev = INFINITY;
    for (const auto& r : traj.records()) {
      const double e = 0.5 * r.velocity.squaredNorm() + r.moreau_value + 0.02 * r.x.squaredNorm();
      EXPECT_LE(e, prev + 1e-9) << name << " t=" << r.t;
      prev = e;
    }
  }
}

TEST(Integrate, RecordsAtStrideAndEnd) {
  auto f = MakeObjective("abs", 1);
  const auto traj = Integrate(Config(10, 1, 2.05, 0.01, 10, 1.0), *f, ParamSchedule::Polynomial(1, 1.5));
  ASSERT_EQ(traj.size(), 12u);
  EXPECT_DOUBLE_EQ(traj.records()[0].t, 1.0);
  EXPECT_NEAR(traj.records()[1].t, 1.1, 1e-12);
  EXPECT_NEAR(traj.back().t, 2.05, 1e-12);
  for (std::size_t k = 1; k < traj.size(); ++k) {
    EXPECT_GT(traj.records()[k].t, traj.records()[k - 1].t);
  }
  EXPECT_DOUBLE_EQ(traj.record_spacing(), 0.1);
}

TEST(Integrate, RecordFields) {
  auto f = MakeObjective("shifted_abs", 1);
  const auto s = ParamSchedule::Polynomial(1, 1.5);
  const auto traj = Integrate(Config(10, 1, 3, 0.01, 50, 4.0), *f, s);
  for (const auto& r : traj.records()) {
    const double lam = s.lambda(r.t);
    EXPECT_DOUBLE_EQ(r.moreau_value, MoreauValue(*f, lam, r.x));
    EXPECT_DOUBLE_EQ(r.phi_gap, r.moreau_value - f->OptimalValue());
    EXPECT_DOUBLE_EQ(r.grad_norm, MoreauGrad(*f, lam, r.x).norm());
    EXPECT_DOUBLE_EQ(r.norm_x, r.x.norm());
    EXPECT_NEAR(r.reg_distance, (r.x - RegularizedMin(*f, s.eps(r.t), lam).point).norm(), 1e-15);
  }
  const auto off = Integrate(Config(10, 1, 3, 0.01, 50, 4.0), *f, MakeNamedSchedule("no_tikhonov", 1));
  EXPECT_TRUE(std::isnan(off.back().reg_distance));
}

TEST(Integrate, NoTikhonovDropsOnlyTheWeightTerm) {
  auto f = MakeObjective("dead_zone", 1);
  const auto on = ParamSchedule::Polynomial(1, 1.5);
  const auto off = MakeNamedSchedule("no_tikhonov", 1, 1.5);
  for (double beta : {0.0, 1.0}) {
    const auto cfg = Config(10, beta, 3, 0.01, 1, 0.5);
    const SolverState st{2.0, V(0.5), V(0.25)};
    const auto a = Rhs(st, cfg, *f, on);
    const auto b = Rhs(st, cfg, *f, off);
    EXPECT_DOUBLE_EQ(a.dx[0], b.dx[0]);
    // eps x enters y' with weight beta for beta > 0, and v' directly for beta = 0.
    const double expect = beta > 0 ? beta * on.eps(2.0) * 0.5 : -on.eps(2.0) * 0.5;
    EXPECT_NEAR(a.dw[0] - b.dw[0], expect, 1e-15);
  }
}

TEST(Integrate, AbortCarriesPartialTrajectory) {
  auto f = MakeObjective("quadratic", 1);
  // Strong Hessian damping: the characteristic root near -beta L = -50 puts
  // h = 0.1 far outside the RK4 stability interval.
  auto cfg = Config(1, 100, 1001, 0.1, 1, 1.0);
  try {
    Integrate(cfg, *f, ParamSchedule::Polynomial(0, 1));
    FAIL() << "expected an abort";
  } catch (const AbortedRunError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAbortedRun);
    EXPECT_FALSE(e.partial().empty());
    EXPECT_TRUE(e.last_valid().x.allFinite());
    EXPECT_DOUBLE_EQ(e.partial().back().t, e.last_valid().t);
    EXPECT_LT(e.last_valid().t, 1001.0);
    EXPECT_NE(std::string(e.what()).find("diverged"), std::string::npos);
  }
}

TEST(Integrate, Warnings) {
  auto f = MakeObjective("abs", 1);
  auto cfg = Config(10, 1, 2, 0.01, 10, 1.0);
  EXPECT_TRUE(Integrate(cfg, *f, ParamSchedule::Polynomial(1, 1.5)).warnings().empty());
  cfg.t0 = 0.5;
  cfg.horizon = 1.5;
  const auto w = Integrate(cfg, *f, ParamSchedule::Polynomial(1, 1.5)).warnings();
  ASSERT_EQ(w.size(), 1u);
  EXPECT_NE(w[0].find("t0"), std::string::npos);
}

TEST(Integrate, ValidationErrors) {
  auto f = MakeObjective("abs", 1);
  const auto s = ParamSchedule::Polynomial(1, 1.5);
  auto expect_invalid = [&](SolverConfig c) {
    EXPECT_EQ(CodeOf([&] { Integrate(c, *f, s); }), ErrorCode::kInvalidParameter);
  };
  auto base = Config(10, 1, 2, 0.01, 10, 1.0);
  auto c = base;
  c.step = 0.03;  // 1 / 0.03 is not an integer
  expect_invalid(c);
  c = base;
  c.alpha = 0;
  expect_invalid(c);
  c = base;
  c.beta = -1;
  expect_invalid(c);
  c = base;
  c.horizon = 1.0;
  expect_invalid(c);
  c = base;
  c.stride = 0;
  expect_invalid(c);
  c = base;
  c.x0 = Vector::Zero(2);
  c.v0 = Vector::Zero(2);
  expect_invalid(c);
  c = base;
  c.v0 = Vector::Zero(2);
  expect_invalid(c);
  c = base;
  c.x0 = V(NAN);
  EXPECT_EQ(CodeOf([&] { Integrate(c, *f, s); }), ErrorCode::kDomain);
}

TEST(Trajectory, CsvFormat) {
  auto f = MakeObjective("abs_quad", 2);
  SolverConfig cfg = Config(10, 1, 1.2, 0.1, 1, 0);
  cfg.x0 = Vector{{1.0 / 3.0, -2.0}};
  cfg.v0 = Vector::Zero(2);
  const auto traj = Integrate(cfg, *f, ParamSchedule::Polynomial(1, 1.5));
  const auto names = Trajectory::ColumnNames(2);
  const std::vector<std::string> expected = {"t",           "x_0",       "x_1",     "v_0",
                                             "v_1",         "moreau_value", "grad_norm",
                                             "phi_gap",     "reg_distance", "norm_x"};
  EXPECT_EQ(names, expected);
  std::ostringstream os;
  traj.WriteCsv(os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "t,x_0,x_1,v_0,v_1,moreau_value,grad_norm,phi_gap,reg_distance,norm_x");
  std::getline(is, line);
  EXPECT_EQ(line.substr(0, 22), "1,0.33333333333333331,");
  int rows = 1;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 3);
  for (const auto& n : names) EXPECT_EQ(traj.Column(n).size(), 3u);
  EXPECT_EQ(traj.Column("x_1")[0], -2.0);
  EXPECT_EQ(CodeOf([&] { traj.Column("x_2"); }), ErrorCode::kInvalidParameter);
  EXPECT_EQ(CodeOf([&] { traj.Column("bogus"); }), ErrorCode::kInvalidParameter);
  EXPECT_EQ(CodeOf([&] { traj.WriteCsv(std::string("/nonexistent/dir/x.csv")); }), ErrorCode::kIo);
}
