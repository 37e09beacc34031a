#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "holling/integrator.hpp"
#include "holling/model.hpp"
#include "oracles.hpp"

using namespace holling;

namespace {

double logistic_exact(double r, double K, double n0, double t) {
  return K / (1.0 + (K / n0 - 1.0) * std::exp(-r * t));
}

auto logistic(double r, double K) {
  return [r, K](double, const std::array<double, 1>& y) {
    return std::array<double, 1>{r * y[0] * (1.0 - y[0] / K)};
  };
}

// Prey-free predator block of the canonical rates: Metzler, so nonnegative
// initial data stay nonnegative and clamping never triggers.
const oracle::Mat2 kPredatorBlock{{{-4.0, 2.0}, {1.5, -1.5}}};

auto linear2(const oracle::Mat2& a) {
  return [a](double, const Vec2& y) {
    return Vec2{a[0][0] * y[0] + a[0][1] * y[1], a[1][0] * y[0] + a[1][1] * y[1]};
  };
}

}  // namespace

TEST(Integrator, UniformGridEndsExactlyAtEnd) {
  const auto g = uniform_grid(0.0, 20.0, 0.01);
  ASSERT_EQ(g.size(), 2001u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_EQ(g.back(), 20.0);
  const auto h = uniform_grid(0.0, 1.0, 0.3);
  ASSERT_EQ(h.size(), 5u);
  EXPECT_EQ(h.back(), 1.0);
  EXPECT_EQ(uniform_grid(3.0, 3.0, 0.1).size(), 1u);
  EXPECT_THROW(uniform_grid(0.0, 1.0, 0.0), error);
  EXPECT_THROW(uniform_grid(1.0, 0.0, 0.1), error);
}

TEST(Integrator, LogisticMatchesClosedForm) {
  for (double n0 : {1.0, 50.0, 250.0}) {
    const auto grid = uniform_grid(0.0, 30.0, 0.05);
    const auto traj = integrate<1>(logistic(0.8, 200.0), {n0}, 0.0, 30.0, grid);
    ASSERT_EQ(traj.size(), grid.size());
    double worst = 0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const double exact = logistic_exact(0.8, 200.0, n0, traj.times[i]);
      worst = std::max(worst, std::abs(traj.states[i][0] - exact) / exact);
    }
    EXPECT_LT(worst, 1e-6) << "n0=" << n0;
  }
}

TEST(Integrator, LinearSystemMatchesMatrixExponential) {
  const Vec2 y0{3.0, 5.0};
  const auto grid = uniform_grid(0.0, 10.0, 0.1);
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-11;
  cfg.abs_tol = 1e-14;
  const auto traj = integrate<2>(linear2(kPredatorBlock), y0, 0.0, 10.0, grid, cfg);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto e = oracle::expm(kPredatorBlock, traj.times[i]);
    const double x0 = e[0][0] * y0[0] + e[0][1] * y0[1];
    const double x1 = e[1][0] * y0[0] + e[1][1] * y0[1];
    EXPECT_NEAR(traj.states[i][0], x0, 1e-8 * std::max(1e-3, std::abs(x0)));
    EXPECT_NEAR(traj.states[i][1], x1, 1e-8 * std::max(1e-3, std::abs(x1)));
  }
  EXPECT_EQ(traj.stats.clamp_events, 0);
}

TEST(Integrator, MatrixExponentialOracleSelfCheck) {
  // Diagonal case has a closed form.
  const oracle::Mat2 d{{{-1.0, 0.0}, {0.0, 2.0}}};
  const auto e = oracle::expm(d, 1.5);
  EXPECT_NEAR(e[0][0], std::exp(-1.5), 1e-14);
  EXPECT_NEAR(e[1][1], std::exp(3.0), 1e-12);
  EXPECT_NEAR(e[0][1], 0.0, 1e-15);
}

TEST(Integrator, ErrorShrinksWithTolerance) {
  // Endpoint error versus the closed form should fall as rel_tol is tightened.
  const double exact = logistic_exact(1.3, 100.0, 2.0, 12.0);
  double prev = std::numeric_limits<double>::infinity();
  for (double tol : {1e-4, 1e-6, 1e-8, 1e-10}) {
    IntegratorConfig cfg;
    cfg.rel_tol = tol;
    cfg.abs_tol = tol * 1e-2;
    const auto y = integrate_to<1>(logistic(1.3, 100.0), {2.0}, 0.0, 12.0, cfg);
    const double e = std::abs(y[0] - exact);
    EXPECT_LT(e, prev) << "tol=" << tol;
    prev = e;
  }
}

TEST(Integrator, GridOutputMatchesStoppingAtEachPoint) {
  const auto field = linear2(kPredatorBlock);
  const Vec2 y0{1.0, 2.0};
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-13;
  const auto grid = uniform_grid(0.0, 3.0, 0.37);
  const auto traj = integrate<2>(field, y0, 0.0, 3.0, grid, cfg);
  for (std::size_t i = 1; i < traj.size(); ++i) {
    const auto direct = integrate_to<2>(field, y0, 0.0, traj.times[i], cfg);
    for (int k = 0; k < 2; ++k) {
      EXPECT_NEAR(traj.states[i][k], direct[k], 1e-8 * std::abs(direct[k]));
    }
  }
}

TEST(Integrator, ZeroLengthIntervalReturnsInitialState) {
  const std::vector<double> grid{2.0};
  const auto traj = integrate<1>(logistic(1.0, 10.0), {4.0}, 2.0, 2.0, grid);
  ASSERT_EQ(traj.size(), 1u);
  EXPECT_EQ(traj.states[0][0], 4.0);
  EXPECT_EQ(traj.final_state[0], 4.0);
  EXPECT_EQ(traj.stats.steps, 0);
}

TEST(Integrator, FinalStateIndependentOfGrid) {
  const auto a = integrate_to<1>(logistic(1.0, 10.0), {1.0}, 0.0, 5.0);
  const auto grid = uniform_grid(0.0, 5.0, 0.5);
  const auto b = integrate<1>(logistic(1.0, 10.0), {1.0}, 0.0, 5.0, grid);
  EXPECT_EQ(b.final_state[0], b.states.back()[0]);
  EXPECT_NEAR(a[0], b.final_state[0], 1e-12);
}

TEST(Integrator, StiffScaledSystemStaysNonnegative) {
  const ReducedParams r = hare_lynx_reference();
  const FullParams p = scaled_params(r, 1e-4);
  const double ps = 4000.0 / (1.0 + r.chi * r.kappa * 30000.0);
  const auto grid = uniform_grid(0.0, 20.0, 0.01);
  const auto traj = integrate<3>(full_field(p), {30000.0, ps, 4000.0 - ps}, 0.0, 20.0, grid);
  for (const auto& s : traj.states) {
    for (double v : s) ASSERT_GE(v, 0.0);
  }
  EXPECT_GT(traj.stats.steps, 1000);
}

TEST(Integrator, ClampsNegativeComponentsAndCounts) {
  // y' = -1 crosses zero at t = 1.
  auto drain = [](double, const std::array<double, 1>&) { return std::array<double, 1>{-1.0}; };
  const auto traj = integrate<1>(drain, {0.5}, 0.0, 2.0, uniform_grid(0.0, 2.0, 0.25));
  EXPECT_GT(traj.stats.clamp_events, 0);
  for (const auto& s : traj.states) EXPECT_GE(s[0], 0.0);
  EXPECT_EQ(traj.final_state[0], 0.0);
}

TEST(Integrator, RejectsInvalidInputs) {
  const auto f = logistic(1.0, 10.0);
  const std::vector<double> empty;
  EXPECT_THROW(integrate<1>(f, {1.0}, 1.0, 0.0, empty), error);
  EXPECT_THROW(integrate<1>(f, {-1.0}, 0.0, 1.0, empty), error);
  const std::vector<double> outside{0.0, 2.0};
  EXPECT_THROW(integrate<1>(f, {1.0}, 0.0, 1.0, outside), error);
  const std::vector<double> unsorted{0.5, 0.2};
  EXPECT_THROW(integrate<1>(f, {1.0}, 0.0, 1.0, unsorted), error);
  IntegratorConfig bad;
  bad.rel_tol = 0.0;
  EXPECT_THROW(integrate_to<1>(f, {1.0}, 0.0, 1.0, bad), error);
}

TEST(Integrator, ReportsNonFiniteDerivative) {
  auto blowup = [](double, const std::array<double, 1>& y) {
    return std::array<double, 1>{y[0] * y[0]};
  };
  try {
    integrate_to<1>(blowup, {1.0}, 0.0, 2.0);
    FAIL() << "expected an error";
  } catch (const error& e) {
    EXPECT_TRUE(e.code() == errc::non_finite_derivative || e.code() == errc::step_underflow)
        << e.what();
    EXPECT_TRUE(is_numerical(e.code()));
  }
  auto nan_field = [](double t, const std::array<double, 1>&) {
    return std::array<double, 1>{t > 0.5 ? std::nan("") : 1.0};
  };
  try {
    integrate_to<1>(nan_field, {1.0}, 0.0, 1.0);
    FAIL() << "expected an error";
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::non_finite_derivative);
  }
}

TEST(Integrator, ReportsBudgetExhaustion) {
  IntegratorConfig cfg;
  cfg.max_steps = 10;
  try {
    integrate_to<1>(logistic(1.0, 10.0), {1.0}, 0.0, 100.0, cfg);
    FAIL() << "expected an error";
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::budget_exhausted);
  }
}
