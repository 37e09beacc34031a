#include <gtest/gtest.h>

#include <random>

#include "holling/model.hpp"
#include "oracles.hpp"

using namespace holling;

TEST(Model, CanonicalInteriorPointIsStationary) {
  const FullParams p = canonical_params();
  const FullState f = rhs_full(p, {60, 2, 10});
  EXPECT_NEAR(f.N, 0.0, 1e-12);
  EXPECT_NEAR(f.P_S, 0.0, 1e-12);
  EXPECT_NEAR(f.P_H, 0.0, 1e-12);
}

TEST(Model, PreyOnlyEquilibriumAtCarryingCapacity) {
  const FullParams p = canonical_params();
  EXPECT_DOUBLE_EQ(p.n_hat(), 100.0);
  const FullState f = rhs_full(p, {100, 0, 0});
  EXPECT_EQ(f, (FullState{0, 0, 0}));
}

TEST(Model, HandComputedDerivativeAtGenericPoint) {
  // N=10, P_S=3, P_H=4 with the canonical rates:
  // N'   = 1*10 - 0.01*100 - 0.2*10*3 = 3
  // P_S' = -4*3 - 0.5*0.2*10*3 + 2*4 = -7
  // P_H' = -1*4 + 3 - 8 + 1.5*7 = 1.5
  const FullState f = rhs_full(canonical_params(), {10, 3, 4});
  EXPECT_NEAR(f.N, 3.0, 1e-12);
  EXPECT_NEAR(f.P_S, -7.0, 1e-12);
  EXPECT_NEAR(f.P_H, 1.5, 1e-12);
}

TEST(Model, JacobianMatchesCanonicalHandValues) {
  const Mat3 j = jacobian_full(canonical_params(), {60, 2, 10});
  const Mat3 expected{{{-0.6, -12, 0}, {-0.2, -10, 2}, {0.2, 7.5, -1.5}}};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(j[r][c], expected[r][c], 1e-12) << r << "," << c;
}

TEST(Model, JacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.1, 50.0);
  for (int trial = 0; trial < 50; ++trial) {
    FullParams p = oracle::random_params(rng);
    if (trial % 2) {
      p.l = 1.0 + u(rng) / 50.0;
      p.m = 1.0 + u(rng) / 25.0;
    }
    const FullState s{u(rng), u(rng), u(rng)};
    const Mat3 a = jacobian_full(p, s);
    const Mat3 fd = oracle::fd_jacobian(p, s);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        EXPECT_NEAR(a[r][c], fd[r][c], 1e-6 * (1.0 + std::abs(fd[r][c])))
            << "trial " << trial << " entry " << r << "," << c;
      }
  }
}

TEST(Model, PredatorTotalGrowsAtNetBirthMinusSearchingMortality) {
  // (P_S + P_H)' = (beta_P - mu_P)(P_S + P_H) - eta P_S: conversion terms cancel.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int trial = 0; trial < 100; ++trial) {
    const FullParams p = oracle::random_params(rng);
    const FullState s{u(rng), u(rng), u(rng)};
    const FullState f = rhs_full(p, s);
    const double expected = (p.beta_P - p.mu_P) * s.predators() - p.eta * s.P_S;
    EXPECT_NEAR(f.P_S + f.P_H, expected, 1e-10 * (1.0 + std::abs(expected)));
  }
}

TEST(Model, FacesOfTheOrthantAreNotLeft) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int trial = 0; trial < 100; ++trial) {
    const FullParams p = oracle::random_params(rng);
    EXPECT_GE(rhs_full(p, {0.0, u(rng), u(rng)}).N, 0.0);
    EXPECT_GE(rhs_full(p, {u(rng), 0.0, u(rng)}).P_S, 0.0);
    EXPECT_GE(rhs_full(p, {u(rng), u(rng), 0.0}).P_H, 0.0);
  }
}

TEST(Model, GeneralizedExponentsReduceToBaseAtOne) {
  FullParams p = canonical_params();
  const FullState s{7.5, 1.25, 3.0};
  const FullState base = rhs_full(p, s);
  p.l = 1.0;
  p.m = 1.0;
  EXPECT_EQ(rhs_full(p, s), base);
  p.l = 2.0;
  // Only the predation term changes: kappa N^2 P_S instead of kappa N P_S.
  const FullState g = rhs_full(p, s);
  EXPECT_NEAR(g.N - base.N, -p.kappa * s.P_S * (s.N * s.N - s.N), 1e-12);
  EXPECT_EQ(g.P_S, base.P_S);
}

TEST(Model, ReducedFieldHandValues) {
  ReducedParams r;
  r.beta_N = 2;
  r.mu_N = 1;
  r.K = 100;
  r.kappa = 0.2;
  r.chi = 0.25;
  r.beta_P = 1.5;
  r.mu_P = 1;
  r.eta = 3;
  // N=20, P=5: handling = 0.25*0.2*20 = 1, saturation 2.
  // N' = 20*0.8 - 0.2*20*5/2 = 6;  P' = -2.5*5 + 3*1*5/2 = -5
  const ReducedState f = rhs_reduced(r, {20, 5});
  EXPECT_NEAR(f.N, 6.0, 1e-12);
  EXPECT_NEAR(f.P, -5.0, 1e-12);
}

TEST(Model, LogisticConversion) {
  EXPECT_DOUBLE_EQ(convert_logistic(2.0, 1.0, 100.0), 0.01);
  const double delta = convert_logistic(1.6567, 1.0, 303000.0);
  EXPECT_NEAR(delta, 0.6567 / 303000.0, 1e-20);
  // Identity of the two growth forms at an arbitrary N.
  const double n = 12345.0;
  EXPECT_NEAR(0.6567 * n - delta * n * n, 0.6567 * n * (1 - n / 303000.0), 1e-9);
  EXPECT_THROW(convert_logistic(1.0, 1.0, 10.0), error);
  EXPECT_THROW(convert_logistic(2.0, 1.0, 0.0), error);
}

TEST(Model, EpsilonEmbedding) {
  const Embedding e = epsilon_embed(0.11, 1e-3);
  EXPECT_NEAR(e.rho, 110.0, 1e-12);
  EXPECT_NEAR(e.gamma, 1000.0, 1e-12);
  EXPECT_THROW(epsilon_embed(0.11, 0.0), error);
  EXPECT_THROW(epsilon_embed(0.11, -1.0), error);
  EXPECT_THROW(epsilon_embed(0.0, 1e-3), error);
}

TEST(Model, ScaledParamsCarryTheReducedRates) {
  const ReducedParams r = hare_lynx_reference();
  const FullParams p = scaled_params(r, 1e-4);
  EXPECT_EQ(p.beta_N, r.beta_N);
  EXPECT_EQ(p.mu_P, r.mu_P);
  EXPECT_NEAR(p.rho, 0.11e4, 1e-9);
  EXPECT_NEAR(p.gamma, 1e4, 1e-9);
  EXPECT_NEAR(p.n_hat(), r.K, 1e-6);
}

TEST(Model, ScaledFullFieldApproachesReducedOnTheSlowManifold) {
  // On P_H = chi kappa N P_S the prey equation of the scaled model equals the
  // reduced prey equation exactly.
  const ReducedParams r = hare_lynx_reference();
  const FullParams p = scaled_params(r, 1e-3);
  const double N = 50000, P = 6000;
  const double ps = P / (1 + r.chi * r.kappa * N);
  const FullState f = rhs_full(p, {N, ps, P - ps});
  const ReducedState g = rhs_reduced(r, {N, P});
  EXPECT_NEAR(f.N, g.N, 1e-9 * std::abs(g.N));
}

TEST(Model, ValidationRejectsBadInputs) {
  FullParams p = canonical_params();
  EXPECT_NO_THROW(p.validate());
  p.kappa = -1;
  EXPECT_THROW(p.validate(), error);
  p = canonical_params();
  p.l = 0.5;
  EXPECT_THROW(p.validate(), error);
  p = canonical_params();
  p.delta = std::nan("");
  EXPECT_THROW(p.validate(), error);

  EXPECT_THROW((FullState{-1, 0, 0}).validate(), error);
  EXPECT_NO_THROW((FullState{0, 0, 0}).validate());

  ReducedParams r = hare_lynx_reference();
  EXPECT_NO_THROW(r.validate());
  r.eta = 1.0;  // beta_P - mu_P - eta > 0
  EXPECT_THROW(r.validate(), error);
  try {
    r.validate();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::invalid_argument);
  }
}
