#pragma once

// Equilibria, stability classification, dissipativity constants and the
// Lyapunov function of the predator-extinction regime.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

#include "holling/error.hpp"
#include "holling/model.hpp"

namespace holling {

/// Eigenvalues with |Re| at or below this margin classify as marginal.
inline constexpr double kStabilityMargin = 1e-9;

enum class Stability { stable, unstable, marginal };

constexpr std::string_view to_string(Stability s) noexcept {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    case Stability::marginal: return "marginal";
  }
  return "unknown";
}

struct AssumptionReport {
  bool a21_holds = false;        // positivity and growth-sign conditions
  bool a22_holds = false;        // predators die out without prey
  bool interior_exists = false;  // coexistence equilibrium exists
  bool e2_stable = false;        // prey-only equilibrium locally stable
  // Closed-form stability inequality (implies interior_exists). It is the sign
  // of p2 only; routh_hurwitz_interior() also checks the Hurwitz minor.
  bool interior_stable = false;
};

using Spectrum = std::array<std::complex<double>, 3>;

struct Equilibrium {
  FullState state;
  Spectrum eigenvalues;  // sorted by descending real part
  Stability classification = Stability::marginal;
};

struct EquilibriumReport {
  Equilibrium e1;
  Equilibrium e2;
  std::optional<Equilibrium> e_star;
};

struct RouthHurwitz {
  double p1 = 0, p2 = 0, p3 = 0;
  bool stable = false;
  double hurwitz_minor() const { return p1 * p2 - p3; }
};

struct PredatorSubsystemData {
  std::array<std::array<double, 2>, 2> M{};  // linear predator dynamics without prey
  double lambda_star = 0;
  Vec2 left_vec{};  // (P~_S, P~_H), normalized so P~_S = 1
  double n_bound = 0;  // prey bound max(N0, N_hat) used for dissipativity_M
  double dissipativity_M = 0;

  /// rho (P~_H - P~_S) N + P~_S P_S + P~_H P_H, the functional bounded by M.
  double weighted_sum(const FullParams& p, const FullState& s) const {
    return p.rho * (left_vec[1] - left_vec[0]) * s.N + left_vec[0] * s.P_S + left_vec[1] * s.P_H;
  }
};

struct LyapunovCoefficients {
  double c1 = 0;
  double c2 = 0;
};

// ---------------------------------------------------------------------------

inline Spectrum eigenvalues(const Mat3& j) {
  Eigen::Matrix3d a;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a(r, c) = j[r][c];
  Eigen::EigenSolver<Eigen::Matrix3d> solver(a, /*computeEigenvectors=*/false);
  Spectrum out;
  for (int i = 0; i < 3; ++i) out[i] = solver.eigenvalues()[i];
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return x.real() != y.real() ? x.real() > y.real() : x.imag() > y.imag();
  });
  return out;
}

inline double spectral_abscissa(const Spectrum& s) {
  return std::max({s[0].real(), s[1].real(), s[2].real()});
}

inline Stability classify(const Spectrum& s, double margin = kStabilityMargin) {
  const double a = spectral_abscissa(s);
  if (a < -margin) return Stability::stable;
  if (a > margin) return Stability::unstable;
  return Stability::marginal;
}

inline AssumptionReport check_assumptions(const FullParams& p) {
  p.validate();
  const double growth_N = p.beta_N - p.mu_N;
  const double growth_P = p.beta_P - p.mu_P;
  const double searching_growth = growth_P - p.eta;
  const double kr = p.kappa * p.rho;

  AssumptionReport r;
  r.a21_holds = growth_N > 0.0 && growth_P > 0.0 && searching_growth < 0.0;
  r.a22_holds = growth_P < -p.gamma / (p.mu_P + p.eta) * searching_growth;

  const double lhs = growth_N * growth_P * kr + p.delta * growth_P * (p.mu_P + p.eta);
  const double rhs = -p.delta * p.gamma * searching_growth;
  r.interior_exists = lhs > rhs;

  const double x = p.rho * p.kappa * p.n_hat();
  const double b = (p.mu_P + p.gamma - p.beta_P) * (p.mu_P + p.eta + x) - p.gamma * (x + p.beta_P);
  r.e2_stable = b > 0.0;

  const double stab_lhs = growth_P * (kr * growth_N + p.delta * (p.eta + p.gamma));
  const double stab_rhs = p.delta * (2.0 * p.gamma * p.eta - p.beta_P * growth_P);
  r.interior_stable = r.interior_exists && stab_lhs < stab_rhs;
  return r;
}

namespace detail {

inline void require_base_model(const FullParams& p) {
  if (!p.base_exponents()) {
    throw error(errc::unsupported_exponents,
                "closed forms require l = m = 1; use find_equilibrium for the generalized model");
  }
}

inline void require_standing_assumptions(const AssumptionReport& r) {
  if (!r.a21_holds) throw error(errc::assumption_violated, "growth-sign conditions fail");
  if (!r.a22_holds) throw error(errc::assumption_violated, "predator-extinction condition fails");
}

inline Equilibrium make_equilibrium(const FullParams& p, const FullState& s) {
  Equilibrium e;
  e.state = s;
  e.eigenvalues = eigenvalues(jacobian_full(p, s));
  e.classification = classify(e.eigenvalues);
  return e;
}

}  // namespace detail

/// Interior equilibrium from the closed forms; requires interior_exists.
inline FullState interior_equilibrium(const FullParams& p) {
  const double growth_N = p.beta_N - p.mu_N;
  const double growth_P = p.beta_P - p.mu_P;
  const double searching_growth = growth_P - p.eta;
  const double kr = p.kappa * p.rho;
  FullState s;
  s.N = (-growth_P * (p.mu_P + p.eta) - p.gamma * searching_growth) / (growth_P * kr);
  s.P_S = (p.delta * growth_P * (p.mu_P + p.eta) + p.delta * p.gamma * searching_growth +
           growth_N * growth_P * kr) /
          (growth_P * p.kappa * kr);
  s.P_H = -searching_growth / growth_P * s.P_S;
  return s;
}

inline EquilibriumReport equilibria(const FullParams& p) {
  const AssumptionReport a = check_assumptions(p);
  detail::require_standing_assumptions(a);
  detail::require_base_model(p);

  EquilibriumReport r;
  r.e1 = detail::make_equilibrium(p, {0.0, 0.0, 0.0});
  r.e2 = detail::make_equilibrium(p, {p.n_hat(), 0.0, 0.0});
  if (a.interior_exists) r.e_star = detail::make_equilibrium(p, interior_equilibrium(p));
  return r;
}

/// Characteristic-polynomial coefficients at the interior equilibrium from the
/// rational closed forms, with the Routh-Hurwitz verdict. A vanishing minor
/// counts as not stable.
inline RouthHurwitz routh_hurwitz_interior(const FullParams& p) {
  const AssumptionReport a = check_assumptions(p);
  detail::require_base_model(p);
  if (!a.interior_exists) {
    throw error(errc::no_interior_equilibrium, "interior equilibrium does not exist");
  }
  const double growth_N = p.beta_N - p.mu_N;
  const double growth_P = p.beta_P - p.mu_P;
  const double handling_net = growth_P - p.gamma;  // beta_P - mu_P - gamma
  const double searching_growth = growth_P - p.eta;
  const double kr = p.kappa * p.rho;
  const double det_m = handling_net * (p.mu_P + p.eta) + p.gamma * p.beta_P;

  RouthHurwitz rh;
  rh.p1 = (-kr * handling_net * growth_P - p.gamma * (p.delta + kr) * searching_growth -
           p.delta * growth_P * (p.mu_P + p.eta)) /
          (kr * growth_P);
  rh.p2 = det_m *
          (growth_P * (p.delta * (p.beta_P + p.eta + p.gamma) + kr * growth_N) -
           2.0 * p.delta * p.gamma * p.eta) /
          (kr * growth_P * growth_P);
  rh.p3 = det_m *
          (-p.delta * handling_net * (p.mu_P + p.eta) - p.gamma * p.delta * p.beta_P -
           kr * growth_P * growth_N) /
          (kr * growth_P);
  rh.stable = rh.p1 > 0.0 && rh.hurwitz_minor() > 0.0 && rh.p3 > 0.0;
  return rh;
}

/// Decay rate and positive left eigenvector of the prey-free predator
/// dynamics, and the dissipativity constant built from them.
inline PredatorSubsystemData predator_subsystem(const FullParams& p,
                                                std::optional<double> n0 = std::nullopt) {
  const AssumptionReport a = check_assumptions(p);
  detail::require_standing_assumptions(a);

  const double loss_S = p.mu_P + p.eta;
  const double loss_H = -(p.beta_P - p.mu_P - p.gamma);
  auto psi = [&](double lambda) {
    return (loss_S - lambda) / p.beta_P * (loss_H - lambda) / p.gamma;
  };
  if (!(psi(0.0) > 1.0) || !(loss_H > 0.0)) {
    throw error(errc::assumption_violated, "Psi(0) <= 1: predator-extinction condition fails");
  }

  // Psi decreases on the bracket, Psi(0) > 1 and Psi(upper) = 0.
  double lo = 0.0;
  double hi = std::min(loss_S, loss_H);
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    (psi(mid) > 1.0 ? lo : hi) = mid;
  }

  PredatorSubsystemData d;
  d.M = {{{-loss_S, p.gamma}, {p.beta_P, -loss_H}}};
  d.lambda_star = 0.5 * (lo + hi);
  d.left_vec = {1.0, (loss_S - d.lambda_star) / p.beta_P};
  d.n_bound = std::max(n0.value_or(p.n_hat()), p.n_hat());
  d.dissipativity_M = p.rho * (d.left_vec[1] - d.left_vec[0]) * p.beta_N * d.n_bound /
                      std::min(p.mu_N, d.lambda_star);
  return d;
}

/// Weights (c1, c2) of the extinction Lyapunov function with c2 = c1 + 1/rho,
/// c1 taken at the midpoint of its feasible interval.
inline LyapunovCoefficients lyapunov_coefficients(const FullParams& p) {
  p.validate();
  const double x = p.kappa * p.n_hat();
  const double growth_P = p.beta_P - p.mu_P;
  const double lower = (x + p.beta_P / p.rho) / (p.mu_P + p.eta - p.beta_P);
  const double upper = (p.mu_P + p.gamma - p.beta_P) / (p.rho * growth_P);
  if (!(growth_P > 0.0) || !(p.mu_P + p.eta - p.beta_P > 0.0) || !(lower < upper)) {
    throw error(errc::empty_feasible_interval,
                "no (c1, c2) satisfies both descent inequalities: E2 is not stable");
  }
  LyapunovCoefficients c;
  c.c1 = 0.5 * (lower + upper);
  c.c2 = c.c1 + 1.0 / p.rho;
  return c;
}

namespace detail {

// x - log(1 + x) without cancellation near x = 0.
inline double log_excess(double x) {
  if (std::abs(x) < 1e-3) {
    double term = x * x / 2.0;
    double sum = 0.0;
    for (int k = 2; k < 12; ++k) {
      sum += term;
      term *= -x * static_cast<double>(k) / static_cast<double>(k + 1);
    }
    return sum;
  }
  return x - std::log1p(x);
}

}  // namespace detail

/// V = (N - N^) - N^ ln(N / N^) + c1 P_S + c2 P_H.
inline double lyapunov_value(const FullParams& p, const LyapunovCoefficients& c, const FullState& s) {
  if (!(s.N > 0.0)) throw error(errc::invalid_argument, "Lyapunov function diverges at N = 0");
  const double n_hat = p.n_hat();
  return n_hat * detail::log_excess((s.N - n_hat) / n_hat) + c.c1 * s.P_S + c.c2 * s.P_H;
}

/// Samples random interior states and checks the off-diagonal Jacobian sign
/// pattern that makes the system competitive for the cone {N>=0, P_S>=0, P_H<=0}.
inline bool k_competitive_check(const FullParams& p, int samples, std::uint64_t seed = 2024) {
  p.validate();
  detail::require_base_model(p);
  std::mt19937_64 rng(seed);
  const double scale = std::max(1.0, p.n_hat());
  std::uniform_real_distribution<double> log_u(-6.0, 2.0);
  for (int i = 0; i < samples; ++i) {
    const FullState s{scale * std::pow(10.0, log_u(rng)), scale * std::pow(10.0, log_u(rng)),
                      scale * std::pow(10.0, log_u(rng))};
    const Mat3 j = jacobian_full(p, s);
    if (!(j[0][1] <= 0 && j[0][2] == 0 && j[1][0] <= 0 && j[1][2] >= 0 && j[2][0] >= 0 &&
          j[2][1] >= 0)) {
      return false;
    }
  }
  return true;
}

/// Damped Newton iteration on rhs_full; used for the generalized-exponent
/// model where no closed forms exist.
inline FullState find_equilibrium(const FullParams& p, FullState guess, double tol = 1e-12,
                                  int max_iter = 100) {
  p.validate();
  Eigen::Vector3d x(guess.N, guess.P_S, guess.P_H);
  for (int it = 0; it < max_iter; ++it) {
    const FullState s = FullState::from_array({x[0], x[1], x[2]});
    const FullState f = rhs_full(p, s);
    const Eigen::Vector3d fv(f.N, f.P_S, f.P_H);
    const Mat3 j = jacobian_full(p, s);
    Eigen::Matrix3d a;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) a(r, c) = j[r][c];
    const Eigen::Vector3d dx = a.fullPivLu().solve(-fv);
    double t = 1.0;
    while (t > 1e-6 && ((x + t * dx).array() < 0.0).any()) t *= 0.5;
    x += t * dx;
    if (dx.norm() * t <= tol * (1.0 + x.norm())) break;
  }
  return FullState::from_array({x[0], x[1], x[2]});
}

}  // namespace holling
