#pragma once

// Parameter/state records and vector fields of the handling/searching
// predator-prey model, its fast-handling scaling and the reduced
// Rosenzweig-MacArthur limit.

#include <array>
#include <cmath>
#include <string>

#include "holling/error.hpp"

namespace holling {

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

namespace detail {

inline void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw error(errc::invalid_argument, std::string(name) + " must be finite and > 0");
  }
}

inline void require_exponent(double value, const char* name) {
  if (!(value >= 1.0) || !std::isfinite(value)) {
    throw error(errc::invalid_argument, std::string(name) + " must be finite and >= 1");
  }
}

// N^e for the model exponents; exact for e == 1.
inline double power(double n, double e) { return e == 1.0 ? n : std::pow(n, e); }

}  // namespace detail

/// Rate constants of the three-compartment model. `delta` is the quadratic
/// crowding coefficient, not a carrying capacity; see convert_logistic().
struct FullParams {
  double beta_N = 0;  // prey birth rate
  double mu_N = 0;    // prey death rate
  double delta = 0;   // quadratic crowding coefficient
  double kappa = 0;   // encounter coefficient
  double rho = 0;     // searching -> handling conversion factor
  double gamma = 0;   // handling -> searching return rate
  double mu_P = 0;    // predator death rate
  double eta = 0;     // extra mortality of searching predators
  double beta_P = 0;  // predator birth rate
  double l = 1;       // prey-consumption exponent
  double m = 1;       // state-transition exponent

  void validate() const {
    detail::require_positive(beta_N, "beta_N");
    detail::require_positive(mu_N, "mu_N");
    detail::require_positive(delta, "delta");
    detail::require_positive(kappa, "kappa");
    detail::require_positive(rho, "rho");
    detail::require_positive(gamma, "gamma");
    detail::require_positive(mu_P, "mu_P");
    detail::require_positive(eta, "eta");
    detail::require_positive(beta_P, "beta_P");
    detail::require_exponent(l, "l");
    detail::require_exponent(m, "m");
  }

  /// Prey-only carrying capacity (beta_N - mu_N) / delta.
  double n_hat() const { return (beta_N - mu_N) / delta; }

  bool base_exponents() const { return l == 1.0 && m == 1.0; }

  bool operator==(const FullParams&) const = default;
};

struct FullState {
  double N = 0;
  double P_S = 0;
  double P_H = 0;

  Vec3 to_array() const { return {N, P_S, P_H}; }
  static FullState from_array(const Vec3& v) { return {v[0], v[1], v[2]}; }
  double predators() const { return P_S + P_H; }

  void validate() const {
    if (!(N >= 0.0 && P_S >= 0.0 && P_H >= 0.0)) {
      throw error(errc::invalid_argument, "state components must be >= 0");
    }
  }

  bool operator==(const FullState&) const = default;
};

/// Parameters of the reduced (Rosenzweig-MacArthur form) model. Logistic
/// growth is parameterized by the carrying capacity K.
struct ReducedParams {
  double beta_N = 0;
  double mu_N = 0;
  double beta_P = 0;
  double mu_P = 0;
  double eta = 0;
  double K = 0;
  double kappa = 0;
  double chi = 0;  // handling-time factor
  double l = 1;
  double m = 1;

  void validate() const {
    detail::require_positive(beta_N, "beta_N");
    detail::require_positive(mu_N, "mu_N");
    detail::require_positive(beta_P, "beta_P");
    detail::require_positive(mu_P, "mu_P");
    detail::require_positive(eta, "eta");
    detail::require_positive(K, "K");
    detail::require_positive(kappa, "kappa");
    detail::require_positive(chi, "chi");
    detail::require_exponent(l, "l");
    detail::require_exponent(m, "m");
    if (!(beta_N > mu_N)) throw error(errc::invalid_argument, "beta_N must exceed mu_N");
    if (!(beta_P > mu_P)) throw error(errc::invalid_argument, "beta_P must exceed mu_P");
    if (!(beta_P - mu_P - eta < 0.0)) {
      throw error(errc::invalid_argument, "beta_P - mu_P - eta must be negative");
    }
  }

  bool operator==(const ReducedParams&) const = default;
};

struct ReducedState {
  double N = 0;
  double P = 0;

  Vec2 to_array() const { return {N, P}; }
  static ReducedState from_array(const Vec2& v) { return {v[0], v[1]}; }

  bool operator==(const ReducedState&) const = default;
};

/// Time derivative of the full model; with l = m = 1 this is the base
/// handling/searching system.
inline FullState rhs_full(const FullParams& p, const FullState& s) {
  const double n_l = detail::power(s.N, p.l);
  const double n_m = detail::power(s.N, p.m);
  const double capture = p.rho * p.kappa * n_m * s.P_S;  // searching -> handling flux
  const double release = p.gamma * s.P_H;                // handling -> searching flux
  return {
      (p.beta_N - p.mu_N) * s.N - p.delta * s.N * s.N - p.kappa * n_l * s.P_S,
      -(p.mu_P + p.eta) * s.P_S - capture + release,
      -p.mu_P * s.P_H + capture - release + p.beta_P * (s.P_S + s.P_H),
  };
}

inline ReducedState rhs_reduced(const ReducedParams& p, const ReducedState& s) {
  const double n_l = detail::power(s.N, p.l);
  const double handling = p.chi * p.kappa * detail::power(s.N, p.m);
  const double saturation = 1.0 + handling;
  return {
      (p.beta_N - p.mu_N) * s.N * (1.0 - s.N / p.K) - p.kappa * n_l * s.P / saturation,
      (p.beta_P - p.mu_P - p.eta) * s.P + p.eta * handling * s.P / saturation,
  };
}

/// Row i holds the partial derivatives of component i of rhs_full.
inline Mat3 jacobian_full(const FullParams& p, const FullState& s) {
  const double n_l = detail::power(s.N, p.l);
  const double n_m = detail::power(s.N, p.m);
  const double dn_l = p.l == 1.0 ? 1.0 : p.l * std::pow(s.N, p.l - 1.0);
  const double dn_m = p.m == 1.0 ? 1.0 : p.m * std::pow(s.N, p.m - 1.0);
  const double rk = p.rho * p.kappa;
  Mat3 j{};
  j[0] = {(p.beta_N - p.mu_N) - 2.0 * p.delta * s.N - p.kappa * dn_l * s.P_S, -p.kappa * n_l, 0.0};
  j[1] = {-rk * dn_m * s.P_S, -(p.mu_P + p.eta) - rk * n_m, p.gamma};
  j[2] = {rk * dn_m * s.P_S, rk * n_m + p.beta_P, p.beta_P - p.mu_P - p.gamma};
  return j;
}

struct Embedding {
  double rho = 0;
  double gamma = 0;
};

/// Fast-handling scaling: rho = chi / epsilon, gamma = 1 / epsilon.
inline Embedding epsilon_embed(double chi, double epsilon) {
  detail::require_positive(chi, "chi");
  detail::require_positive(epsilon, "epsilon");
  return {chi / epsilon, 1.0 / epsilon};
}

/// Quadratic crowding coefficient equivalent to carrying capacity K, so that
/// (beta_N - mu_N) N - delta N^2 == (beta_N - mu_N) N (1 - N / K).
inline double convert_logistic(double beta_N, double mu_N, double K) {
  if (!(beta_N > mu_N)) {
    throw error(errc::invalid_argument, "beta_N must exceed mu_N for logistic growth");
  }
  detail::require_positive(K, "K");
  return (beta_N - mu_N) / K;
}

/// Full-model parameters of the scaled system at a given epsilon.
inline FullParams scaled_params(const ReducedParams& r, double epsilon) {
  const Embedding e = epsilon_embed(r.chi, epsilon);
  FullParams p;
  p.beta_N = r.beta_N;
  p.mu_N = r.mu_N;
  p.delta = convert_logistic(r.beta_N, r.mu_N, r.K);
  p.kappa = r.kappa;
  p.rho = e.rho;
  p.gamma = e.gamma;
  p.mu_P = r.mu_P;
  p.eta = r.eta;
  p.beta_P = r.beta_P;
  p.l = r.l;
  p.m = r.m;
  return p;
}

/// Vector-field adapters for the integrator.
inline auto full_field(const FullParams& p) {
  return [p](double, const Vec3& y) { return rhs_full(p, FullState::from_array(y)).to_array(); };
}

inline auto reduced_field(const ReducedParams& p) {
  return [p](double, const Vec2& y) {
    return rhs_reduced(p, ReducedState::from_array(y)).to_array();
  };
}

/// Published hare-lynx estimates for the reduced model, rates per year.
inline ReducedParams hare_lynx_reference() {
  ReducedParams r;
  r.beta_N = 1.6567;
  r.mu_N = 1.0;
  r.K = 303000.0;
  r.kappa = 3.2e-5;
  r.chi = 0.11;
  r.beta_P = 8.5127;
  r.mu_P = 1.0 / 7.0;
  r.eta = 9.24;
  return r;
}

/// Reference parameter set with interior equilibrium (60, 2, 10).
inline FullParams canonical_params() {
  FullParams p;
  p.beta_N = 2.0;
  p.mu_N = 1.0;
  p.delta = 0.01;
  p.kappa = 0.2;
  p.rho = 0.5;
  p.gamma = 2.0;
  p.mu_P = 1.0;
  p.eta = 3.0;
  p.beta_P = 1.5;
  return p;
}

}  // namespace holling
