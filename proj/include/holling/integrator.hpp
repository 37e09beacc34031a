#pragma once

// Adaptive explicit Runge-Kutta integration (Dormand-Prince 5(4) pair, PI step
// control, 4th-order continuous extension for grid output).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "holling/error.hpp"

namespace holling {

struct IntegratorConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;  // individuals
  std::int64_t max_steps = 50'000'000;
  std::optional<double> initial_step;
  double positivity_floor = 0.0;

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
      throw error(errc::invalid_argument, "integrator tolerances must be > 0");
    }
    if (max_steps < 1) throw error(errc::invalid_argument, "max_steps must be >= 1");
    if (initial_step && !(*initial_step > 0.0)) {
      throw error(errc::invalid_argument, "initial_step must be > 0");
    }
    if (!(positivity_floor >= 0.0)) {
      throw error(errc::invalid_argument, "positivity_floor must be >= 0");
    }
  }
};

struct IntegratorStats {
  std::int64_t steps = 0;
  std::int64_t rejected = 0;
  std::int64_t rhs_evals = 0;
  std::int64_t clamp_events = 0;
};

template <std::size_t Dim>
struct Trajectory {
  using State = std::array<double, Dim>;

  std::vector<double> times;
  std::vector<State> states;
  State final_state{};  // state at t1, whether or not t1 is on the grid
  IntegratorStats stats;

  std::size_t size() const { return times.size(); }
};

/// Uniform grid t0, t0 + step, ... ending exactly at t1.
inline std::vector<double> uniform_grid(double t0, double t1, double step) {
  if (!(step > 0.0)) throw error(errc::invalid_argument, "grid step must be > 0");
  if (!(t1 >= t0)) throw error(errc::invalid_argument, "grid end precedes start");
  const double span = t1 - t0;
  const auto n = static_cast<std::size_t>(std::ceil(span / step - 1e-9));
  std::vector<double> grid;
  grid.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) grid.push_back(t0 + static_cast<double>(i) * step);
  grid.push_back(t1);
  return grid;
}

namespace dopri {

// Butcher tableau of the Dormand-Prince 5(4) pair.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                        a75 = -2187.0 / 6784, a76 = 11.0 / 84;
// Difference between the 5th- and 4th-order weights.
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension.
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

}  // namespace dopri

namespace detail {

template <std::size_t Dim>
void require_finite(const std::array<double, Dim>& v, double t) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw error(errc::non_finite_derivative, "non-finite derivative at t=" + std::to_string(t));
    }
  }
}

template <std::size_t Dim>
double rms_scaled(const std::array<double, Dim>& v, const std::array<double, Dim>& y0,
                  const std::array<double, Dim>& y1, const IntegratorConfig& cfg) {
  double sum = 0.0;
  for (std::size_t i = 0; i < Dim; ++i) {
    const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    sum += (v[i] / sc) * (v[i] / sc);
  }
  return std::sqrt(sum / static_cast<double>(Dim));
}

}  // namespace detail

/// Integrates y' = rhs(t, y) from t0 to t1 and reports the solution at each
/// point of `grid` (strictly increasing, inside [t0, t1]).
///
/// Components pushed below zero by an accepted step are reset to
/// cfg.positivity_floor; each reset is counted in stats.clamp_events.
template <std::size_t Dim, class Rhs>
Trajectory<Dim> integrate(Rhs&& rhs, const std::array<double, Dim>& y0, double t0, double t1,
                          std::span<const double> grid, const IntegratorConfig& cfg = {}) {
  using State = std::array<double, Dim>;
  using namespace dopri;
  cfg.validate();
  if (!std::isfinite(t0) || !std::isfinite(t1) || t1 < t0) {
    throw error(errc::invalid_argument, "integration interval must satisfy t0 <= t1");
  }
  for (double y : y0) {
    if (!(y >= 0.0)) throw error(errc::invalid_argument, "initial state must be >= 0");
  }
  const double slack = 1e-12 * std::max({1.0, std::abs(t0), std::abs(t1)});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < t0 - slack || grid[i] > t1 + slack) {
      throw error(errc::invalid_argument, "grid point outside integration interval");
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw error(errc::invalid_argument, "grid must be strictly increasing");
    }
  }

  Trajectory<Dim> out;
  out.times.reserve(grid.size());
  out.states.reserve(grid.size());
  IntegratorStats& stats = out.stats;

  auto eval = [&](double t, const State& y) {
    State f = rhs(t, y);
    ++stats.rhs_evals;
    detail::require_finite(f, t);
    return f;
  };
  auto emit = [&](double t, State y) {
    for (double& v : y) {
      if (v < 0.0) {
        v = cfg.positivity_floor;
        ++stats.clamp_events;
      }
    }
    out.times.push_back(t);
    out.states.push_back(y);
  };

  std::size_t next = 0;
  while (next < grid.size() && grid[next] <= t0 + slack) emit(grid[next++], y0);

  State y = y0;
  double t = t0;
  if (t1 == t0) {
    out.final_state = y;
    return out;
  }

  State k1 = eval(t, y);
  const double h_min = 1e2 * std::numeric_limits<double>::epsilon() *
                       std::max({1.0, std::abs(t0), std::abs(t1)});
  const double h_max = t1 - t0;

  double h;
  if (cfg.initial_step) {
    h = std::min(*cfg.initial_step, h_max);
  } else {
    // Hairer-Norsett-Wanner starting step heuristic.
    State zero{};
    const double d0 = detail::rms_scaled(y, zero, y, cfg);
    const double d1n = detail::rms_scaled(k1, zero, y, cfg);
    double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    h0 = std::min(h0, h_max);
    State y1;
    for (std::size_t i = 0; i < Dim; ++i) y1[i] = y[i] + h0 * k1[i];
    const State f1 = eval(t + h0, y1);
    State df;
    for (std::size_t i = 0; i < Dim; ++i) df[i] = f1[i] - k1[i];
    const double d2 = detail::rms_scaled(df, zero, y, cfg) / h0;
    const double dmax = std::max(d1n, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
    h = std::min({100.0 * h0, h1, h_max});
  }

  // PI controller constants (Hairer's DOPRI5 defaults).
  constexpr double safe = 0.9, beta = 0.04, expo = 0.2 - beta * 0.75;
  constexpr double fac_min = 0.2, fac_max = 10.0;
  double fac_old = 1e-4;
  bool last_rejected = false;

  State k2, k3, k4, k5, k6, k7, ys, y_new, err;
  while (t < t1) {
    if (stats.steps + stats.rejected >= cfg.max_steps) {
      throw error(errc::budget_exhausted, "step budget exhausted at t=" + std::to_string(t));
    }
    const double remaining = t1 - t;
    const bool final_step = h >= remaining || remaining <= h_min;
    if (final_step) h = remaining;
    if (h < h_min && !final_step) {
      throw error(errc::step_underflow, "step size underflow at t=" + std::to_string(t));
    }

    for (std::size_t i = 0; i < Dim; ++i) ys[i] = y[i] + h * a21 * k1[i];
    k2 = eval(t + c2 * h, ys);
    for (std::size_t i = 0; i < Dim; ++i) ys[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    k3 = eval(t + c3 * h, ys);
    for (std::size_t i = 0; i < Dim; ++i) {
      ys[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    }
    k4 = eval(t + c4 * h, ys);
    for (std::size_t i = 0; i < Dim; ++i) {
      ys[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    }
    k5 = eval(t + c5 * h, ys);
    for (std::size_t i = 0; i < Dim; ++i) {
      ys[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    }
    k6 = eval(t + h, ys);
    for (std::size_t i = 0; i < Dim; ++i) {
      y_new[i] =
          y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    }
    k7 = eval(t + h, y_new);
    for (std::size_t i = 0; i < Dim; ++i) {
      err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    }
    const double err_norm = detail::rms_scaled(err, y, y_new, cfg);
    const double fac11 = std::pow(std::max(err_norm, 1e-300), expo);

    if (err_norm <= 1.0 || (final_step && remaining <= h_min)) {
      ++stats.steps;
      const double t_new = final_step ? t1 : t + h;

      // Grid points inside (t, t_new] from the continuous extension.
      while (next < grid.size() && grid[next] <= t_new + (final_step ? slack : 0.0)) {
        const double theta = std::clamp((grid[next] - t) / h, 0.0, 1.0);
        const double theta1 = 1.0 - theta;
        State yo;
        for (std::size_t i = 0; i < Dim; ++i) {
          const double diff = y_new[i] - y[i];
          const double bspl = h * k1[i] - diff;
          const double r4 = diff - h * k7[i] - bspl;
          const double r5 = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                 d6 * k6[i] + d7 * k7[i]);
          yo[i] = y[i] + theta * (diff + theta1 * (bspl + theta * (r4 + theta1 * r5)));
        }
        emit(grid[next++], yo);
      }

      bool clamped = false;
      for (double& v : y_new) {
        if (v < 0.0) {
          v = cfg.positivity_floor;
          ++stats.clamp_events;
          clamped = true;
        }
      }
      y = y_new;
      t = t_new;
      k1 = clamped ? eval(t, y) : k7;

      double fac = fac11 / std::pow(fac_old, beta);
      fac = std::clamp(fac / safe, 1.0 / fac_max, 1.0 / fac_min);
      double h_new = h / fac;
      if (last_rejected) h_new = std::min(h_new, h);
      fac_old = std::max(err_norm, 1e-4);
      last_rejected = false;
      h = h_new;
    } else {
      ++stats.rejected;
      h /= std::min(1.0 / fac_min, fac11 / safe);
      last_rejected = true;
    }
  }

  out.final_state = y;
  return out;
}

/// Convenience overload returning only the state at t1.
template <std::size_t Dim, class Rhs>
std::array<double, Dim> integrate_to(Rhs&& rhs, const std::array<double, Dim>& y0, double t0,
                                     double t1, const IntegratorConfig& cfg = {}) {
  return integrate<Dim>(std::forward<Rhs>(rhs), y0, t0, t1, std::span<const double>{}, cfg)
      .final_state;
}

}  // namespace holling
