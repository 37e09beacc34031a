#pragma once

// Numerical studies of the model's long-run and singular-limit behaviour.

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "holling/analysis.hpp"
#include "holling/error.hpp"
#include "holling/integrator.hpp"
#include "holling/model.hpp"

namespace holling {

struct SupErrors {
  double N = 0;
  double P = 0;
};

struct LimitStudyResult {
  std::vector<double> epsilons;
  std::vector<double> sup_err_N;  // sup |N^eps - N|
  std::vector<double> sup_err_P;  // sup |P_S^eps + P_H^eps - P|
  std::vector<double> rel_err_N;  // sup_err_N / sup |N|
  std::vector<double> rel_err_P;  // sup_err_P / sup |P|
  double horizon = 0;
};

struct LimitStudyOptions {
  double grid_step = 0.01;
  IntegratorConfig integrator;
  /// Raw (P_S0, P_H0) for the full system instead of the slow-manifold split.
  std::optional<std::pair<double, double>> split_override;
  bool parallel = true;
};

struct SplitState {
  double P_S0 = 0;
  double P_H0 = 0;
};

/// Quasi-steady split of P0 into searching and handling predators.
inline SplitState slow_manifold_split(double chi, double kappa, double N0, double P0) {
  if (!(chi >= 0.0 && kappa >= 0.0 && N0 >= 0.0 && P0 >= 0.0)) {
    throw error(errc::invalid_argument, "split inputs must be >= 0");
  }
  const double x = chi * kappa * N0;
  SplitState s;
  s.P_S0 = P0 / (1.0 + x);
  s.P_H0 = P0 - s.P_S0;
  return s;
}

/// Sup-norm gaps between a full-model and a reduced-model trajectory sampled
/// on the same grid.
inline SupErrors sup_errors(const Trajectory<3>& full, const Trajectory<2>& reduced) {
  if (full.size() != reduced.size()) {
    throw error(errc::invalid_argument, "trajectories sampled on different grids");
  }
  SupErrors e;
  for (std::size_t i = 0; i < full.size(); ++i) {
    const auto& f = full.states[i];
    const auto& r = reduced.states[i];
    e.N = std::max(e.N, std::abs(f[0] - r[0]));
    e.P = std::max(e.P, std::abs(f[1] + f[2] - r[1]));
  }
  return e;
}

inline Trajectory<2> simulate_reduced(const ReducedParams& p, const ReducedState& ic, double tau,
                                      double grid_step, const IntegratorConfig& cfg = {}) {
  p.validate();
  const auto grid = uniform_grid(0.0, tau, grid_step);
  return integrate<2>(reduced_field(p), ic.to_array(), 0.0, tau, grid, cfg);
}

inline Trajectory<3> simulate_full(const FullParams& p, const FullState& ic, double tau,
                                   double grid_step, const IntegratorConfig& cfg = {}) {
  p.validate();
  ic.validate();
  const auto grid = uniform_grid(0.0, tau, grid_step);
  return integrate<3>(full_field(p), ic.to_array(), 0.0, tau, grid, cfg);
}

/// Compares the scaled full system at each epsilon with the reduced model on
/// [0, tau]. Errors are sup-norms over a uniform grid.
inline LimitStudyResult singular_limit_study(std::span<const double> eps_list,
                                             const ReducedParams& reduced, const ReducedState& ic,
                                             double tau, const LimitStudyOptions& opt = {}) {
  reduced.validate();
  if (eps_list.empty()) throw error(errc::invalid_argument, "epsilon list is empty");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0)) throw error(errc::invalid_argument, "epsilons must be > 0");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1])) {
      throw error(errc::invalid_argument, "epsilons must be strictly descending");
    }
  }
  if (!(tau > 0.0)) throw error(errc::invalid_argument, "horizon must be > 0");

  std::vector<FullParams> full;
  for (double eps : eps_list) {
    const FullParams fp = scaled_params(reduced, eps);
    const AssumptionReport a = check_assumptions(fp);
    if (!a.a21_holds || !a.a22_holds) {
      throw error(errc::assumption_violated,
                  "scaled parameters violate standing assumptions at epsilon=" + std::to_string(eps));
    }
    full.push_back(fp);
  }

  const SplitState split = opt.split_override
                               ? SplitState{opt.split_override->first, opt.split_override->second}
                               : slow_manifold_split(reduced.chi, reduced.kappa, ic.N, ic.P);
  const FullState full_ic{ic.N, split.P_S0, split.P_H0};

  const Trajectory<2> ref = simulate_reduced(reduced, ic, tau, opt.grid_step, opt.integrator);
  double scale_N = 0, scale_P = 0;
  for (const auto& s : ref.states) {
    scale_N = std::max(scale_N, std::abs(s[0]));
    scale_P = std::max(scale_P, std::abs(s[1]));
  }

  auto run = [&](std::size_t i) {
    return sup_errors(simulate_full(full[i], full_ic, tau, opt.grid_step, opt.integrator), ref);
  };
  std::vector<SupErrors> errs(eps_list.size());
  if (opt.parallel && eps_list.size() > 1) {
    std::vector<std::future<SupErrors>> jobs;
    for (std::size_t i = 0; i < eps_list.size(); ++i) jobs.push_back(std::async(std::launch::async, run, i));
    for (std::size_t i = 0; i < jobs.size(); ++i) errs[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < eps_list.size(); ++i) errs[i] = run(i);
  }

  LimitStudyResult r;
  r.horizon = tau;
  r.epsilons.assign(eps_list.begin(), eps_list.end());
  for (const auto& e : errs) {
    r.sup_err_N.push_back(e.N);
    r.sup_err_P.push_back(e.P);
    r.rel_err_N.push_back(scale_N > 0 ? e.N / scale_N : e.N);
    r.rel_err_P.push_back(scale_P > 0 ? e.P / scale_P : e.P);
  }
  return r;
}

/// Largest relative excess of a scaled-system trajectory over the growth
/// envelopes N0 e^{(beta_N - mu_N) t} and P0 e^{(beta_P - mu_P) t}; values
/// <= 0 mean the envelopes hold.
inline SupErrors growth_envelope_excess(const FullParams& p, const Trajectory<3>& traj) {
  if (traj.size() == 0) return {};
  const auto& first = traj.states.front();
  const double n0 = first[0];
  const double p0 = first[1] + first[2];
  const double t0 = traj.times.front();
  SupErrors worst{-1.0, -1.0};
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double dt = traj.times[i] - t0;
    const double env_N = n0 * std::exp((p.beta_N - p.mu_N) * dt);
    const double env_P = p0 * std::exp((p.beta_P - p.mu_P) * dt);
    const auto& s = traj.states[i];
    if (env_N > 0) worst.N = std::max(worst.N, (s[0] - env_N) / env_N);
    if (env_P > 0) worst.P = std::max(worst.P, (s[1] + s[2] - env_P) / env_P);
  }
  return worst;
}

struct ExtinctionResult {
  FullState terminal;
  bool converged_to_E2 = false;
  bool converged_to_E1 = false;
  Trajectory<3> trajectory;
};

/// Runs a trajectory in the predator-extinction regime and checks the
/// terminal state against E2 = (N^, 0, 0) (or E1 when N(0) = 0).
inline ExtinctionResult extinction_run(const FullParams& p, const FullState& ic, double horizon,
                                       double tol_ext = 1e-6, double grid_step = 0.1,
                                       const IntegratorConfig& cfg = {}) {
  const AssumptionReport a = check_assumptions(p);
  if (!a.e2_stable) {
    throw error(errc::hypothesis_violated, "E2 is not locally stable; extinction not guaranteed");
  }
  ic.validate();
  if (!(horizon > 0.0)) throw error(errc::invalid_argument, "horizon must be > 0");

  ExtinctionResult r;
  r.trajectory = simulate_full(p, ic, horizon, grid_step, cfg);
  r.terminal = FullState::from_array(r.trajectory.final_state);
  const double n_hat = p.n_hat();
  const bool predators_gone = r.terminal.predators() < tol_ext;
  r.converged_to_E2 = predators_gone && std::abs(r.terminal.N - n_hat) < tol_ext * n_hat;
  r.converged_to_E1 = predators_gone && r.terminal.N < tol_ext;
  return r;
}

struct PersistenceMinima {
  double min_N = 0;
  double min_P = 0;  // P_S + P_H
};

/// Per-trajectory minima of N and P_S + P_H over [horizon - window, horizon].
inline std::vector<PersistenceMinima> persistence_probe(const FullParams& p,
                                                        std::span<const FullState> ics,
                                                        double horizon, double window,
                                                        double grid_step = 0.01,
                                                        const IntegratorConfig& cfg = {}) {
  const AssumptionReport a = check_assumptions(p);
  if (!a.interior_exists) {
    throw error(errc::no_interior_equilibrium, "persistence requires an interior equilibrium");
  }
  if (!(window > 0.0 && window <= horizon)) {
    throw error(errc::invalid_argument, "window must lie in (0, horizon]");
  }
  for (const auto& ic : ics) {
    ic.validate();
    if (!(ic.N > 0.0 && ic.predators() > 0.0)) {
      throw error(errc::invalid_argument, "initial conditions must be interior");
    }
  }
  const auto grid = uniform_grid(horizon - window, horizon, grid_step);
  std::vector<std::future<PersistenceMinima>> jobs;
  for (const auto& ic : ics) {
    jobs.push_back(std::async(std::launch::async, [&, ic] {
      const auto traj = integrate<3>(full_field(p), ic.to_array(), 0.0, horizon, grid, cfg);
      PersistenceMinima m{traj.states.front()[0], traj.states.front()[1] + traj.states.front()[2]};
      for (const auto& s : traj.states) {
        m.min_N = std::min(m.min_N, s[0]);
        m.min_P = std::min(m.min_P, s[1] + s[2]);
      }
      return m;
    }));
  }
  std::vector<PersistenceMinima> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

struct CycleReport {
  bool found = false;
  double period = 0;
  double amplitude_N = 0;
  double amplitude_P = 0;
  double transient_discarded = 0;
  std::vector<double> peak_times;
  double max_weighted_sum = 0;  // sup of the dissipativity functional on the orbit
};

struct CycleOptions {
  double sample_step = 0.01;
  double spacing_cv = 0.01;   // coefficient of variation allowed between peaks
  double height_spread = 0.01;  // relative spread of peak heights
  IntegratorConfig integrator;
};

/// Settles a trajectory, then reads the period off successive maxima of N(t).
inline CycleReport detect_limit_cycle(const FullParams& p, const FullState& ic, double settle,
                                      double observe, const CycleOptions& opt = {}) {
  const AssumptionReport a = check_assumptions(p);
  if (!a.interior_exists) {
    throw error(errc::hypothesis_violated, "limit cycles need an interior equilibrium");
  }
  if (routh_hurwitz_interior(p).stable) {
    throw error(errc::hypothesis_violated, "interior equilibrium is stable");
  }
  ic.validate();
  if (!(ic.N > 0.0 && ic.predators() > 0.0)) {
    throw error(errc::invalid_argument, "initial condition must be interior");
  }
  if (!(settle >= 0.0 && observe > 0.0)) {
    throw error(errc::invalid_argument, "settle must be >= 0 and observe > 0");
  }

  const auto grid = uniform_grid(settle, settle + observe, opt.sample_step);
  const auto traj =
      integrate<3>(full_field(p), ic.to_array(), 0.0, settle + observe, grid, opt.integrator);

  CycleReport r;
  r.transient_discarded = settle;
  std::vector<double> heights;
  double n_min = traj.states.front()[0], n_max = n_min;
  double p_min = traj.states.front()[1] + traj.states.front()[2], p_max = p_min;
  const PredatorSubsystemData d = predator_subsystem(p);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& s = traj.states[i];
    n_min = std::min(n_min, s[0]);
    n_max = std::max(n_max, s[0]);
    p_min = std::min(p_min, s[1] + s[2]);
    p_max = std::max(p_max, s[1] + s[2]);
    r.max_weighted_sum = std::max(r.max_weighted_sum, d.weighted_sum(p, FullState::from_array(s)));
    if (i == 0 || i + 1 == traj.size()) continue;
    const double prev = traj.states[i - 1][0], cur = s[0], nxt = traj.states[i + 1][0];
    if (cur > prev && cur >= nxt) {
      // Parabolic refinement through the three samples.
      const double denom = prev - 2.0 * cur + nxt;
      const double shift = denom != 0.0 ? 0.5 * (prev - nxt) / denom : 0.0;
      r.peak_times.push_back(traj.times[i] + shift * opt.sample_step);
      heights.push_back(cur - 0.25 * (prev - nxt) * shift);
    }
  }
  r.amplitude_N = n_max - n_min;
  r.amplitude_P = p_max - p_min;

  const double mean_N = 0.5 * (n_max + n_min);
  if (r.peak_times.size() < 3 || r.amplitude_N <= 1e-6 * std::max(1.0, mean_N)) {
    throw error(errc::no_cycle_detected, "fewer than three prey maxima in the observation window");
  }
  std::vector<double> spacing;
  for (std::size_t i = 1; i < r.peak_times.size(); ++i) {
    spacing.push_back(r.peak_times[i] - r.peak_times[i - 1]);
  }
  const double mean = std::accumulate(spacing.begin(), spacing.end(), 0.0) / spacing.size();
  double var = 0.0;
  for (double s : spacing) var += (s - mean) * (s - mean);
  const double cv = std::sqrt(var / spacing.size()) / mean;
  const auto [hmin, hmax] = std::minmax_element(heights.begin(), heights.end());
  const double spread = (*hmax - *hmin) / std::abs(*hmax);
  if (!(cv < opt.spacing_cv) || !(spread < opt.height_spread)) {
    throw error(errc::no_cycle_detected, "prey maxima are not periodic");
  }
  r.found = true;
  r.period = mean;
  return r;
}

/// Smallest kappa above p.kappa (rho fixed) at which the interior equilibrium
/// loses stability, located by bisection on the Routh-Hurwitz verdict.
inline double stability_boundary_kappa(FullParams p, double tol = 1e-12) {
  if (!routh_hurwitz_interior(p).stable) {
    throw error(errc::invalid_argument, "interior equilibrium already unstable");
  }
  double lo = p.kappa;
  double hi = 2.0 * lo;
  auto stable_at = [&](double kappa) {
    p.kappa = kappa;
    return routh_hurwitz_interior(p).stable;
  };
  for (int i = 0; i < 200 && stable_at(hi); ++i) {
    lo = hi;
    hi *= 2.0;
  }
  if (stable_at(hi)) throw error(errc::invalid_argument, "no stability boundary in kappa");
  while (hi - lo > tol * hi) {
    const double mid = 0.5 * (lo + hi);
    (stable_at(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace holling
