#pragma once

// Least-squares estimation of reduced-model parameters against the
// 1900-1920 Hudson Bay hare-lynx record.

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "holling/error.hpp"
#include "holling/integrator.hpp"
#include "holling/model.hpp"

namespace holling {

struct Dataset {
  std::vector<int> years;
  std::vector<double> hares;  // individuals
  std::vector<double> lynx;   // individuals

  std::size_t size() const { return years.size(); }

  void validate() const {
    if (years.size() != hares.size() || years.size() != lynx.size()) {
      throw error(errc::invalid_argument, "dataset columns differ in length");
    }
    if (years.empty()) throw error(errc::invalid_argument, "dataset is empty");
    for (std::size_t i = 0; i < years.size(); ++i) {
      if (i > 0 && years[i] <= years[i - 1]) {
        throw error(errc::monotonicity,
                    "row " + std::to_string(i + 1) + ": years must be strictly increasing");
      }
      if (!(hares[i] > 0.0) || !(lynx[i] > 0.0) || !std::isfinite(hares[i]) ||
          !std::isfinite(lynx[i])) {
        throw error(errc::invalid_argument,
                    "row " + std::to_string(i + 1) + ": counts must be positive");
      }
    }
  }
};

/// Hudson Bay Company record, 1900-1920, converted from thousands.
inline Dataset embedded_dataset() {
  static constexpr std::array<double, 21> hares_k{30,   47.2, 70.2, 77.4, 36.3, 20.6, 18.1,
                                                  21.4, 22,   25.4, 27.1, 40.3, 57,   76.6,
                                                  52.3, 19.5, 11.2, 7.6,  14.6, 16.2, 24.7};
  static constexpr std::array<double, 21> lynx_k{4,    6.1,  9.8,  35.2, 59.4, 41.7, 19,
                                                 13,   8.3,  9.1,  7.4,  8,    12.3, 19.5,
                                                 45.7, 51.1, 29.7, 15.8, 9.7,  10.1, 8.6};
  Dataset d;
  for (std::size_t i = 0; i < hares_k.size(); ++i) {
    d.years.push_back(1900 + static_cast<int>(i));
    d.hares.push_back(hares_k[i] * 1e3);
    d.lynx.push_back(lynx_k[i] * 1e3);
  }
  return d;
}

inline constexpr std::string_view kDatasetHeader = "year,hares_thousands,lynx_thousands";

/// Parses `year,hares_thousands,lynx_thousands` CSV; counts are scaled to
/// individuals.
inline Dataset parse_dataset(std::istream& in) {
  Dataset d;
  std::string line;
  std::size_t row = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  if (!std::getline(in, line) || trim(line) != kDatasetHeader) {
    throw error(errc::parse_error, "row 1: expected header '" + std::string(kDatasetHeader) + "'");
  }
  row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    std::stringstream ss(line);
    std::string cells[3];
    std::string extra;
    for (auto& c : cells) {
      if (!std::getline(ss, c, ',')) {
        throw error(errc::parse_error, "row " + std::to_string(row) + ": expected 3 columns");
      }
    }
    if (std::getline(ss, extra, ',')) {
      throw error(errc::parse_error, "row " + std::to_string(row) + ": expected 3 columns");
    }
    try {
      std::size_t used = 0;
      const std::string y = trim(cells[0]);
      const int year = std::stoi(y, &used);
      if (used != y.size()) throw std::invalid_argument("year");
      double vals[2];
      for (int k = 0; k < 2; ++k) {
        const std::string c = trim(cells[k + 1]);
        vals[k] = std::stod(c, &used);
        if (used != c.size()) throw std::invalid_argument("count");
      }
      d.years.push_back(year);
      d.hares.push_back(vals[0] * 1e3);
      d.lynx.push_back(vals[1] * 1e3);
    } catch (const std::logic_error&) {
      throw error(errc::parse_error, "row " + std::to_string(row) + ": malformed number");
    }
  }
  d.validate();
  return d;
}

inline Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::parse_error, "cannot open dataset '" + path + "'");
  return parse_dataset(in);
}

/// Integrator settings used for every objective evaluation.
inline IntegratorConfig objective_integrator() {
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-8;
  cfg.max_steps = 1'000'000;
  return cfg;
}

/// Reduced-model trajectory sampled at the data years, started from the first
/// data row.
inline Trajectory<2> fitted_series(const ReducedParams& p, const Dataset& d,
                                   const IntegratorConfig& cfg = objective_integrator()) {
  p.validate();
  d.validate();
  std::vector<double> grid;
  for (int y : d.years) grid.push_back(static_cast<double>(y - d.years.front()));
  return integrate<2>(reduced_field(p), Vec2{d.hares.front(), d.lynx.front()}, 0.0, grid.back(),
                      grid, cfg);
}

/// Sum over data years of squared residuals of both series, in individuals^2.
inline double objective_sse(const ReducedParams& p, const Dataset& d,
                            const IntegratorConfig& cfg = objective_integrator()) {
  const auto traj = fitted_series(p, d, cfg);
  double sse = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double rn = traj.states[i][0] - d.hares[i];
    const double rp = traj.states[i][1] - d.lynx[i];
    sse += rn * rn + rp * rp;
  }
  return sse;
}

// ---------------------------------------------------------------------------
// Parameter naming

struct ParamField {
  std::string_view name;
  double ReducedParams::*member;
};

inline constexpr std::array<ParamField, 10> kReducedFields{{
    {"beta_N", &ReducedParams::beta_N},
    {"mu_N", &ReducedParams::mu_N},
    {"beta_P", &ReducedParams::beta_P},
    {"mu_P", &ReducedParams::mu_P},
    {"eta", &ReducedParams::eta},
    {"K", &ReducedParams::K},
    {"kappa", &ReducedParams::kappa},
    {"chi", &ReducedParams::chi},
    {"l", &ReducedParams::l},
    {"m", &ReducedParams::m},
}};

inline double ReducedParams::*reduced_member(std::string_view name) {
  for (const auto& f : kReducedFields) {
    if (f.name == name) return f.member;
  }
  throw error(errc::invalid_argument, "unknown parameter '" + std::string(name) + "'");
}

struct Bounds {
  double lo = 0;
  double hi = std::numeric_limits<double>::infinity();
};

struct FitConfig {
  std::vector<std::string> free_params;
  std::map<std::string, double> fixed_values;
  std::map<std::string, double> initial_guess;
  std::map<std::string, Bounds> bounds;
  int max_iters = 4000;
  double tolerance = 1e-7;  // simplex diameter in log-space
  double initial_step = 0.05;  // log-space simplex edge

  /// Reference setup: mu_N = 1 and mu_P = 1/7 fixed, exponents 1, the fitted
  /// rows free and started from their reported values.
  static FitConfig hare_lynx_default() {
    FitConfig c;
    const ReducedParams t = hare_lynx_reference();
    c.free_params = {"beta_N", "K", "kappa", "chi", "beta_P", "eta"};
    c.fixed_values = {{"mu_N", t.mu_N}, {"mu_P", t.mu_P}, {"l", 1.0}, {"m", 1.0}};
    for (const auto& name : c.free_params) c.initial_guess[name] = t.*reduced_member(name);
    return c;
  }

  void validate() const {
    std::map<std::string, int> seen;
    for (const auto& n : free_params) {
      reduced_member(n);
      ++seen[n];
      if (!initial_guess.contains(n)) {
        throw error(errc::invalid_argument, "free parameter '" + n + "' has no initial guess");
      }
      const double g = initial_guess.at(n);
      const Bounds b = bound(n);
      if (!(g > 0.0) || g < b.lo || g > b.hi) {
        throw error(errc::invalid_argument, "initial guess for '" + n + "' outside its bounds");
      }
    }
    for (const auto& [n, v] : fixed_values) {
      reduced_member(n);
      ++seen[n];
    }
    for (const auto& f : kReducedFields) {
      const auto it = seen.find(std::string(f.name));
      if (it == seen.end() || it->second != 1) {
        throw error(errc::invalid_argument, "parameter '" + std::string(f.name) +
                                                "' must be either free or fixed exactly once");
      }
    }
    for (const auto& [n, b] : bounds) {
      reduced_member(n);
      if (!(b.lo >= 0.0 && b.hi > b.lo)) {
        throw error(errc::invalid_argument, "bounds for '" + n + "' must be positive and ordered");
      }
    }
    if (max_iters < 0) throw error(errc::invalid_argument, "max_iters must be >= 0");
    if (!(tolerance > 0.0)) throw error(errc::invalid_argument, "tolerance must be > 0");
  }

  Bounds bound(const std::string& name) const {
    const auto it = bounds.find(name);
    return it == bounds.end() ? Bounds{} : it->second;
  }

  ReducedParams assemble(const std::vector<double>& free_values) const {
    ReducedParams p;
    for (const auto& [n, v] : fixed_values) p.*reduced_member(n) = v;
    for (std::size_t i = 0; i < free_params.size(); ++i) {
      p.*reduced_member(free_params[i]) = free_values[i];
    }
    return p;
  }
};

struct FitResult {
  ReducedParams params;
  double sse = 0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::vector<double> best_history;  // best-vertex sse after each iteration
};

// ---------------------------------------------------------------------------
// Nelder-Mead

struct SimplexResult {
  std::vector<double> x;
  double f = 0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Nelder-Mead minimization with standard coefficients. The iteration stops
/// when the simplex diameter (max-norm) falls below `tolerance`. `lower` and
/// `upper` clip every trial point.
inline SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<double> x0, double step, double tolerance,
                                 int max_iters, const std::vector<double>& lower,
                                 const std::vector<double>& upper,
                                 std::vector<double>* history = nullptr) {
  const std::size_t n = x0.size();
  SimplexResult res;
  auto clip = [&](std::vector<double> x) {
    for (std::size_t i = 0; i < n; ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
    return x;
  };
  auto eval = [&](const std::vector<double>& x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<std::vector<double>> pts{clip(x0)};
  for (std::size_t i = 0; i < n; ++i) {
    auto x = pts.front();
    x[i] += (x[i] + step <= upper[i]) ? step : -step;
    pts.push_back(clip(x));
  }
  std::vector<double> vals;
  for (const auto& p : pts) vals.push_back(eval(p));

  std::vector<std::size_t> order(n + 1);
  auto sort_simplex = [&] {
    for (std::size_t i = 0; i <= n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
    std::vector<std::vector<double>> p2;
    std::vector<double> v2;
    for (auto i : order) {
      p2.push_back(pts[i]);
      v2.push_back(vals[i]);
    }
    pts.swap(p2);
    vals.swap(v2);
  };
  auto diameter = [&] {
    double d = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t k = 0; k < n; ++k) d = std::max(d, std::abs(pts[i][k] - pts[0][k]));
    return d;
  };
  auto affine = [&](const std::vector<double>& a, const std::vector<double>& b, double t) {
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = a[k] + t * (b[k] - a[k]);
    return clip(out);
  };

  sort_simplex();
  while (n > 0) {
    if (diameter() < tolerance) {
      res.converged = true;
      break;
    }
    if (res.iterations >= max_iters) break;
    ++res.iterations;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k] / static_cast<double>(n);

    const auto xr = affine(centroid, pts[n], -1.0);
    const double fr = eval(xr);
    bool shrink = false;
    if (fr < vals[0]) {
      const auto xe = affine(centroid, pts[n], -2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[n] = xe;
        vals[n] = fe;
      } else {
        pts[n] = xr;
        vals[n] = fr;
      }
    } else if (fr < vals[n - 1]) {
      pts[n] = xr;
      vals[n] = fr;
    } else if (fr < vals[n]) {
      const auto xc = affine(centroid, xr, 0.5);
      const double fc = eval(xc);
      if (fc <= fr) {
        pts[n] = xc;
        vals[n] = fc;
      } else {
        shrink = true;
      }
    } else {
      const auto xcc = affine(centroid, pts[n], 0.5);
      const double fcc = eval(xcc);
      if (fcc < vals[n]) {
        pts[n] = xcc;
        vals[n] = fcc;
      } else {
        shrink = true;
      }
    }
    if (shrink) {
      for (std::size_t i = 1; i <= n; ++i) {
        pts[i] = affine(pts[0], pts[i], 0.5);
        vals[i] = eval(pts[i]);
      }
    }
    sort_simplex();
    if (history) history->push_back(vals[0]);
  }
  if (n == 0) res.converged = true;
  res.x = pts[0];
  res.f = n == 0 ? eval(pts[0]) : vals[0];
  return res;
}

/// Fits the free parameters in log-space, then restarts once from the best
/// vertex. Budget exhaustion returns the best point with converged = false.
inline FitResult fit(const FitConfig& config, const Dataset& d,
                     const IntegratorConfig& cfg = objective_integrator()) {
  config.validate();
  d.validate();
  const std::size_t n = config.free_params.size();
  std::vector<double> x0(n), lower(n), upper(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& name = config.free_params[i];
    x0[i] = std::log(config.initial_guess.at(name));
    const Bounds b = config.bound(name);
    lower[i] = b.lo > 0.0 ? std::log(b.lo) : -std::numeric_limits<double>::infinity();
    upper[i] = std::isfinite(b.hi) ? std::log(b.hi) : std::numeric_limits<double>::infinity();
  }
  auto params_at = [&](const std::vector<double>& x) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::exp(x[i]);
    return config.assemble(v);
  };
  auto objective = [&](const std::vector<double>& x) {
    try {
      return objective_sse(params_at(x), d, cfg);
    } catch (const error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  FitResult r;
  if (n == 0) {
    r.params = params_at({});
    r.params.validate();
    r.sse = objective_sse(r.params, d, cfg);
    r.evaluations = 1;
    r.converged = true;
    return r;
  }
  // An infeasible start would leave every vertex at +inf.
  params_at(x0).validate();
  const SimplexResult first = nelder_mead(objective, x0, config.initial_step, config.tolerance,
                                          config.max_iters, lower, upper, &r.best_history);
  const SimplexResult second = nelder_mead(objective, first.x, config.initial_step,
                                           config.tolerance, config.max_iters, lower, upper,
                                           &r.best_history);
  const SimplexResult& best = second.f <= first.f ? second : first;
  r.params = params_at(best.x);
  r.sse = best.f;
  r.iterations = first.iterations + second.iterations;
  r.evaluations = first.evaluations + second.evaluations;
  r.converged = second.converged;
  return r;
}

}  // namespace holling
