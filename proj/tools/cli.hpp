#pragma once

// holling-dyn command implementations. Exit codes: 0 success, 2 input or
// validation failure, 3 numerical failure.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "holling/holling.hpp"

namespace holling::cli {

namespace fs = std::filesystem;
using io::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

enum class ModelKind { full, scaled, reduced, generalized };

/// A validated simulation request.
struct Scenario {
  ModelKind model = ModelKind::full;
  FullParams full;        // full, generalized, and scaled (after embedding)
  ReducedParams reduced;  // reduced and scaled
  std::optional<double> epsilon;
  FullState full_ic;
  ReducedState reduced_ic;
  double horizon = 0;
  double step = 0.01;
  IntegratorConfig integrator;
  bool overlay_data = false;
};

namespace detail {

using io::detail::check_keys;
using io::detail::number_at;
using io::detail::schema_error;

inline IntegratorConfig integrator_from_json(const json& j, const std::string& path) {
  check_keys(j, {"rel_tol", "abs_tol", "max_steps", "initial_step"}, path);
  IntegratorConfig cfg;
  if (j.contains("rel_tol")) cfg.rel_tol = number_at(j, "rel_tol", path);
  if (j.contains("abs_tol")) cfg.abs_tol = number_at(j, "abs_tol", path);
  if (j.contains("max_steps")) cfg.max_steps = static_cast<std::int64_t>(number_at(j, "max_steps", path));
  if (j.contains("initial_step")) cfg.initial_step = number_at(j, "initial_step", path);
  try {
    cfg.validate();
  } catch (const error& e) {
    schema_error(path, e.what());
  }
  return cfg;
}

inline ModelKind model_from_string(const json& j) {
  if (!j.contains("model")) schema_error("/model", "missing");
  if (!j.at("model").is_string()) schema_error("/model", "expected a string");
  const auto s = j.at("model").get<std::string>();
  if (s == "full") return ModelKind::full;
  if (s == "scaled") return ModelKind::scaled;
  if (s == "reduced") return ModelKind::reduced;
  if (s == "generalized") return ModelKind::generalized;
  schema_error("/model", "expected one of full|scaled|reduced|generalized");
}

inline void require_nonnegative(double v, const std::string& path) {
  if (!(v >= 0.0)) schema_error(path, "must be >= 0");
}

}  // namespace detail

inline Scenario scenario_from_json(const json& j) {
  using namespace detail;
  check_keys(j, {"model", "params", "epsilon", "ic", "horizon", "step", "integrator", "overlay_data"}, "");
  Scenario sc;
  sc.model = model_from_string(j);
  if (!j.contains("params")) schema_error("/params", "missing");
  const json& params = j.at("params");

  const bool scaled = sc.model == ModelKind::scaled;
  if (scaled && !j.contains("epsilon")) schema_error("/epsilon", "required for model 'scaled'");
  if (!scaled && j.contains("epsilon")) schema_error("/epsilon", "only allowed for model 'scaled'");

  switch (sc.model) {
    case ModelKind::full: {
      check_keys(params, std::set<std::string>(io::kFullRateNames.begin(), io::kFullRateNames.end()), "/params");
      sc.full = io::full_params_from_json(params, "/params");
      break;
    }
    case ModelKind::generalized:
      sc.full = io::full_params_from_json(params, "/params", /*require_exponents=*/true);
      break;
    case ModelKind::reduced:
      sc.reduced = io::reduced_params_from_json(params, "/params");
      break;
    case ModelKind::scaled: {
      sc.reduced = io::reduced_params_from_json(params, "/params");
      sc.epsilon = number_at(j, "epsilon", "");
      if (!(*sc.epsilon > 0.0)) schema_error("/epsilon", "must be > 0");
      sc.full = scaled_params(sc.reduced, *sc.epsilon);
      break;
    }
  }

  if (!j.contains("ic")) schema_error("/ic", "missing");
  const json& ic = j.at("ic");
  if (sc.model == ModelKind::reduced) {
    check_keys(ic, {"N", "P"}, "/ic");
    sc.reduced_ic = {number_at(ic, "N", "/ic"), number_at(ic, "P", "/ic")};
    require_nonnegative(sc.reduced_ic.N, "/ic/N");
    require_nonnegative(sc.reduced_ic.P, "/ic/P");
  } else if (scaled && ic.is_object() && ic.contains("P")) {
    // Total predators, split onto the slow manifold.
    check_keys(ic, {"N", "P"}, "/ic");
    const double n = number_at(ic, "N", "/ic"), p = number_at(ic, "P", "/ic");
    require_nonnegative(n, "/ic/N");
    require_nonnegative(p, "/ic/P");
    const SplitState split = slow_manifold_split(sc.reduced.chi, sc.reduced.kappa, n, p);
    sc.full_ic = {n, split.P_S0, split.P_H0};
  } else {
    check_keys(ic, {"N", "P_S", "P_H"}, "/ic");
    sc.full_ic = {number_at(ic, "N", "/ic"), number_at(ic, "P_S", "/ic"), number_at(ic, "P_H", "/ic")};
    require_nonnegative(sc.full_ic.N, "/ic/N");
    require_nonnegative(sc.full_ic.P_S, "/ic/P_S");
    require_nonnegative(sc.full_ic.P_H, "/ic/P_H");
  }

  sc.horizon = number_at(j, "horizon", "");
  require_nonnegative(sc.horizon, "/horizon");
  if (j.contains("step")) {
    sc.step = number_at(j, "step", "");
    if (!(sc.step > 0.0)) schema_error("/step", "must be > 0");
  }
  if (j.contains("integrator")) sc.integrator = integrator_from_json(j.at("integrator"), "/integrator");
  if (j.contains("overlay_data")) {
    if (!j.at("overlay_data").is_boolean()) schema_error("/overlay_data", "expected a boolean");
    sc.overlay_data = j.at("overlay_data").get<bool>();
  }
  return sc;
}

struct Options {
  std::string file;
  std::string out_dir = ".";
  bool svg = false;
  bool embedded = false;
  std::string config;
  std::string params_from;
  bool eval_only = false;
  bool report = false;
};

namespace detail {

inline std::vector<io::Series> data_overlay() {
  const Dataset d = embedded_dataset();
  io::Series hares{"hares (data)", {}, {}, true}, lynx{"lynx (data)", {}, {}, true};
  for (std::size_t i = 0; i < d.size(); ++i) {
    hares.x.push_back(d.years[i] - d.years.front());
    hares.y.push_back(d.hares[i]);
    lynx.x.push_back(d.years[i] - d.years.front());
    lynx.y.push_back(d.lynx[i]);
  }
  return {hares, lynx};
}

template <std::size_t Dim>
std::vector<io::Series> trajectory_series(const Trajectory<Dim>& traj,
                                          const std::array<std::string_view, Dim>& names) {
  std::vector<io::Series> out(Dim);
  for (std::size_t k = 0; k < Dim; ++k) {
    out[k].label = std::string(names[k]);
    out[k].x = traj.times;
    for (const auto& s : traj.states) out[k].y.push_back(s[k]);
  }
  return out;
}

}  // namespace detail

inline int cmd_simulate(const Options& opt, std::ostream& out) {
  const Scenario sc = scenario_from_json(io::read_json_file(opt.file));
  const auto grid = uniform_grid(0.0, sc.horizon, sc.step);
  const fs::path stem = fs::path(opt.file).stem();

  std::string csv;
  std::vector<io::Series> series;
  if (sc.model == ModelKind::reduced) {
    const auto traj = integrate<2>(reduced_field(sc.reduced), sc.reduced_ic.to_array(), 0.0,
                                   sc.horizon, grid, sc.integrator);
    static constexpr std::array<std::string_view, 2> names{"N", "P"};
    csv = io::trajectory_csv(traj, names);
    if (opt.svg) series = detail::trajectory_series(traj, names);
  } else {
    const auto traj = integrate<3>(full_field(sc.full), sc.full_ic.to_array(), 0.0, sc.horizon,
                                   grid, sc.integrator);
    static constexpr std::array<std::string_view, 3> names{"N", "P_S", "P_H"};
    csv = io::trajectory_csv(traj, names);
    if (opt.svg) {
      series = detail::trajectory_series(traj, names);
      if (sc.model == ModelKind::scaled) {
        io::Series total{"P = P_S + P_H", traj.times, {}};
        for (const auto& s : traj.states) total.y.push_back(s[1] + s[2]);
        series.push_back(total);
      }
    }
  }

  const fs::path csv_path = fs::path(opt.out_dir) / (stem.string() + ".csv");
  io::write_atomic(csv_path, csv);
  out << csv_path.string() << '\n';
  if (opt.svg) {
    if (sc.overlay_data) {
      for (auto& s : detail::data_overlay()) series.push_back(std::move(s));
    }
    const fs::path svg_path = fs::path(opt.out_dir) / (stem.string() + ".svg");
    io::write_atomic(svg_path, io::svg_line_plot(series, stem.string()));
    out << svg_path.string() << '\n';
  }
  return kExitOk;
}

inline int cmd_analyze(const Options& opt, std::ostream& out) {
  json j = io::read_json_file(opt.file);
  std::optional<double> n0;
  json params = j;
  if (j.is_object() && j.contains("params")) {
    io::detail::check_keys(j, {"params", "N0"}, "");
    params = j.at("params");
    if (j.contains("N0")) n0 = io::detail::number_at(j, "N0", "");
  }
  const FullParams p = io::full_params_from_json(params, j.contains("params") ? "/params" : "");
  const AssumptionReport a = check_assumptions(p);

  json report = {{"params", io::to_json(p)}, {"assumptions", io::to_json(a)}};
  if (a.a21_holds && a.a22_holds && p.base_exponents()) {
    const EquilibriumReport eq = equilibria(p);
    report["equilibria"] = io::to_json(eq);
    if (eq.e_star) {
      const RouthHurwitz rh = routh_hurwitz_interior(p);
      report["routh_hurwitz"] = {{"p1", rh.p1}, {"p2", rh.p2}, {"p3", rh.p3}, {"stable", rh.stable}};
    }
  } else if (p.base_exponents()) {
    // Boundary equilibria exist regardless of the standing assumptions.
    report["equilibria"] = {
        {"E1", io::to_json(holling::detail::make_equilibrium(p, {0, 0, 0}))},
        {"E2", io::to_json(holling::detail::make_equilibrium(p, {p.n_hat(), 0, 0}))}};
  }
  if (a.a21_holds && a.a22_holds) {
    const PredatorSubsystemData d = predator_subsystem(p, n0);
    report["lambda_star"] = d.lambda_star;
    report["dissipativity_M"] = d.dissipativity_M;
    report["predator_subsystem"] = io::to_json(d);
  }
  const std::string text = report.dump(2) + "\n";
  if (!opt.out_dir.empty() && opt.out_dir != ".") {
    io::write_atomic(fs::path(opt.out_dir) / (fs::path(opt.file).stem().string() + ".analysis.json"), text);
  }
  out << text;
  return kExitOk;
}

inline int cmd_limit_study(const Options& opt, std::ostream& out) {
  using namespace detail;
  const json j = io::read_json_file(opt.file);
  check_keys(j, {"params", "epsilons", "ic", "tau", "step", "split", "integrator"}, "");
  if (!j.contains("params")) schema_error("/params", "missing");
  const ReducedParams rp = io::reduced_params_from_json(j.at("params"), "/params");
  if (!j.contains("epsilons") || !j.at("epsilons").is_array()) {
    schema_error("/epsilons", "expected an array");
  }
  std::vector<double> eps;
  for (const auto& e : j.at("epsilons")) {
    if (!e.is_number()) schema_error("/epsilons", "expected numbers");
    eps.push_back(e.get<double>());
  }
  if (eps.empty()) schema_error("/epsilons", "must not be empty");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) schema_error("/epsilons/" + std::to_string(i), "must be > 0");
    if (i > 0 && !(eps[i] < eps[i - 1])) schema_error("/epsilons/" + std::to_string(i), "must be strictly descending");
  }
  if (!j.contains("ic")) schema_error("/ic", "missing");
  check_keys(j.at("ic"), {"N", "P"}, "/ic");
  const ReducedState ic{number_at(j.at("ic"), "N", "/ic"), number_at(j.at("ic"), "P", "/ic")};
  require_nonnegative(ic.N, "/ic/N");
  require_nonnegative(ic.P, "/ic/P");
  const double tau = number_at(j, "tau", "");
  if (!(tau > 0.0)) schema_error("/tau", "must be > 0");

  LimitStudyOptions lo;
  if (j.contains("step")) {
    lo.grid_step = number_at(j, "step", "");
    if (!(lo.grid_step > 0.0)) schema_error("/step", "must be > 0");
  }
  if (j.contains("integrator")) lo.integrator = integrator_from_json(j.at("integrator"), "/integrator");
  if (j.contains("split")) {
    check_keys(j.at("split"), {"P_S", "P_H"}, "/split");
    lo.split_override = {number_at(j.at("split"), "P_S", "/split"), number_at(j.at("split"), "P_H", "/split")};
  }

  const LimitStudyResult r = singular_limit_study(eps, rp, ic, tau, lo);
  const fs::path stem = fs::path(opt.file).stem();
  const std::string csv = io::limit_study_csv(r);
  io::write_atomic(fs::path(opt.out_dir) / (stem.string() + ".csv"), csv);
  out << csv;

  if (opt.svg) {
    std::vector<io::Series> series;
    const auto ref = simulate_reduced(rp, ic, tau, lo.grid_step, lo.integrator);
    io::Series n_ref{"N reduced", ref.times, {}};
    for (const auto& s : ref.states) n_ref.y.push_back(s[0]);
    series.push_back(n_ref);
    const SplitState split = lo.split_override
                                 ? SplitState{lo.split_override->first, lo.split_override->second}
                                 : slow_manifold_split(rp.chi, rp.kappa, ic.N, ic.P);
    for (double e : eps) {
      const auto traj = simulate_full(scaled_params(rp, e), {ic.N, split.P_S0, split.P_H0}, tau,
                                      lo.grid_step, lo.integrator);
      io::Series n{"N eps=" + io::format_number(e), traj.times, {}};
      for (const auto& s : traj.states) n.y.push_back(s[0]);
      series.push_back(n);
    }
    io::write_atomic(fs::path(opt.out_dir) / (stem.string() + ".svg"),
                     io::svg_line_plot(series, "prey: scaled system vs reduced model"));
  }
  return kExitOk;
}

inline int cmd_fit(const Options& opt, std::ostream& out) {
  if (opt.embedded == !opt.file.empty()) {
    throw error(errc::invalid_argument, "give exactly one of --embedded or a dataset path");
  }
  const Dataset d = opt.embedded ? embedded_dataset() : load_dataset(opt.file);
  FitConfig cfg = opt.config.empty() ? FitConfig::hare_lynx_default()
                                     : io::fit_config_from_json(io::read_json_file(opt.config));

  std::optional<ReducedParams> start;
  if (!opt.params_from.empty()) {
    start = io::reduced_params_from_json(io::read_json_file(opt.params_from));
  }
  const fs::path out_dir(opt.out_dir);

  if (opt.eval_only) {
    const ReducedParams p = start.value_or(hare_lynx_reference());
    const double sse = objective_sse(p, d);
    const json j = {{"params", io::to_json(p)}, {"sse", sse}};
    out << j.dump(2) << '\n';
    return kExitOk;
  }

  if (start) {
    for (const auto& f : kReducedFields) {
      const std::string name(f.name);
      if (cfg.initial_guess.contains(name)) cfg.initial_guess[name] = (*start).*f.member;
      if (cfg.fixed_values.contains(name)) cfg.fixed_values[name] = (*start).*f.member;
    }
    cfg.validate();
  }

  const FitResult r = fit(cfg, d);
  const std::string text = io::to_json(r).dump(2) + "\n";
  io::write_atomic(out_dir / "fit_result.json", text);
  out << text;
  if (opt.report || opt.svg) {
    const auto traj = fitted_series(r.params, d);
    if (opt.report) io::write_atomic(out_dir / "fit_report.csv", io::fit_report_csv(d, traj));
    if (opt.svg) {
      const auto dense = simulate_reduced(r.params, {d.hares.front(), d.lynx.front()},
                                          d.years.back() - d.years.front(), 0.05);
      static constexpr std::array<std::string_view, 2> names{"N (fit)", "P (fit)"};
      auto series = detail::trajectory_series(dense, names);
      for (auto& s : detail::data_overlay()) series.push_back(std::move(s));
      io::write_atomic(out_dir / "fit_report.svg", io::svg_line_plot(series, "fitted reduced model"));
    }
  }
  return kExitOk;
}

/// Parses argv and dispatches; never throws.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Handling/searching predator-prey dynamics", "holling-dyn"};
  app.require_subcommand(1);
  Options opt;

  auto* simulate = app.add_subcommand("simulate", "integrate a scenario and write a trajectory CSV");
  simulate->add_option("FILE", opt.file, "scenario JSON")->required();
  simulate->add_flag("--svg", opt.svg, "also write an SVG line plot");
  simulate->add_option("--out", opt.out_dir, "output directory");

  auto* analyze = app.add_subcommand("analyze", "equilibria, stability and dissipativity report");
  analyze->add_option("FILE", opt.file, "parameter JSON")->required();
  analyze->add_option("--out", opt.out_dir, "output directory");

  auto* limit = app.add_subcommand("limit-study", "scaled system vs reduced model errors");
  limit->add_option("FILE", opt.file, "study JSON")->required();
  limit->add_flag("--svg", opt.svg, "also plot prey trajectories");
  limit->add_option("--out", opt.out_dir, "output directory");

  auto* fitc = app.add_subcommand("fit", "least-squares fit of the reduced model");
  fitc->add_option("FILE", opt.file, "dataset CSV (year,hares_thousands,lynx_thousands)");
  fitc->add_flag("--embedded", opt.embedded, "use the built-in 1900-1920 record");
  fitc->add_option("--config", opt.config, "fit configuration JSON");
  fitc->add_option("--params-from", opt.params_from, "reduced parameter JSON (start or evaluation point)");
  fitc->add_flag("--eval-only", opt.eval_only, "print the objective without optimizing");
  fitc->add_flag("--report", opt.report, "write fitted-vs-data CSV");
  fitc->add_flag("--svg", opt.svg, "plot fitted trajectory against the data");
  fitc->add_option("--out", opt.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(opt, out);
    if (analyze->parsed()) return cmd_analyze(opt, out);
    if (limit->parsed()) return cmd_limit_study(opt, out);
    return cmd_fit(opt, out);
  } catch (const error& e) {
    err << "error: " << e.what() << '\n';
    return is_numerical(e.code()) ? kExitNumerical : kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

}  // namespace holling::cli
