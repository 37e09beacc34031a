#pragma once

// CSV, SVG and JSON serialization of model records and study results.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "holling/analysis.hpp"
#include "holling/error.hpp"
#include "holling/experiments.hpp"
#include "holling/fitting.hpp"
#include "holling/integrator.hpp"
#include "holling/model.hpp"

namespace holling::io {

using json = nlohmann::json;

/// Shortest decimal string that parses back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

/// Writes via a sibling temporary file and rename, so readers never observe a
/// partially written file.
inline void write_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("short write to '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

template <std::size_t Dim>
std::string trajectory_csv(const Trajectory<Dim>& traj, const std::array<std::string_view, Dim>& names) {
  std::string out = "t";
  for (auto n : names) {
    out += ',';
    out += n;
  }
  out += '\n';
  for (std::size_t i = 0; i < traj.size(); ++i) {
    out += format_number(traj.times[i]);
    for (double v : traj.states[i]) {
      out += ',';
      out += format_number(v);
    }
    out += '\n';
  }
  return out;
}

inline std::string limit_study_csv(const LimitStudyResult& r) {
  std::string out = "epsilon,sup_err_N,sup_err_P,rel_err_N,rel_err_P\n";
  for (std::size_t i = 0; i < r.epsilons.size(); ++i) {
    out += format_number(r.epsilons[i]) + ',' + format_number(r.sup_err_N[i]) + ',' +
           format_number(r.sup_err_P[i]) + ',' + format_number(r.rel_err_N[i]) + ',' +
           format_number(r.rel_err_P[i]) + '\n';
  }
  return out;
}

inline std::string fit_report_csv(const Dataset& d, const Trajectory<2>& fitted) {
  std::string out = "year,hares,lynx,N_fit,P_fit\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    out += std::to_string(d.years[i]) + ',' + format_number(d.hares[i]) + ',' +
           format_number(d.lynx[i]) + ',' + format_number(fitted.states[i][0]) + ',' +
           format_number(fitted.states[i][1]) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// SVG

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;  // circles instead of a polyline
};

/// Minimal line chart: shared axes, one polyline (or marker set) per series.
inline std::string svg_line_plot(const std::vector<Series>& series, std::string_view title) {
  constexpr double W = 800, H = 480, L = 70, R = 150, T = 40, B = 50;
  static constexpr std::array<std::string_view, 6> colors{"#1f77b4", "#d62728", "#2ca02c",
                                                          "#9467bd", "#ff7f0e", "#8c564b"};
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  bool first = true;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        x0 = x1 = s.x[i];
        y0 = y1 = s.y[i];
        first = false;
      }
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  y0 = std::min(y0, 0.0);
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  auto label_num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return std::string(buf);
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title
     << "</text>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    os << "<text x=\"" << num(px(xv)) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">"
       << label_num(xv) << "</text>\n";
    os << "<text x=\"" << L - 6 << "\" y=\"" << num(py(yv) + 4) << "\" text-anchor=\"end\">"
       << label_num(yv) << "</text>\n";
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const auto color = colors[k % colors.size()];
    if (s.markers) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        os << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i]))
           << "\" r=\"3\" fill=\"none\" stroke=\"" << color << "\"/>\n";
      }
    } else {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (i) os << ' ';
        os << num(px(s.x[i])) << ',' << num(py(s.y[i]));
      }
      os << "\"/>\n";
    }
    os << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 18 * (k + 1) << "\" fill=\"" << color
       << "\">" << s.label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// JSON

inline constexpr std::array<std::string_view, 9> kFullRateNames{
    "beta_N", "mu_N", "delta", "kappa", "rho", "gamma", "mu_P", "eta", "beta_P"};

namespace detail {

[[noreturn]] inline void schema_error(const std::string& path, const std::string& what) {
  throw error(errc::invalid_argument, path + ": " + what);
}

inline double number_at(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) schema_error(path + "/" + key, "missing");
  const json& v = obj.at(key);
  if (!v.is_number()) schema_error(path + "/" + key, "expected a number");
  return v.get<double>();
}

/// Rejects keys outside `allowed`.
inline void check_keys(const json& obj, const std::set<std::string>& allowed,
                       const std::string& path) {
  if (!obj.is_object()) schema_error(path.empty() ? "/" : path, "expected an object");
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.contains(k)) schema_error(path + "/" + k, "unknown field");
  }
}

}  // namespace detail

/// Parses a FullParams object. Exponents l and m are required when
/// `require_exponents` is set and optional otherwise.
inline FullParams full_params_from_json(const json& j, const std::string& path = "",
                                        bool require_exponents = false) {
  std::set<std::string> allowed(kFullRateNames.begin(), kFullRateNames.end());
  allowed.insert({"l", "m"});
  detail::check_keys(j, allowed, path);
  FullParams p;
  double* fields[] = {&p.beta_N, &p.mu_N, &p.delta, &p.kappa, &p.rho,
                      &p.gamma,  &p.mu_P, &p.eta,   &p.beta_P};
  for (std::size_t i = 0; i < kFullRateNames.size(); ++i) {
    *fields[i] = detail::number_at(j, std::string(kFullRateNames[i]), path);
  }
  for (auto [name, field] : {std::pair{"l", &p.l}, std::pair{"m", &p.m}}) {
    if (require_exponents || j.contains(name)) *field = detail::number_at(j, name, path);
  }
  try {
    p.validate();
  } catch (const error& e) {
    detail::schema_error(path.empty() ? "/" : path, e.what());
  }
  return p;
}

inline ReducedParams reduced_params_from_json(const json& j, const std::string& path = "") {
  std::set<std::string> allowed;
  for (const auto& f : kReducedFields) allowed.insert(std::string(f.name));
  detail::check_keys(j, allowed, path);
  ReducedParams p;
  for (const auto& f : kReducedFields) {
    const std::string name(f.name);
    if (name == "l" || name == "m") {
      if (j.contains(name)) p.*f.member = detail::number_at(j, name, path);
    } else {
      p.*f.member = detail::number_at(j, name, path);
    }
  }
  try {
    p.validate();
  } catch (const error& e) {
    detail::schema_error(path.empty() ? "/" : path, e.what());
  }
  return p;
}

inline json to_json(const FullParams& p) {
  return {{"beta_N", p.beta_N}, {"mu_N", p.mu_N}, {"delta", p.delta}, {"kappa", p.kappa},
          {"rho", p.rho},       {"gamma", p.gamma}, {"mu_P", p.mu_P}, {"eta", p.eta},
          {"beta_P", p.beta_P}, {"l", p.l},         {"m", p.m}};
}

inline json to_json(const ReducedParams& p) {
  json j = json::object();
  for (const auto& f : kReducedFields) j[std::string(f.name)] = p.*f.member;
  return j;
}

inline json to_json(const FullState& s) { return {{"N", s.N}, {"P_S", s.P_S}, {"P_H", s.P_H}}; }

inline json to_json(const AssumptionReport& a) {
  return {{"a21_holds", a.a21_holds},
          {"a22_holds", a.a22_holds},
          {"interior_exists", a.interior_exists},
          {"e2_stable", a.e2_stable},
          {"interior_stable", a.interior_stable}};
}

inline json to_json(const Equilibrium& e) {
  json eig = json::array();
  for (const auto& z : e.eigenvalues) eig.push_back({{"re", z.real()}, {"im", z.imag()}});
  return {{"state", to_json(e.state)},
          {"eigenvalues", eig},
          {"classification", std::string(to_string(e.classification))}};
}

inline json to_json(const EquilibriumReport& r) {
  json j = {{"E1", to_json(r.e1)}, {"E2", to_json(r.e2)}};
  if (r.e_star) j["E_star"] = to_json(*r.e_star);
  return j;
}

inline json to_json(const PredatorSubsystemData& d) {
  return {{"M", {{d.M[0][0], d.M[0][1]}, {d.M[1][0], d.M[1][1]}}},
          {"lambda_star", d.lambda_star},
          {"left_vec", {d.left_vec[0], d.left_vec[1]}},
          {"n_bound", d.n_bound},
          {"dissipativity_M", d.dissipativity_M}};
}

inline json to_json(const FitResult& r) {
  json j = {{"params", to_json(r.params)},
            {"sse", r.sse},
            {"iterations", r.iterations},
            {"evaluations", r.evaluations},
            {"converged", r.converged}};
  if (!r.converged) j["warning"] = "iteration budget exhausted before the simplex converged";
  return j;
}

inline json to_json(const LimitStudyResult& r) {
  return {{"epsilons", r.epsilons}, {"sup_err_N", r.sup_err_N}, {"sup_err_P", r.sup_err_P},
          {"rel_err_N", r.rel_err_N}, {"rel_err_P", r.rel_err_P}, {"horizon", r.horizon}};
}

/// Fit configuration; absent fields keep the hare-lynx defaults.
inline FitConfig fit_config_from_json(const json& j) {
  detail::check_keys(j, {"free", "fixed", "initial_guess", "bounds", "max_iters", "tolerance",
                         "initial_step"},
                     "");
  FitConfig c = FitConfig::hare_lynx_default();
  if (j.contains("free")) {
    if (!j.at("free").is_array()) detail::schema_error("/free", "expected an array of names");
    c.free_params.clear();
    for (const auto& v : j.at("free")) {
      if (!v.is_string()) detail::schema_error("/free", "expected parameter names");
      c.free_params.push_back(v.get<std::string>());
    }
    // Parameters dropped from the free set become fixed at their reference value.
    const ReducedParams t = hare_lynx_reference();
    std::map<std::string, double> fixed;
    for (const auto& f : kReducedFields) {
      const std::string name(f.name);
      if (std::find(c.free_params.begin(), c.free_params.end(), name) == c.free_params.end()) {
        fixed[name] = t.*f.member;
      }
    }
    c.fixed_values = fixed;
    for (const auto& name : c.free_params) {
      c.initial_guess[name] = t.*reduced_member(name);
    }
  }
  auto read_map = [&](const char* key, std::map<std::string, double>& dst) {
    if (!j.contains(key)) return;
    const json& m = j.at(key);
    if (!m.is_object()) detail::schema_error(std::string("/") + key, "expected an object");
    for (const auto& [k, v] : m.items()) {
      if (!v.is_number()) detail::schema_error(std::string("/") + key + "/" + k, "expected a number");
      dst[k] = v.get<double>();
    }
  };
  read_map("fixed", c.fixed_values);
  read_map("initial_guess", c.initial_guess);
  if (j.contains("bounds")) {
    const json& b = j.at("bounds");
    if (!b.is_object()) detail::schema_error("/bounds", "expected an object");
    for (const auto& [k, v] : b.items()) {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        detail::schema_error("/bounds/" + k, "expected [lo, hi]");
      }
      c.bounds[k] = {v[0].get<double>(), v[1].get<double>()};
    }
  }
  if (j.contains("max_iters")) {
    if (!j.at("max_iters").is_number_integer()) detail::schema_error("/max_iters", "expected an integer");
    c.max_iters = j.at("max_iters").get<int>();
  }
  if (j.contains("tolerance")) c.tolerance = detail::number_at(j, "tolerance", "");
  if (j.contains("initial_step")) c.initial_step = detail::number_at(j, "initial_step", "");
  // Drop guesses for parameters that are no longer free.
  for (auto it = c.initial_guess.begin(); it != c.initial_guess.end();) {
    if (std::find(c.free_params.begin(), c.free_params.end(), it->first) == c.free_params.end()) {
      it = c.initial_guess.erase(it);
    } else {
      ++it;
    }
  }
  for (const auto& [k, v] : c.fixed_values) {
    if (std::find(c.free_params.begin(), c.free_params.end(), k) != c.free_params.end()) {
      detail::schema_error("/fixed/" + k, "parameter is also listed as free");
    }
  }
  try {
    c.validate();
  } catch (const error& e) {
    detail::schema_error("/", e.what());
  }
  return c;
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::invalid_argument, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw error(errc::invalid_argument, path.string() + ": " + e.what());
  }
}

}  // namespace holling::io
