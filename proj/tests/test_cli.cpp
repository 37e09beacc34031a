#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

using namespace holling;
namespace fs = std::filesystem;

namespace {

const fs::path kFigures = fs::path(HOLLING_SOURCE_DIR) / "figures";

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("holling_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  RunResult run(std::vector<std::string> args) const {
    args.insert(args.begin(), "holling-dyn");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
  }

  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::size_t file_count() const {
    return static_cast<std::size_t>(std::distance(fs::directory_iterator(dir_), fs::directory_iterator{}));
  }

  fs::path dir_;
};

const char* kCanonicalParams =
    R"({"beta_N": 2, "mu_N": 1, "delta": 0.01, "kappa": 0.2, "rho": 0.5,
        "mu_P": 1, "beta_P": 1.5, "eta": 3, "gamma": 2})";

std::string full_scenario(const std::string& extra, double horizon) {
  return std::string(R"({"model": "full", "params": )") + kCanonicalParams +
         R"(, "ic": {"N": 50, "P_S": 1, "P_H": 1}, "horizon": )" + std::to_string(horizon) +
         R"(, "step": 0.5)" + extra + "}";
}

}  // namespace

TEST_F(Cli, SimulateWritesCsvWithHeaderAndGrid) {
  const fs::path f = write("canon.json", full_scenario("", 10.0));
  const RunResult r = run({"simulate", f.string(), "--out", dir_.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const std::string csv = slurp(dir_ / "canon.csv");
  EXPECT_EQ(csv.rfind("t,N,P_S,P_H\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 22);  // header + 21 rows
}

TEST_F(Cli, ZeroHorizonGivesOneRow) {
  const fs::path f = write("zero.json", full_scenario("", 0.0));
  const RunResult r = run({"simulate", f.string(), "--out", dir_.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const std::string csv = slurp(dir_ / "zero.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
}

TEST_F(Cli, RepeatedRunsAreByteIdentical) {
  const fs::path f = write("rep.json", full_scenario("", 20.0));
  ASSERT_EQ(run({"simulate", f.string(), "--svg", "--out", dir_.string()}).code, 0);
  const std::string a = slurp(dir_ / "rep.csv"), sa = slurp(dir_ / "rep.svg");
  ASSERT_EQ(run({"simulate", f.string(), "--svg", "--out", dir_.string()}).code, 0);
  EXPECT_EQ(a, slurp(dir_ / "rep.csv"));
  EXPECT_EQ(sa, slurp(dir_ / "rep.svg"));
  EXPECT_EQ(sa.rfind("<svg", 0), 0u);
}

TEST_F(Cli, SchemaErrorsExitTwoAndWriteNothing) {
  const std::vector<std::string> bad{
      R"({"model": "full"})",
      R"({"model": "weird", "params": {}, "ic": {}, "horizon": 1})",
      full_scenario(R"(, "bogus": 1)", 1.0),
      full_scenario(R"(, "epsilon": 0.1)", 1.0),
      std::string(R"({"model": "full", "params": )") + kCanonicalParams +
          R"(, "ic": {"N": -1, "P_S": 1, "P_H": 1}, "horizon": 1})",
      "{not json",
  };
  for (std::size_t i = 0; i < bad.size(); ++i) {
    const fs::path f = write("bad" + std::to_string(i) + ".json", bad[i]);
    const RunResult r = run({"simulate", f.string(), "--out", dir_.string()});
    EXPECT_EQ(r.code, cli::kExitInput) << bad[i];
    EXPECT_FALSE(r.err.empty());
  }
  EXPECT_EQ(file_count(), bad.size());  // only the inputs
}

TEST_F(Cli, NumericalFailureExitsThree) {
  const fs::path f = write("budget.json", full_scenario(R"(, "integrator": {"max_steps": 5})", 100.0));
  const RunResult r = run({"simulate", f.string(), "--out", dir_.string()});
  EXPECT_EQ(r.code, cli::kExitNumerical);
  EXPECT_NE(r.err.find("budget"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir_ / "budget.csv"));
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, cli::kExitInput);
  EXPECT_EQ(run({"nonsense"}).code, cli::kExitInput);
  EXPECT_EQ(run({"simulate"}).code, cli::kExitInput);
  EXPECT_EQ(run({"simulate", (dir_ / "missing.json").string()}).code, cli::kExitInput);
  EXPECT_EQ(run({"fit"}).code, cli::kExitInput);
}

TEST_F(Cli, ShippedScenariosRun) {
  for (const char* name : {"hare_lynx_reduced.json", "scaled_eps1e-4.json", "scaled_eps5e-3.json", "canonical_cycle.json"}) {
    const RunResult r = run({"simulate", (kFigures / name).string(), "--out", dir_.string()});
    EXPECT_EQ(r.code, cli::kExitOk) << name << ": " << r.err;
  }
}

TEST_F(Cli, AnalyzeCanonical) {
  const RunResult r = run({"analyze", (kFigures / "canonical.json").string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j.at("assumptions").at("a21_holds").get<bool>());
  const auto& e = j.at("equilibria").at("E_star").at("state");
  EXPECT_NEAR(e.at("N").get<double>(), 60.0, 1e-9);
  EXPECT_NEAR(e.at("P_S").get<double>(), 2.0, 1e-9);
  EXPECT_NEAR(j.at("routh_hurwitz").at("p1").get<double>(), 12.1, 1e-9);
  EXPECT_NEAR(j.at("lambda_star").get<double>(), 0.614, 1e-3);
}

TEST_F(Cli, AnalyzeReportsViolatedAssumptionWithoutInterior) {
  const fs::path f = write("viol.json", R"({"beta_N": 2, "mu_N": 1, "delta": 0.01, "kappa": 0.2,
      "rho": 0.5, "mu_P": 1, "beta_P": 1.5, "eta": 3, "gamma": 0.1})");
  const RunResult r = run({"analyze", f.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_FALSE(j.at("assumptions").at("a22_holds").get<bool>());
  EXPECT_FALSE(j.at("equilibria").contains("E_star"));
  EXPECT_FALSE(j.contains("lambda_star"));
}

TEST_F(Cli, LimitStudyWritesOneRowPerEpsilon) {
  const fs::path f = write("ls.json", R"({"params": {"beta_N": 1.6567, "mu_N": 1, "K": 303000,
      "kappa": 3.2e-5, "chi": 0.11, "beta_P": 8.5127, "mu_P": 0.14285714285714285, "eta": 9.24},
      "epsilons": [1e-3, 1e-4], "ic": {"N": 30000, "P": 4000}, "tau": 2, "step": 0.01})");
  const RunResult r = run({"limit-study", f.string(), "--out", dir_.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const std::string csv = slurp(dir_ / "ls.csv");
  EXPECT_EQ(csv.rfind("epsilon,sup_err_N,sup_err_P,rel_err_N,rel_err_P\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST_F(Cli, LimitStudyRejectsBadEpsilons) {
  const std::string head = R"({"params": {"beta_N": 1.6567, "mu_N": 1, "K": 303000,
      "kappa": 3.2e-5, "chi": 0.11, "beta_P": 8.5127, "mu_P": 0.14285714285714285, "eta": 9.24},
      "ic": {"N": 30000, "P": 4000}, "tau": 2, "epsilons": )";
  for (const char* eps : {"[]", "[1e-4, 1e-3]", "[0.001, -1]", "0.1"}) {
    const fs::path f = write("e.json", head + eps + "}");
    EXPECT_EQ(run({"limit-study", f.string(), "--out", dir_.string()}).code, cli::kExitInput) << eps;
  }
  EXPECT_FALSE(fs::exists(dir_ / "e.csv"));
}

TEST_F(Cli, FitEvalOnlyMatchesLibraryObjective) {
  const RunResult r = run({"fit", "--embedded", "--eval-only"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("sse").get<double>(), objective_sse(hare_lynx_reference(), embedded_dataset()));
  const RunResult s = run({"fit", "--embedded", "--eval-only", "--params-from",
                     (kFigures / "hare_lynx_params.json").string()});
  ASSERT_EQ(s.code, cli::kExitOk) << s.err;
  EXPECT_EQ(nlohmann::json::parse(s.out).at("sse"), j.at("sse"));
}

TEST_F(Cli, FitRejectsMalformedCsv) {
  const fs::path f = write("d.csv", "year,hares_thousands,lynx_thousands\n1900,30,4\n1901,x,5\n");
  const RunResult r = run({"fit", f.string(), "--eval-only"});
  EXPECT_EQ(r.code, cli::kExitInput);
  EXPECT_NE(r.err.find("row 3"), std::string::npos) << r.err;
  const fs::path g = write("g.csv", "year,hares_thousands,lynx_thousands\n1901,30,4\n1900,31,5\n");
  EXPECT_EQ(run({"fit", g.string(), "--eval-only"}).code, cli::kExitInput);
  EXPECT_EQ(run({"fit", "--embedded", f.string()}).code, cli::kExitInput);
}

TEST_F(Cli, FitWritesResultAndReport) {
  const fs::path cfg = write("cfg.json", R"({"free": ["kappa", "eta"], "max_iters": 40})");
  const RunResult r = run({"fit", "--embedded", "--config", cfg.string(), "--report", "--svg", "--out",
                     dir_.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto j = nlohmann::json::parse(slurp(dir_ / "fit_result.json"));
  EXPECT_LE(j.at("sse").get<double>(), objective_sse(hare_lynx_reference(), embedded_dataset()));
  const std::string rep = slurp(dir_ / "fit_report.csv");
  EXPECT_EQ(rep.rfind("year,hares,lynx,N_fit,P_fit\n", 0), 0u);
  EXPECT_EQ(std::count(rep.begin(), rep.end(), '\n'), 22);
  EXPECT_TRUE(fs::exists(dir_ / "fit_report.svg"));
}
