// Copyright 2026 The qmem Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qmem/cli.hpp"

namespace qmem {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("qmem_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return run_cli(args, out_, err_);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  json error_line() const {
    const std::string text = err_.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1) << text;
    return json::parse(text);
  }

  bool has_partials(const fs::path& where) const {
    if (!fs::exists(where)) return false;
    for (const auto& entry : fs::directory_iterator(where)) {
      if (entry.path().extension() == ".partial") return true;
    }
    return false;
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST_F(Cli, PrintRecallEvolve) {
  const auto reg = path("reg.json");
  EXPECT_EQ(run({"print", "--registry", reg, "--id", "a", "--thetas", "0.5,1.0", "--out", path("p1"), "--quiet"}),
            kExitOk);
  EXPECT_EQ(out_.str(), "");
  EXPECT_EQ(run({"print", "--registry", reg, "--id", "b", "--beta", "1.0", "--out", path("p2")}), kExitOk);
  EXPECT_TRUE(fs::exists(path("p2/manifest.json")));

  EXPECT_EQ(run({"recall", "--registry", reg, "--thetas", "0.5,0.95", "--out", path("r")}), kExitOk);
  const std::string recall_csv = read_file(path("r/recall.csv"));
  EXPECT_EQ(recall_csv.substr(0, recall_csv.find('\n')), "rank,id,fidelity,log_fidelity");
  EXPECT_NE(recall_csv.find("\n1,a,"), std::string::npos);

  EXPECT_EQ(run({"evolve", "--registry", reg, "--id", "a", "--time", "2", "--dt", "0.5", "--out", path("e")}),
            kExitOk);
  const std::string state = read_file(path("e/state.csv"));
  EXPECT_EQ(std::count(state.begin(), state.end(), '\n'), 1 + 5 * 2);
}

TEST_F(Cli, DomainErrorsExitOneWithJsonLine) {
  const auto reg = path("reg.json");
  ASSERT_EQ(run({"print", "--registry", reg, "--id", "a", "--thetas", "0.5", "--out", path("o")}), kExitOk);

  EXPECT_EQ(run({"print", "--registry", reg, "--id", "a", "--thetas", "0.7", "--out", path("o")}), kExitError);
  EXPECT_EQ(error_line()["error"], "duplicate_id");

  EXPECT_EQ(run({"print", "--registry", reg, "--id", "n", "--thetas", "-0.7", "--out", path("o")}), kExitError);
  EXPECT_EQ(error_line()["error"], "domain_error");

  EXPECT_EQ(run({"evolve", "--registry", reg, "--id", "zz", "--time", "1", "--out", path("o")}), kExitError);
  EXPECT_EQ(error_line()["error"], "unknown_id");

  EXPECT_EQ(run({"recall", "--registry", path("nope.json"), "--thetas", "1", "--out", path("o")}), kExitError);
  EXPECT_EQ(error_line()["error"], "registry_error");

  write_file(path("bad.json"), R"({"kind": "forgetting-curve", "modes": {"count": 1}, "typo": 1})");
  EXPECT_EQ(run({"forgetting", "--config", path("bad.json"), "--out", path("o2")}), kExitError);
  const auto e = error_line();
  EXPECT_EQ(e["error"], "config_error");
  EXPECT_NE(e["message"].get<std::string>().find("typo"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("o2")));

  EXPECT_EQ(run({"frobnicate"}), kExitError);
  EXPECT_EQ(error_line()["error"], "usage_error");
  EXPECT_EQ(run({}), kExitError);
}

TEST_F(Cli, ConfigKindMustMatchSubcommand) {
  write_file(path("c.json"), R"({"kind": "capacity-sweep", "modes": {"count": 1}})");
  EXPECT_EQ(run({"forgetting", "--config", path("c.json"), "--out", path("o")}), kExitError);
  EXPECT_EQ(error_line()["error"], "config_error");
}

TEST_F(Cli, AssociateRunsFidelityMatrixConfigs) {
  write_file(path("m.json"), R"({"kind": "fidelity-matrix", "modes": {"count": 2},
      "codes": {"sampled": {"count": 4, "seed": 1}}})");
  ASSERT_EQ(run({"associate", "--config", path("m.json"), "--out", path("m")}), kExitOk);
  EXPECT_TRUE(fs::exists(path("m/fidelity.csv")));
  EXPECT_FALSE(fs::exists(path("m/edges.csv")));
}

TEST_F(Cli, CapacityRerunIsByteIdentical) {
  write_file(path("cap.json"), R"({"kind": "capacity-sweep", "modes": {"count": 1, "omega": 1.0, "gamma": 1.0},
      "capacity": {"mode_counts": [1, 2, 4, 8], "candidates": 80, "seed": 3}})");
  ASSERT_EQ(run({"capacity", "--config", path("cap.json"), "--out", path("a"), "--threads", "1"}), kExitOk);
  ASSERT_EQ(run({"capacity", "--config", path("cap.json"), "--out", path("b"), "--threads", "2"}), kExitOk);
  for (const char* name : {"capacity.csv", "acceptance.csv", "summary.json"}) {
    EXPECT_EQ(read_file(dir_ / "a" / name), read_file(dir_ / "b" / name)) << name;
  }
  auto ma = json::parse(read_file(path("a/manifest.json")));
  EXPECT_EQ(ma["seed"], 3);
  EXPECT_EQ(ma["subcommand"], "capacity");
  EXPECT_TRUE(ma["versions"].contains("qmem"));
  EXPECT_TRUE(ma.contains("wall_time_seconds"));
  EXPECT_FALSE(has_partials(path("a")));

  // Flags override the config.
  ASSERT_EQ(run({"capacity", "--config", path("cap.json"), "--out", path("c"), "--seed", "4", "--epsilon", "0.2"}),
            kExitOk);
  const auto summary = json::parse(read_file(path("c/summary.json")));
  EXPECT_EQ(summary["config"]["capacity"]["seed"], 4);
  EXPECT_EQ(summary["config"]["epsilon"], 0.2);
  EXPECT_NE(read_file(path("a/capacity.csv")), read_file(path("c/capacity.csv")));
}

TEST_F(Cli, ForgettingSingleModeVacuumOverlapPeaksAtTau) {
  write_file(path("f.json"), R"({"kind": "forgetting-curve", "modes": {"count": 1, "omega": 1.0, "gamma": 0.25},
      "codes": {"explicit": [{"id": "x", "thetas": [0.5]}]},
      "time_grid": {"start": 0.0, "stop": 6.0, "points": 301}, "outputs": {"dir": "ignored-when-out-given"}})");
  ASSERT_EQ(run({"forgetting", "--config", path("f.json"), "--out", path("f")}), kExitOk);
  std::istringstream csv(read_file(path("f/forgetting.csv")));
  std::string line;
  std::getline(csv, line);
  double best_t = -1.0, best = -1.0;
  while (std::getline(csv, line)) {
    std::vector<std::string> cells;
    std::istringstream row(line);
    for (std::string c; std::getline(row, c, ',');) cells.push_back(c);
    if (std::stod(cells[3]) > best) {
      best = std::stod(cells[3]);
      best_t = std::stod(cells[1]);
    }
  }
  EXPECT_NEAR(best_t, 2.0, 1e-12);
  EXPECT_EQ(best, 1.0);
}

TEST_F(Cli, ConfigOutputDirIsUsedWithoutOut) {
  const auto target = dir_ / "from-config";
  write_file(path("f.json"), R"({"kind": "forgetting-curve", "modes": {"count": 1},
      "codes": {"explicit": [{"id": "x", "thetas": [0.5]}]}, "outputs": {"dir": ")" + target.generic_string() +
                                 R"("}})");
  ASSERT_EQ(run({"forgetting", "--config", path("f.json")}), kExitOk);
  EXPECT_TRUE(fs::exists(target / "forgetting.csv"));
}

TEST_F(Cli, InlineThermoAndAssociate) {
  ASSERT_EQ(run({"thermo-trace", "--thetas", "0.5,1.0", "--out", path("t")}), kExitOk);
  EXPECT_TRUE(fs::exists(path("t/first_law.csv")));
  const auto reg = path("reg.json");
  run({"print", "--registry", reg, "--id", "a", "--thetas", "0.5,1.0", "--out", path("p")});
  run({"print", "--registry", reg, "--id", "b", "--thetas", "0.55,1.0", "--out", path("p")});
  ASSERT_EQ(run({"associate", "--registry", reg, "--out", path("g"), "--time", "3"}), kExitOk);
  const auto summary = json::parse(read_file(path("g/summary.json")));
  EXPECT_EQ(summary["results"]["clusters"], json::parse(R"([["a", "b"]])"));
}

TEST_F(Cli, OracleVerifyPasses) {
  ASSERT_EQ(run({"oracle-verify", "--out", path("v"), "--quiet"}), kExitOk);
  const std::string residuals = read_file(path("v/residuals.csv"));
  EXPECT_EQ(residuals.find(",0\n"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("v/failures.csv")));
  const auto summary = json::parse(read_file(path("v/summary.json")));
  EXPECT_EQ(summary["results"]["failures"], 0);
  EXPECT_GT(summary["results"]["checks"].get<int>(), 500);
}

TEST_F(Cli, OracleVerifyFailuresExitTwoWithTable) {
  ASSERT_EQ(run({"oracle-verify", "--out", path("v"), "--quiet", "--tolerance-scale", "1e-9"}),
            kExitVerificationFailed);
  const std::string failures = read_file(path("v/failures.csv"));
  EXPECT_EQ(failures.substr(0, failures.find('\n')), "suite,label,quantity,expected,observed,residual,tolerance,pass");
  EXPECT_GT(std::count(failures.begin(), failures.end(), '\n'), 1);
  EXPECT_EQ(failures.find(",1\n"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("v/manifest.json")));
  EXPECT_EQ(err_.str(), "");
}

TEST_F(Cli, OracleVerifyRefusesUnderSizedTruncation) {
  EXPECT_EQ(run({"oracle-verify", "--dim", "20", "--out", path("v")}), kExitError);
  EXPECT_EQ(error_line()["error"], "budget_error");
  EXPECT_FALSE(fs::exists(path("v")));
}

TEST_F(Cli, HelpAndVersion) {
  EXPECT_EQ(run({"--help"}), kExitOk);
  EXPECT_NE(out_.str().find("oracle-verify"), std::string::npos);
  EXPECT_EQ(run({"--version"}), kExitOk);
  EXPECT_EQ(out_.str(), "0.1.0\n");
}

}  // namespace
}  // namespace qmem
