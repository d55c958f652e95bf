#include "qkr/cli.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

using nlohmann::json;

namespace {

constexpr const char* kTheta = "1,0,1,1/0,1,1,1/1,1,0,1";
constexpr const char* kOmega = "1,2,3/1,3,6";

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = qkr::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// "PASS  name  detail" lines of the table output.
std::map<std::string, bool> table_findings(const std::string& text) {
  std::map<std::string, bool> f;
  static const std::regex line(R"(^(PASS|FAIL)  (\S+)  )");
  std::istringstream in(text);
  std::string l;
  std::smatch m;
  while (std::getline(in, l))
    if (std::regex_search(l, m, line)) f[m[2]] = m[1] == "PASS";
  return f;
}

std::map<std::string, bool> json_findings(const json& j) {
  std::map<std::string, bool> f;
  for (const auto& x : j.at("findings")) f[x.at("name")] = x.at("passed");
  return f;
}

}  // namespace

TEST(Exit, AdmissibleCheckPasses) {
  const Result r = run({"check", kTheta});
  EXPECT_EQ(r.code, qkr::cli::kPass);
  EXPECT_NE(r.out.find("D123 = -2"), std::string::npos);
  EXPECT_EQ(run({"check", kOmega}).code, qkr::cli::kPass);
}

TEST(Exit, InadmissibleCarriesWitness) {
  const Result r = run({"check", "1,1,0,0/0,0,1,0/0,0,0,1"});
  EXPECT_EQ(r.code, qkr::cli::kInadmissible);
  EXPECT_NE(r.out.find("witness: D123"), std::string::npos);
  const Result j = run({"--output", "json", "strata", "1,1,0,0/0,0,1,0/0,0,0,1"});
  EXPECT_EQ(j.code, qkr::cli::kInadmissible);
  EXPECT_EQ(json::parse(j.out).at("witness"), "D123");
}

TEST(Exit, UsageErrors) {
  EXPECT_EQ(run({"check", "1,a"}).code, qkr::cli::kUsage);
  EXPECT_EQ(run({"check", "1,2/3"}).code, qkr::cli::kUsage);
  EXPECT_EQ(run({"check", "1,2,3,4,5/1,2,3,4,5"}).code, qkr::cli::kUsage);
  EXPECT_EQ(run({"--family", "omega", "check", kTheta}).code, qkr::cli::kUsage);
  EXPECT_EQ(run({"frobnicate"}).code, qkr::cli::kUsage);
  EXPECT_EQ(run({"check", "2000000,0,0,0/0,1,0,0/0,0,1,0"}).code, qkr::cli::kUsage);
}

TEST(Exit, StrictRequiresSeed) {
  unsetenv("QKREDUCE_SEED");
  EXPECT_EQ(run({"--strict", "sample", kOmega, "--n", "2"}).code, qkr::cli::kUsage);
  EXPECT_EQ(run({"--strict", "--seed", "5", "sample", kOmega, "--n", "2"}).code, qkr::cli::kPass);
  setenv("QKREDUCE_SEED", "5", 1);
  EXPECT_EQ(run({"--strict", "sample", kOmega, "--n", "2"}).code, qkr::cli::kPass);
  unsetenv("QKREDUCE_SEED");
}

TEST(Output, SeedFromEnvironmentMatchesFlag) {
  setenv("QKREDUCE_SEED", "19", 1);
  const Result env = run({"--output", "json", "sample", kOmega, "--n", "3"});
  unsetenv("QKREDUCE_SEED");
  const Result flag = run({"--output", "json", "--seed", "19", "sample", kOmega, "--n", "3"});
  EXPECT_EQ(env.out, flag.out);
  EXPECT_EQ(json::parse(flag.out).at("seed"), 19);
}

TEST(Output, TableAndJsonAgreeOnFindings) {
  for (const std::vector<std::string>& cmd :
       {std::vector<std::string>{"sample", kTheta, "--n", "8"}, {"verify", kOmega}, {"strata", kOmega}}) {
    std::vector<std::string> t = {"--seed", "3"}, j = {"--seed", "3", "--output", "json"};
    t.insert(t.end(), cmd.begin(), cmd.end());
    j.insert(j.end(), cmd.begin(), cmd.end());
    const Result a = run(t), b = run(j);
    EXPECT_EQ(a.code, b.code) << cmd[0];
    const auto ft = table_findings(a.out);
    EXPECT_FALSE(ft.empty()) << cmd[0];
    EXPECT_EQ(ft, json_findings(json::parse(b.out))) << cmd[0];
  }
}

TEST(Output, SampleReportsRanks) {
  const json j = json::parse(run({"--seed", "4", "--output", "json", "sample", kTheta, "--n", "10"}).out);
  EXPECT_EQ(j.at("expected_rank"), 18);
  EXPECT_EQ(j.at("dim_N"), 13);
  EXPECT_EQ(j.at("orbit_rank_G"), 6);
  EXPECT_EQ(j.at("orbit_rank_twistor"), 7);
}

TEST(Output, RepeatedRunsAreIdentical) {
  const std::vector<std::string> args = {"--seed", "8", "--output", "json", "strata", kTheta};
  EXPECT_EQ(run(args).out, run(args).out);
}

TEST(Golden, CompareIsByteStable) {
  const Result r = run({"compare", kTheta, kOmega, "--output", "json"});
  EXPECT_EQ(r.code, qkr::cli::kPass);
  EXPECT_EQ(r.out, slurp(std::string(QKR_GOLDEN_DIR) + "/compare_theta_ex_omega_ex.json"));
  const json j = json::parse(r.out);
  EXPECT_TRUE(j.at("structurally_distinct").get<bool>());
  EXPECT_EQ(j.at("catalogs").at("theta_twistor").at("counts").at("listed"), 36);
  EXPECT_EQ(j.at("catalogs").at("omega_twistor").at("counts").at("listed"), 7);
}

TEST(Search, BoundZeroFindsNothing) {
  const Result r = run({"--output", "json", "search", "--bound", "0"});
  EXPECT_EQ(r.code, qkr::cli::kPass);
  const auto f = json_findings(json::parse(r.out));
  EXPECT_TRUE(f.at("no_free_action"));
  EXPECT_TRUE(f.at("symbolic_system_violated"));
}
