#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "dfield_cli/cli.hpp"

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "dfield");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = dfield::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) { return std::string(DFIELD_FIXTURE_DIR) + "/" + name; }

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("dfield_cli_test_" + name);
}

TEST(Cli, CheckMarkovPassesOnLocalPath) {
  const Outcome o = run({"check-markov", "--form", fixture("path3.gdf"), "--set", "0,1"});
  EXPECT_EQ(o.code, dfield::cli::kPass) << o.err;
  const auto j = nlohmann::json::parse(o.out);
  EXPECT_EQ(j["command"], "check-markov");
  EXPECT_TRUE(j.contains("schema_version"));
}

TEST(Cli, CheckMarkovFailsOnJump) {
  const Outcome o = run({"check-markov", "--form", fixture("path3_jump.gdf"), "--set", "0,1"});
  EXPECT_EQ(o.code, dfield::cli::kAssertionFailed);
  EXPECT_NE(o.out.find("witness"), std::string::npos);
}

TEST(Cli, TwoSetChecksWithSetB) {
  const Outcome o = run({"check-markov", "--form", fixture("path3.gdf"), "--set", "0,1", "--set-b", "0"});
  EXPECT_EQ(o.code, dfield::cli::kPass) << o.err;
}

TEST(Cli, InputErrors) {
  const Outcome bad = run({"check-markov", "--form", fixture("malformed.gdf"), "--set", "0"});
  EXPECT_EQ(bad.code, dfield::cli::kInputError);
  EXPECT_NE(bad.err.find("line 3"), std::string::npos) << bad.err;
  EXPECT_EQ(run({"check-markov", "--form", fixture("path3.gdf"), "--set", "7"}).code, dfield::cli::kInputError);
  EXPECT_EQ(run({"check-markov", "--form", fixture("missing.gdf"), "--set", "0"}).code, dfield::cli::kInputError);
  EXPECT_EQ(run({"no-such-command"}).code, dfield::cli::kInputError);
  EXPECT_EQ(run({"check-markov", "--form", fixture("path3.gdf")}).code, dfield::cli::kInputError);
  EXPECT_EQ(run({"example", "nope"}).code, dfield::cli::kInputError);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run({"--help"}).code, dfield::cli::kPass); }

TEST(Cli, ScanWritesJsonAndCsv) {
  const auto json_path = temp_file("scan.json"), csv_path = temp_file("scan.csv");
  const Outcome o = run({"scan", "--form", fixture("path3.gdf"), "--form", fixture("path3_jump.gdf"), "--json",
                         json_path.string(), "--csv", csv_path.string()});
  EXPECT_EQ(o.code, dfield::cli::kPass) << o.err;
  std::ifstream jf(json_path), cf(csv_path);
  ASSERT_TRUE(jf && cf);
  const auto j = nlohmann::json::parse(jf);
  EXPECT_EQ(j["command"], "scan");
  std::string header;
  std::getline(cf, header);
  EXPECT_FALSE(header.empty());
  std::filesystem::remove(json_path);
  std::filesystem::remove(csv_path);
}

TEST(Cli, TraceOfPath) {
  const Outcome o = run({"trace", "--form", fixture("path3.gdf"), "--set", "0,2"});
  EXPECT_EQ(o.code, dfield::cli::kPass) << o.err;
  const auto j = nlohmann::json::parse(o.out);
  EXPECT_EQ(j["command"], "trace");
}

TEST(Cli, SampleIsDeterministic) {
  const std::vector<std::string> args{"sample", "--form", fixture("path30.gdf"), "--samples", "5", "--seed", "3"};
  const Outcome a = run(args), b = run(args);
  EXPECT_EQ(a.code, dfield::cli::kPass) << a.err;
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, StrongMarkovOnAnnulusRule) {
  const Outcome o = run({"check-strong-markov", "--form", fixture("path30.gdf"), "--rule", fixture("annulus_rule.json"),
                         "--samples", "20000", "--set", "9,10,11,12,13,14,15,16,17,18,19,20,21", "--set-b",
                         "0,1,2,3,4,5,6,7,8,9,10,11,12,13,17,18,19,20,21,22,23,24,25,26,27,28,29"});
  EXPECT_EQ(o.code, dfield::cli::kPass) << o.err << o.out;
}

TEST(Cli, ExampleDiagonal) {
  const Outcome o = run({"example", "diagonal"});
  EXPECT_EQ(o.code, dfield::cli::kPass) << o.err;
  EXPECT_EQ(nlohmann::json::parse(o.out)["command"], "example");
}

}  // namespace
