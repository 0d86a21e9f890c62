#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bgsp/cli.hpp"

using namespace bgsp;
using cli::execute;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / ("bgsp_test_" + name + ".json");
  std::ofstream(path) << body;
  return path.string();
}

std::string run_binary(const std::string& args, int& status) {
  const std::string cmd = std::string(BGSP_CLI_PATH) + " " + args + " 2>&1";
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    status = -1;
    return out;
  }
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) out += buf.data();
  status = WEXITSTATUS(pclose(pipe));
  return out;
}

const char* kWorked = R"({
  "slots": ["1", "1/2"],
  "players": [
    {"name": "A", "value": "10", "budget": "6"},
    {"name": "B", "value": "8", "budget": "3"},
    {"name": "C", "value": "4", "budget": "0.9"}
  ],
  "bids": [
    {"value_bid": "5", "budget_bid": "5"},
    {"value_bid": "4", "budget_bid": "2"},
    {"value_bid": "2", "budget_bid": "0"}
  ],
  "outcome": [
    {"player": "A", "slot": 1, "price": "4"},
    {"player": "B", "slot": 2, "price": "2"},
    {"player": "C", "slot": null, "price": "0"}
  ]
})";

}  // namespace

TEST(Scenario, DecimalStringsAreExact) {
  const Scenario sc = parse_scenario(R"({"slots": ["0.4"], "players": [{"value": "3", "budget": "1"}]})");
  EXPECT_EQ(sc.instance.ctrs[0], Rational(2, 5));
  EXPECT_EQ(sc.instance.players[0].name, "P1");
}

TEST(Scenario, DuplicateBudgetsWarn) {
  const Scenario sc = parse_scenario(R"({"slots": ["1", "1/2"],
    "players": [{"value": "8", "budget": "2"}, {"value": "6", "budget": "2"}]})");
  ASSERT_EQ(sc.warnings.size(), 1u);
  EXPECT_EQ(sc.warnings[0].code, IssueCode::DuplicateBudget);
}

TEST(Scenario, MissingPlayersIsAParseError) {
  try {
    parse_scenario(R"({"slots": ["1"]})");
    FAIL() << "expected ParseError";
  } catch (const ScenarioError& e) {
    EXPECT_EQ(e.kind(), ScenarioError::Kind::ParseError);
    EXPECT_NE(std::string(e.what()).find("players"), std::string::npos);
  }
}

TEST(Scenario, SyntaxErrorsCarryLineContext) {
  try {
    parse_scenario("{\n  \"slots\": [\"1\"],\n  oops\n}");
    FAIL() << "expected ParseError";
  } catch (const ScenarioError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Scenario, InvalidInstanceIsAValidationError) {
  try {
    parse_scenario(R"({"slots": ["1/2", "1"], "players": [{"value": "1", "budget": "1"}]})");
    FAIL() << "expected ValidationError";
  } catch (const ScenarioError& e) {
    EXPECT_EQ(e.kind(), ScenarioError::Kind::ValidationError);
  }
}

TEST(Scenario, RoundTripsThroughJson) {
  const Scenario sc = parse_scenario(kWorked);
  const Scenario again = parse_scenario(scenario_json(sc.instance, &*sc.bids).dump());
  EXPECT_EQ(again.instance, sc.instance);
  EXPECT_EQ(again.bids, sc.bids);
}

TEST(Cli, OneSlotDemoShowsOutcomeAndDeviation) {
  const auto ex = execute({"demo", "fig2"});
  ASSERT_EQ(ex.code, cli::kOk);
  const Json& m = ex.report.machine;
  EXPECT_EQ(m["mechanism"], "bcp");
  EXPECT_EQ(m["outcome"][0]["slot"], 1);
  EXPECT_EQ(m["outcome"][0]["price"], "4");
  EXPECT_EQ(m["verdict"], "not-nash");
  const Json& cert = m["certificates"][0];
  EXPECT_EQ(cert["player"], "P1");
  EXPECT_EQ(cert["value_bid"], "7/2");
  EXPECT_EQ(cert["new_utility"], "10");
}

TEST(Cli, EqualBudgetDemoReportsNonexistence) {
  const auto ex = execute({"demo", "fig1"});
  ASSERT_EQ(ex.code, cli::kOk);
  EXPECT_EQ(ex.report.machine["verdict"], "none");
  EXPECT_EQ(ex.report.machine["analyses"][1]["verdict"], "exists");
}

TEST(Cli, DemosArePure) {
  for (const auto& name : demos::names()) {
    if (name == "thm6" || name == "fig4") continue;  // exercised by the acceptance run
    EXPECT_EQ(execute({"demo", name}).report.text(), execute({"demo", name}).report.text()) << name;
  }
}

TEST(Cli, CoarsePublicBudgetDemo) {
  const auto ex = execute({"demo", "thm6", "--step", "300"});
  ASSERT_EQ(ex.code, cli::kOk);
  const Json& bcb = ex.report.machine["analyses"][1];
  EXPECT_EQ(bcb["verdict"], "consistent-with-nonexistence");
  EXPECT_FALSE(bcb["certificates"].empty());
  const Json& bcbo = ex.report.machine["analyses"][2];
  EXPECT_EQ(bcbo["verdict"], "nash-profiles-found");
  EXPECT_FALSE(bcbo["nash_profiles"].empty());
}

TEST(Cli, RunOnLonePlayer) {
  const auto path = write_temp("lone", R"({"slots": ["1"], "players": [{"value": "3", "budget": "2"}]})");
  const auto ex = execute({"run", "--mechanism", "bosp", path});
  ASSERT_EQ(ex.code, cli::kOk);
  EXPECT_EQ(ex.report.machine["outcome"][0]["slot"], 1);
  EXPECT_EQ(ex.report.machine["outcome"][0]["price"], "0");
}

TEST(Cli, SubcommandsOnWorkedScenario) {
  const auto path = write_temp("worked", kWorked);
  EXPECT_EQ(execute({"check-ef", path}).report.machine["verdict"], "envy-free");
  EXPECT_EQ(execute({"check-nash", "--mechanism", "bcbo", path}).code, cli::kOk);
  EXPECT_EQ(execute({"best-response", "--mechanism", "bcb", "--player", "A", path}).report.machine["verdict"],
            "improves");
  EXPECT_EQ(execute({"construct-ef", "--trace", path}).report.machine["verdict"], "envy-free");
  for (const char* m : {"bcp", "bcb", "bcbo"})
    EXPECT_EQ(execute({"realize", "--mechanism", m, path}).report.machine["verdict"], "round-trip-exact") << m;
  EXPECT_EQ(execute({"ef-exists", path}).report.machine["verdict"], "exists");
  EXPECT_EQ(execute({"grid-search", "--mechanism", "bcp", "--step", "2", "--max", "6", "--true-budgets", path}).code,
            cli::kOk);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(execute({"frobnicate"}).code, cli::kInvalidInput);
  EXPECT_EQ(execute({"run", "--mechanism", "bosp", "/nonexistent/file.json"}).code, cli::kInvalidInput);
  EXPECT_EQ(execute({"run", "--mechanism", "vickrey", "x.json"}).code, cli::kInvalidInput);
  const auto big = write_temp("big", R"({"slots": ["1"], "players": [
    {"value": "1", "budget": "1"}, {"value": "2", "budget": "2"}, {"value": "3", "budget": "3"},
    {"value": "4", "budget": "4"}, {"value": "5", "budget": "5"}]})");
  EXPECT_EQ(execute({"ef-exists", big}).code, cli::kLimitExceeded);
  EXPECT_EQ(execute({"grid-search", "--mechanism", "bcp", "--step", "1/1000", "--max", "100", big}).code,
            cli::kLimitExceeded);
  const auto dup = write_temp("dup", R"({"slots": ["1"], "players": [
    {"value": "8", "budget": "2"}, {"value": "6", "budget": "2"}]})");
  EXPECT_EQ(execute({"construct-ef", dup}).code, cli::kInvalidInput);
}

TEST(Cli, JsonOutputReparsesToExactRationals) {
  int status = 0;
  const std::string out = run_binary("--json demo fig2", status);
  ASSERT_EQ(status, 0) << out;
  const Json doc = Json::parse(out);
  EXPECT_FALSE(doc.contains("json"));
  const auto keys = std::vector<std::string>{"command", "mechanism", "outcome", "verdict", "certificates"};
  auto it = doc.begin();
  for (const auto& k : keys) EXPECT_EQ((it++).key(), k);
  EXPECT_EQ(Rational::parse(doc["certificates"][0]["value_bid"].get<std::string>()), Rational(7, 2));
  EXPECT_EQ(Rational::parse(doc["outcome"][0]["price"].get<std::string>()), Rational(4));
}

TEST(Cli, BinaryTextOutputAndStatus) {
  int status = 0;
  const std::string out = run_binary("demo fig2", status);
  EXPECT_EQ(status, 0);
  EXPECT_NE(out.find("demo fig2\n"), std::string::npos);
  EXPECT_NE(out.find("7/2 (3.5000)"), std::string::npos);
  run_binary("nonsense", status);
  EXPECT_EQ(status, 2);
}
