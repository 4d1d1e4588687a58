#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cafo/cli.hpp"

using namespace cafo;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("cafo_test_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST(Scenario, Parse) {
    auto s = parse_scenario(R"({"total": 100, "actions": [{"generation": 92, "name": "ResetBackup", "force": true}],
                                 "outputs": {"frames": [0, 50]}})");
    EXPECT_EQ(s.config, "builtin");
    EXPECT_EQ(s.total, 100);
    ASSERT_EQ(s.actions.size(), 1u);
    EXPECT_TRUE(s.actions[0].force);
    EXPECT_EQ(s.frames, (std::vector<std::int64_t>{0, 50}));
    EXPECT_EQ(parse_scenario(scenario_to_json(s)).actions[0].generation, 92);
}

TEST(Scenario, Invalid) {
    EXPECT_THROW(parse_scenario("not json"), std::invalid_argument);
    EXPECT_THROW(parse_scenario(R"({"actions": []})"), std::invalid_argument);
    EXPECT_THROW(parse_scenario(R"({"total": 10, "actions": [{"generation": 11, "name": "Init"}]})"),
                 std::invalid_argument);
    EXPECT_THROW(parse_scenario(R"({"total": 10, "actions": [{"generation": 5, "name": "Explode"}]})"),
                 std::invalid_argument);
    EXPECT_THROW(parse_scenario(R"({"total": 10, "actions": [{"generation": 5, "name": "Init"},
                                                              {"generation": 4, "name": "Init"}]})"),
                 std::invalid_argument);
}

TEST(Scenario, KillRunsToFailover) {
    auto s = parse_scenario(R"({"total": 2760, "actions": [{"generation": 920, "name": "KillPrimary"}]})");
    auto r = run_scenario(s, default_config());
    EXPECT_EQ(r.exit_code, 0);
    ASSERT_EQ(r.failovers.size(), 1u);
    EXPECT_EQ(r.failovers[0].kill, 920);
    EXPECT_GE(r.failovers[0].complete, 920);
    EXPECT_LE(r.failovers[0].latency, r.failovers[0].bound);
}

TEST(Scenario, HealthyRunExitsZero) {
    auto r = run_scenario(parse_scenario(R"({"total": 1840})"), default_config());
    EXPECT_EQ(r.exit_code, 0);
    for (const auto& e : r.events) EXPECT_FALSE(e.kind == EventKind::BlinkerActivated && e.section == "backup");
}

TEST(Scenario, UnsynchronizedResetIsRejected) {
    auto s = parse_scenario(R"({"total": 1100, "actions": [{"generation": 1003, "name": "ResetBackup"}]})");
    auto r = run_scenario(s, default_config());
    EXPECT_NE(r.exit_code, 0);
    EXPECT_NE(r.error.find("N*92"), std::string::npos);
}

TEST(Scenario, ArtifactsAndDeterminism) {
    auto s = parse_scenario(R"({"total": 1300, "actions": [{"generation": 920, "name": "KillPrimary"}],
                                 "outputs": {"frames": [0, 920, 1000]}})");
    auto a = scratch("a"), b = scratch("b");
    run_scenario(s, default_config(), a);
    run_scenario(s, default_config(), b);
    for (const char* f : {"events.jsonl", "metrics.json", "frame_0.rle", "frame_920.rle", "frame_1000.txt"}) {
        ASSERT_TRUE(fs::exists(a / f)) << f;
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
    // dumped frame resumes identically
    Grid g920 = grid_from_rle(slurp(a / "frame_920.rle"));
    EXPECT_EQ(g920.generation(), 920);
    EXPECT_EQ(g920.population(default_config().primary().region), 0);
    Stepper(Rule::conway()).advance(g920, 80);
    EXPECT_TRUE(g920.same_cells(grid_from_rle(slurp(a / "frame_1000.rle"))));
    EXPECT_TRUE(grid_from_rle(slurp(a / "frame_1000.rle")).same_cells(from_ascii(slurp(a / "frame_1000.txt"))));
}

TEST(Scenario, InvariantChecker) {
    std::vector<MonitorEvent> ok = {{0, EventKind::ActionApplied, "", "Init", ""},
                                    {10, EventKind::ActionApplied, "primary", "KillPrimary", "bound=100"},
                                    {90, EventKind::BlinkerActivated, "backup", "", ""},
                                    {90, EventKind::FailoverComplete, "backup", "", ""}};
    EXPECT_TRUE(check_invariants(ok, 200).empty());
    auto late = ok;
    late[2].generation = late[3].generation = 150;
    EXPECT_EQ(check_invariants(late, 200).size(), 1u);
    std::vector<MonitorEvent> spurious = {{0, EventKind::ActionApplied, "", "Init", ""},
                                          {50, EventKind::BlinkerActivated, "backup", "", ""}};
    EXPECT_EQ(check_invariants(spurious, 100).size(), 1u);
    std::vector<MonitorEvent> stalled = {{0, EventKind::ActionApplied, "", "Init", ""},
                                         {10, EventKind::ActionApplied, "primary", "KillPrimary", "bound=100"}};
    EXPECT_TRUE(check_invariants(stalled, 100).empty());
    EXPECT_EQ(check_invariants(stalled, 111).size(), 1u);
}

TEST(Validate, AllRowsPass) {
    auto rows = validate_assets(builtin_catalog());
    EXPECT_GE(rows.size(), 11u);
    for (const auto& r : rows) EXPECT_TRUE(r.pass) << r.subject << ": " << r.observed;
    auto text = format_validation(rows);
    EXPECT_NE(text.find("p92_gun"), std::string::npos);
}
