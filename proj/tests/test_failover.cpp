#include <gtest/gtest.h>

#include "cafo/failover.hpp"

using namespace cafo;

namespace {

int count(const Session& s, EventKind k, const std::string& section = "", std::int64_t from = 0) {
    int n = 0;
    for (const auto& e : s.events())
        if (e.kind == k && e.generation >= from && (section.empty() || e.section == section)) ++n;
    return n;
}

const MonitorEvent* first(const Session& s, EventKind k, const std::string& section = "") {
    for (const auto& e : s.events())
        if (e.kind == k && (section.empty() || e.section == section)) return &e;
    return nullptr;
}

}  // namespace

TEST(Layout, FrozenGeometry) {
    const auto& cfg = default_config();
    EXPECT_EQ(cfg.gun_period, 92);
    EXPECT_EQ(cfg.grid_width, 420);
    EXPECT_EQ(cfg.grid_height, 200);
    EXPECT_EQ(cfg.first_meeting, 136);
    EXPECT_EQ(cfg.activation_travel, 294);
    EXPECT_EQ(cfg.params, LayoutParams{});
    EXPECT_EQ(cfg.primary().external_gun.origin, (Cell{181, 11}));
    EXPECT_EQ(cfg.backup().internal_gun.origin, (Cell{267, 7}));
    EXPECT_TRUE(cfg.primary().trigger_glider.has_value());
    EXPECT_FALSE(cfg.backup().trigger_glider.has_value());
}

TEST(Layout, RegionsPartitionTheGrid) {
    const auto& cfg = default_config();
    const auto& p = cfg.primary().region;
    const auto& b = cfg.backup().region;
    EXPECT_EQ(p.x0, 0);
    EXPECT_EQ(p.x1 + 1, b.x0);
    EXPECT_EQ(b.x1, cfg.grid_width - 1);
    EXPECT_EQ(p.height(), cfg.grid_height);
    EXPECT_EQ(b.height(), cfg.grid_height);
}

TEST(Layout, PartsStayInsideTheirSection) {
    const auto& cfg = default_config();
    for (const auto& s : cfg.sections)
        for (const Placement* pl : {&s.internal_gun, &s.external_gun, &s.reflector, &s.passive_blinker, &s.eater})
            for (const auto& c : placement_cells(*pl)) EXPECT_TRUE(s.region.contains(c)) << s.name;
}

TEST(Layout, HalfTurnSymmetry) {
    const auto& cfg = default_config();
    auto a = standby_snapshot(cfg, 0);
    auto b = standby_snapshot(cfg, 1);
    std::vector<Cell> rotated;
    for (auto c : b) rotated.push_back({cfg.grid_width - 1 - c.x, cfg.grid_height - 1 - c.y});
    std::sort(rotated.begin(), rotated.end());
    EXPECT_EQ(a, rotated);
}

TEST(Layout, ConfigJsonRoundTrip) {
    const auto& cfg = default_config();
    std::string text = config_to_json(cfg);
    FailoverConfig back = config_from_json(text);
    EXPECT_EQ(config_to_json(back), text);
    EXPECT_TRUE(initial_grid(back).same_cells(initial_grid(cfg)));
    EXPECT_THROW(config_from_json("{}"), std::exception);
}

TEST(Layout, ParamsJson) {
    LayoutParams p;
    p.xa = 230;
    EXPECT_EQ(params_from_json(params_to_json(p)), p);
    EXPECT_EQ(params_from_json("{}"), LayoutParams{});
}

TEST(Layout, BadKnobsAreRejected) {
    LayoutParams p;
    p.external = {1, false};  // gun pointing the wrong way
    EXPECT_THROW(layout(builtin("p92_gun"), builtin_catalog(), p), std::invalid_argument);
    LayoutParams q;
    q.xa = 400;  // off the grid
    EXPECT_THROW(layout(builtin("p92_gun"), builtin_catalog(), q), std::invalid_argument);
}

TEST(Layout, GosperGunCannotBuild) {
    EXPECT_THROW(build_config(builtin("gosper_gun"), builtin_catalog(), LayoutParams{}, 2), std::exception);
}

TEST(Layout, VerifyReport) {
    FailoverConfig cfg = layout(builtin("p92_gun"), builtin_catalog(), LayoutParams{});
    BuildReport r = verify_config(cfg);
    EXPECT_TRUE(r.reflects_only_with_boat);
    EXPECT_TRUE(r.sustained_annihilation);
    EXPECT_TRUE(r.primary_activates);
    EXPECT_TRUE(r.backup_stays_passive);
    EXPECT_EQ(r.primary_activation_gen, 133);
}

TEST(Session, InitState) {
    Session s(default_config());
    EXPECT_EQ(s.generation(), 0);
    EXPECT_EQ(s.blinker_state(0), BlinkerState::Passive);
    EXPECT_EQ(s.blinker_state(1), BlinkerState::Passive);
    EXPECT_EQ(s.role_of_backup(), BackupRole::Standby);
    ASSERT_EQ(s.events().size(), 1u);
    EXPECT_EQ(s.events()[0].action, "Init");
    auto h = grid_hash(s.grid());
    s.step(10);
    s.init();
    EXPECT_EQ(grid_hash(s.grid()), h);
    s.init();
    EXPECT_EQ(grid_hash(s.grid()), h);
}

TEST(Session, StepZeroIsNoop) {
    Session s(default_config());
    auto h = grid_hash(s.grid());
    s.step(0);
    EXPECT_EQ(s.generation(), 0);
    EXPECT_EQ(grid_hash(s.grid()), h);
}

TEST(Session, HealthyRun) {
    Session s(default_config());
    s.step(920);
    EXPECT_GE(count(s, EventKind::HeartbeatAnnihilation, "primary"), 9);
    EXPECT_GE(count(s, EventKind::HeartbeatAnnihilation, "backup"), 9);
    EXPECT_EQ(count(s, EventKind::HeartbeatLost), 0);
    EXPECT_EQ(count(s, EventKind::BlinkerActivated, "backup"), 0);
    EXPECT_EQ(count(s, EventKind::DesyncDetected), 0);
    auto* act = first(s, EventKind::BlinkerActivated, "primary");
    ASSERT_NE(act, nullptr);
    EXPECT_LE(act->generation, 200);
    EXPECT_EQ(s.blinker_state(0), BlinkerState::Active);
    EXPECT_EQ(s.blinker_state(1), BlinkerState::Passive);
}

TEST(Session, KillThenFailover) {
    Session s(default_config());
    s.step(920);
    std::int64_t bound = s.failover_bound();
    int g = s.gliders_in_path();
    EXPECT_EQ(bound, failover_bound_formula(g, 92, s.config().activation_travel));
    s.kill_primary();
    EXPECT_EQ(s.grid().population(s.config().primary().region), 0);
    EXPECT_EQ(s.blinker_state(0), BlinkerState::Absent);
    auto h = grid_hash(s.grid());
    s.kill_primary();  // already dead
    EXPECT_EQ(grid_hash(s.grid()), h);
    EXPECT_EQ(s.events().back().action, "KillPrimary");
    s.step(bound);
    auto* done = first(s, EventKind::FailoverComplete);
    ASSERT_NE(done, nullptr);
    EXPECT_LE(done->generation - 920, bound);
    EXPECT_EQ(s.last_failover_latency(), done->generation - 920);
    auto* lost = first(s, EventKind::HeartbeatLost, "backup");
    ASSERT_NE(lost, nullptr);
    EXPECT_LE(lost->generation - 920, g * 92);
    // BlinkerActivated(backup) immediately precedes FailoverComplete
    auto it = std::find_if(s.events().begin(), s.events().end(),
                           [](const MonitorEvent& e) { return e.kind == EventKind::FailoverComplete; });
    ASSERT_NE(it, s.events().begin());
    EXPECT_EQ(std::prev(it)->kind, EventKind::BlinkerActivated);
    EXPECT_EQ(std::prev(it)->section, "backup");
    EXPECT_EQ(s.role_of_backup(), BackupRole::ActingPrimary);
    EXPECT_EQ(s.blinker_state(1), BlinkerState::Active);
}

TEST(Session, ResetRequiresPeriodMultiple) {
    Session s(default_config());
    s.step(461);
    EXPECT_EQ(s.next_reset_gen(), 552);
    try {
        s.reset_backup(false);
        FAIL() << "reset at 461 accepted";
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("N*92"), std::string::npos);
    }
    s.step(91);
    EXPECT_NO_THROW(s.reset_backup(false));
    EXPECT_EQ(s.events().back().action, "ResetBackup");
}

TEST(Session, SynchronizedResetRestoresHeartbeat) {
    Session s(default_config());
    s.step(700);
    s.kill_primary();
    s.step(500);
    while (s.generation() % 92) s.step(1);
    std::int64_t rg = s.generation();
    s.reset_backup();
    s.step(920);
    EXPECT_GE(count(s, EventKind::HeartbeatAnnihilation, "primary", rg), 9);
    EXPECT_GE(count(s, EventKind::HeartbeatAnnihilation, "backup", rg), 9);
    EXPECT_EQ(count(s, EventKind::HeartbeatLost, "", rg + 1), 0);
    EXPECT_EQ(count(s, EventKind::DesyncDetected), 0);
    EXPECT_EQ(count(s, EventKind::BlinkerActivated, "primary", rg), 0);
}

TEST(Session, ForcedResetDesyncs) {
    Session s(default_config());
    s.step(700);
    s.kill_primary();
    s.step(500);
    while (s.generation() % 92 != 46) s.step(1);
    std::int64_t rg = s.generation();
    s.reset_backup(true);
    EXPECT_EQ(s.events().back().detail, "forced");
    s.step(276);
    auto* d = first(s, EventKind::DesyncDetected);
    ASSERT_NE(d, nullptr);
    EXPECT_LE(d->generation - rg, 276);
}

TEST(Session, EventJson) {
    MonitorEvent e{920, EventKind::ActionApplied, "primary", "KillPrimary", "bound=478"};
    EXPECT_EQ(event_to_json(e),
              R"({"generation":920,"kind":"ActionApplied","section":"primary","action":"KillPrimary","detail":"bound=478"})");
    EXPECT_EQ(event_to_json({5, EventKind::HeartbeatLost, "backup", "", ""}),
              R"({"generation":5,"kind":"HeartbeatLost","section":"backup"})");
}

TEST(Session, BoundFormula) {
    EXPECT_EQ(failover_bound_formula(3, 92, 50), 326);
    EXPECT_EQ(failover_bound_formula(0, 92, 50), 50);
}
