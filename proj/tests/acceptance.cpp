// One line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "cafo/cli.hpp"
#include "naive_life.hpp"

using namespace cafo;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(bool pass, const std::string& name, const std::string& detail) {
    std::printf("%s  %-28s %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int count(const std::vector<MonitorEvent>& ev, EventKind k, const std::string& section, std::int64_t from = 0) {
    int n = 0;
    for (const auto& e : ev)
        if (e.kind == k && e.generation >= from && (section.empty() || e.section == section)) ++n;
    return n;
}

void oracle_equivalence() {
    auto t0 = Clock::now();
    std::mt19937 rng(20240);
    std::bernoulli_distribution live(0.4);
    int bad = 0;
    for (int i = 0; i < 1000; ++i) {
        Grid g(16, 16);
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x) g.set(x, y, live(rng));
        if (naive::from_grid(step(g)) != naive::step(naive::from_grid(g))) ++bad;
    }
    double s = seconds_since(t0);
    std::ostringstream d;
    d << "1000 grids, " << bad << " mismatches, " << s << " s";
    report(bad == 0 && s < 5.0, "engine-oracle-equivalence", d.str());
}

void catalog_periods() {
    std::ostringstream d;
    bool ok = true;
    auto per = [&](const char* name, int want, Cell disp) {
        auto r = detect_period(builtin(name));
        d << name << "=" << r.period << " ";
        ok = ok && r.period == want && r.displacement == disp;
    };
    per("blinker", 2, {0, 0});
    per("block", 1, {0, 0});
    per("boat", 1, {0, 0});
    per("glider", 4, {1, 1});
    int gosper = detect_emission_period(builtin("gosper_gun"));
    int p92 = detect_emission_period(builtin("p92_gun"), Rule::conway(), 8, 800);
    d << "gosper=" << gosper << " p92=" << p92;
    report(ok && gosper == 30 && p92 == 92, "component-catalog", d.str());
}

void table_reactions() {
    const auto& cat = builtin_catalog();
    std::ostringstream d;
    bool ok = true;
    auto ann = replay(find_reaction(cat, "annihilate"));
    ok = ok && ann.kind == CollisionKind::Annihilation && ann.residue.empty() && ann.settle_generation <= 400;
    d << "annihilation@" << ann.settle_generation << " ";
    const auto& rr = find_reaction(cat, "reflect");
    auto refl = replay(rr);
    bool turned = refl.residue_heading && (*refl.residue_heading == rotate_heading(rr.projectile.heading, {1, false}) ||
                                           *refl.residue_heading == rotate_heading(rr.projectile.heading, {3, false}));
    bool boat_gone = refl.residue.size() == 5 && match_glider(refl.residue.cells).has_value();
    ok = ok && refl.kind == CollisionKind::Reflection && turned && boat_gone && refl.settle_generation <= 400;
    d << "reflection90@" << refl.settle_generation << (boat_gone ? " boat-destroyed " : " boat-left ");
    auto act = replay(find_reaction(cat, "activate"));
    ok = ok && act.kind == CollisionKind::Transformation && act.residue_name == "blinker" && act.residue.size() == 3 &&
         act.settle_generation <= 400;
    d << "passive->blinker@" << act.settle_generation;
    report(ok, "table1-reactions", d.str());
}

void healthy() {
    Session s(default_config());
    s.step(920);
    int p = count(s.events(), EventKind::HeartbeatAnnihilation, "primary");
    int b = count(s.events(), EventKind::HeartbeatAnnihilation, "backup");
    int act = count(s.events(), EventKind::BlinkerActivated, "backup");
    std::ostringstream d;
    d << "920 gens: annihilations primary=" << p << " backup=" << b << " backup-activations=" << act;
    report(act == 0 && p >= 9 && b >= 9, "healthy-operation", d.str());
}

void failover_bound() {
    std::mt19937 rng(1840);
    std::uniform_int_distribution<int> pick(93, 1839);
    std::vector<int> kills = {92, 1840};
    while (kills.size() < 20) kills.push_back(pick(rng));
    int violations = 0, min_slack = 1 << 30;
    for (int k : kills) {
        Session s(default_config());
        s.step(k);
        s.kill_primary();
        std::int64_t bound = s.events().back().detail.empty() ? 0 : std::stoll(s.events().back().detail.substr(6));
        s.step(bound + 1);
        std::int64_t lat = s.last_failover_latency();
        if (lat < 0 || lat > bound)
            ++violations;
        else
            min_slack = std::min<int>(min_slack, static_cast<int>(bound - lat));
    }
    std::ostringstream d;
    d << kills.size() << " kills in [92,1840], violations=" << violations << " min slack=" << min_slack;
    report(violations == 0, "failover-liveness-bound", d.str());
}

void reset_cycles() {
    Session s(default_config());
    s.step(700);
    int good = 0;
    std::ostringstream d;
    for (int c = 0; c < 4; ++c) {
        s.kill_primary();
        s.step(460);
        s.step(s.next_reset_gen() - s.generation());
        std::int64_t rg = s.generation();
        s.reset_backup(false);
        s.step(920);
        const auto& ev = s.events();
        int p = count(ev, EventKind::HeartbeatAnnihilation, "primary", rg);
        int b = count(ev, EventKind::HeartbeatAnnihilation, "backup", rg);
        bool clean = count(ev, EventKind::HeartbeatLost, "", rg + 1) == 0 &&
                     count(ev, EventKind::DesyncDetected, "", rg) == 0 && p >= 9 && b >= 9 &&
                     s.last_failover_latency() >= 0 && s.last_failover_latency() <= s.last_failover_bound();
        d << "reset@" << rg << (clean ? " ok " : " broken ");
        if (clean) ++good;
    }
    report(good >= 3 && good == 4, "synchronized-reset-cycles", d.str());
}

void forced_desync() {
    std::set<int> seen;
    std::ostringstream d;
    for (int off : {4, 46}) {
        Session s(default_config());
        s.step(700);
        s.kill_primary();
        s.step(500);
        while (s.generation() % 92 != off) s.step(1);
        std::int64_t rg = s.generation();
        s.reset_backup(true);
        s.step(276);
        for (const auto& e : s.events())
            if (e.kind == EventKind::DesyncDetected && e.generation - rg <= 276) {
                seen.insert(off);
                d << "offset " << off << " -> desync after " << e.generation - rg << " gens; ";
                break;
            }
    }
    d << "observed set {";
    for (int o : seen) d << " " << o;
    d << " }";
    report(!seen.empty(), "forced-desync", d.str());
}

void determinism() {
    auto s = parse_scenario(R"({"total": 2760, "actions": [{"generation": 920, "name": "KillPrimary"},
        {"generation": 1472, "name": "ResetBackup"}, {"generation": 2208, "name": "KillPrimary"}]})");
    auto dump = [](const RunResult& r) {
        std::string out;
        for (const auto& e : r.events) out += event_to_json(e) + "\n";
        return out;
    };
    auto a = run_scenario(s, default_config());
    auto b = run_scenario(s, default_config());
    std::ostringstream d;
    d << a.events.size() << " events, hash " << hash_hex(a.final_hash);
    report(dump(a) == dump(b) && a.final_hash == b.final_hash && !a.events.empty(), "deterministic-event-log",
           d.str());
}

void performance() {
    Grid g = initial_grid(default_config());
    Stepper st(Rule::conway());
    st.advance(g, 200);  // warm up
    const int n = 20000;
    auto t0 = Clock::now();
    st.advance(g, n);
    double rate = n / seconds_since(t0);
    std::ostringstream d;
    d << static_cast<long>(rate) << " gens/s on 420x200 (single thread)";
    report(rate >= 5000, "engine-throughput", d.str());
}

}  // namespace

int main() {
    oracle_equivalence();
    catalog_periods();
    table_reactions();
    healthy();
    failover_bound();
    reset_cycles();
    forced_desync();
    determinism();
    performance();
    std::printf("%d failed\n", failures);
    return failures ? 1 : 0;
}
