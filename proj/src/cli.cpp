#include "cafo/cli.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cafo {

using json = nlohmann::ordered_json;

namespace {

const char* kActions[] = {"Init", "KillPrimary", "ResetBackup"};

std::int64_t bound_of(const MonitorEvent& e) {
    auto pos = e.detail.find("bound=");
    if (pos == std::string::npos) return -1;
    return std::stoll(e.detail.substr(pos + 6));
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << text;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("scenario: not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("scenario: top level must be an object");
    Scenario s;
    try {
        s.config = j.value("config", s.config);
        if (!j.contains("total")) throw std::invalid_argument("scenario: missing 'total'");
        s.total = j.at("total").get<std::int64_t>();
        if (s.total < 0) throw std::invalid_argument("scenario: 'total' must be >= 0");
        if (j.contains("actions"))
            for (const auto& a : j.at("actions")) {
                ScenarioAction act;
                act.generation = a.at("generation").get<std::int64_t>();
                act.name = a.at("name").get<std::string>();
                act.force = a.value("force", false);
                if (std::find(std::begin(kActions), std::end(kActions), act.name) == std::end(kActions))
                    throw std::invalid_argument("scenario: unknown action '" + act.name + "'");
                if (act.generation < 0 || act.generation > s.total)
                    throw std::invalid_argument("scenario: action " + act.name + " at generation " +
                                                std::to_string(act.generation) + " outside [0, total]");
                if (!s.actions.empty() && act.generation < s.actions.back().generation)
                    throw std::invalid_argument("scenario: actions must be sorted by generation");
                s.actions.push_back(act);
            }
        if (j.contains("outputs")) {
            const auto& o = j.at("outputs");
            s.events_path = o.value("events", s.events_path);
            s.metrics_path = o.value("metrics", s.metrics_path);
            if (o.contains("frames")) s.frames = o.at("frames").get<std::vector<std::int64_t>>();
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("scenario: ") + e.what());
    }
    for (auto g : s.frames)
        if (g < 0 || g > s.total) throw std::invalid_argument("scenario: frame generation outside [0, total]");
    return s;
}

std::string scenario_to_json(const Scenario& s) {
    json j;
    j["config"] = s.config;
    j["total"] = s.total;
    j["actions"] = json::array();
    for (const auto& a : s.actions) j["actions"].push_back({{"generation", a.generation}, {"name", a.name}, {"force", a.force}});
    j["outputs"] = {{"events", s.events_path}, {"frames", s.frames}, {"metrics", s.metrics_path}};
    return j.dump(2) + "\n";
}

std::vector<std::string> check_invariants(const std::vector<MonitorEvent>& events, std::int64_t end_generation) {
    std::vector<std::string> out;
    std::string acting = "primary";
    std::int64_t kill = -1, bound = 0, last = -1;
    bool forced = false;
    const MonitorEvent* prev = nullptr;
    for (const auto& e : events) {
        auto where = " at generation " + std::to_string(e.generation);
        if (e.kind == EventKind::ActionApplied && e.action == "Init") {
            acting = "primary";
            kill = -1;
            forced = false;
            last = e.generation;
            prev = &e;
            continue;
        }
        if (e.generation < last) out.push_back("events out of generation order" + where);
        last = e.generation;
        if (e.kind == EventKind::ActionApplied && e.action == "KillPrimary" && kill < 0) {
            kill = e.generation;
            bound = bound_of(e);
        }
        if (e.kind == EventKind::ActionApplied && e.action == "ResetBackup" && e.detail == "forced") forced = true;
        if (e.kind == EventKind::BlinkerActivated && e.section != acting && kill < 0 && !forced)
            out.push_back("false failover: " + e.section + " blinker activated without a kill" + where);
        if (e.kind == EventKind::FailoverComplete) {
            if (kill < 0) {
                out.push_back("FailoverComplete without KillPrimary" + where);
            } else {
                if (e.generation - kill > bound)
                    out.push_back("failover latency " + std::to_string(e.generation - kill) + " exceeds bound " +
                                  std::to_string(bound) + where);
                if (!prev || prev->kind != EventKind::BlinkerActivated || prev->section != e.section ||
                    prev->generation != e.generation)
                    out.push_back("FailoverComplete not preceded by BlinkerActivated" + where);
            }
            acting = e.section;
            kill = -1;
        }
        prev = &e;
    }
    if (kill >= 0 && end_generation - kill > bound)
        out.push_back("no FailoverComplete within bound " + std::to_string(bound) + " of kill at generation " +
                      std::to_string(kill));
    return out;
}

RunResult run_scenario(const Scenario& s, const FailoverConfig& cfg, const std::filesystem::path& out_dir) {
    RunResult r;
    Session session(cfg);
    std::vector<MonitorEvent> log;
    std::size_t next_action = 0;
    std::vector<std::int64_t> frames = s.frames;
    std::sort(frames.begin(), frames.end());
    frames.erase(std::unique(frames.begin(), frames.end()), frames.end());
    std::size_t next_frame = 0;
    std::map<std::string, std::string> artifacts;

    auto flush = [&] {
        log.insert(log.end(), session.events().begin(), session.events().end());
    };
    for (std::int64_t clock = 0;; ++clock) {
        for (; next_action < s.actions.size() && s.actions[next_action].generation == clock; ++next_action) {
            const auto& a = s.actions[next_action];
            try {
                if (a.name == "Init") {
                    flush();
                    session.init();
                } else if (a.name == "KillPrimary") {
                    session.kill_primary();
                } else {
                    session.reset_backup(a.force);
                }
            } catch (const std::invalid_argument& e) {
                r.exit_code = 2;
                r.error = a.name + " at generation " + std::to_string(session.generation()) + " rejected: " + e.what();
                break;
            }
        }
        if (r.exit_code == 2) break;
        for (; next_frame < frames.size() && frames[next_frame] == clock; ++next_frame) {
            auto stem = "frame_" + std::to_string(clock);
            artifacts[stem + ".rle"] = grid_to_rle(session.grid());
            artifacts[stem + ".txt"] = to_ascii(session.grid());
        }
        if (clock == s.total) break;
        session.step(1);
    }
    flush();
    r.events = log;
    r.final_hash = grid_hash(session.grid());

    if (r.exit_code == 0) {
        r.violations = check_invariants(log, session.generation());
        if (!r.violations.empty()) r.exit_code = 1;
    }

    // metrics
    std::map<std::string, std::map<std::string, int>> counts;
    for (const auto& e : log) {
        if (e.kind == EventKind::ActionApplied) continue;
        counts[event_kind_name(e.kind)][e.section.empty() ? "-" : e.section]++;
    }
    std::int64_t kill = -1, bound = 0;
    for (const auto& e : log) {
        if (e.kind == EventKind::ActionApplied && e.action == "KillPrimary" && kill < 0) {
            kill = e.generation;
            bound = bound_of(e);
        }
        if (e.kind == EventKind::ActionApplied && e.action == "Init") kill = -1;
        if (e.kind == EventKind::FailoverComplete && kill >= 0) {
            r.failovers.push_back({kill, e.generation, e.generation - kill, bound});
            kill = -1;
        }
    }
    if (kill >= 0) r.failovers.push_back({kill, -1, -1, bound});

    json m;
    m["total"] = s.total;
    m["final_generation"] = session.generation();
    m["final_hash"] = hash_hex(r.final_hash);
    m["exit_code"] = r.exit_code;
    m["activation_travel"] = cfg.activation_travel;
    json c = json::object();
    for (const auto& [kind, per] : counts) c[kind] = per;
    m["event_counts"] = c;
    m["failovers"] = json::array();
    for (const auto& f : r.failovers)
        m["failovers"].push_back({{"kill", f.kill}, {"complete", f.complete}, {"latency", f.latency}, {"bound", f.bound}});
    m["violations"] = r.violations;
    if (!r.error.empty()) m["error"] = r.error;
    r.metrics_json = m.dump(2) + "\n";

    if (!out_dir.empty()) {
        std::string ev;
        for (const auto& e : log) ev += event_to_json(e) + "\n";
        write_file(out_dir / s.events_path, ev);
        write_file(out_dir / s.metrics_path, r.metrics_json);
        for (const auto& [name, text] : artifacts) write_file(out_dir / name, text);
    }
    return r;
}

std::vector<ValidationRow> validate_assets(const std::vector<Reaction>& catalog) {
    std::vector<ValidationRow> rows;
    auto add = [&](std::string subject, std::string check, std::string expected, auto&& observe) {
        ValidationRow row{std::move(subject), std::move(check), std::move(expected), "", false};
        try {
            row.observed = observe();
        } catch (const std::exception& e) {
            row.observed = std::string("error: ") + e.what();
        }
        row.pass = row.observed == row.expected;
        rows.push_back(row);
    };
    auto period = [](const std::string& name) {
        return [name] {
            auto r = detect_period(builtin(name));
            return "period " + std::to_string(r.period) + " displacement (" + std::to_string(r.displacement.x) + "," +
                   std::to_string(r.displacement.y) + ")";
        };
    };
    add("blinker", "oscillator", "period 2 displacement (0,0)", period("blinker"));
    add("block", "still life", "period 1 displacement (0,0)", period("block"));
    add("boat", "still life", "period 1 displacement (0,0)", period("boat"));
    add("passive_blinker", "still life", "period 1 displacement (0,0)", period("passive_blinker"));
    add("eater", "still life", "period 1 displacement (0,0)", period("eater"));
    add("glider", "spaceship", "period 4 displacement (1,1)", period("glider"));
    add("gosper_gun", "emission period", "30",
        [] { return std::to_string(detect_emission_period(builtin("gosper_gun"))); });
    add("p92_gun", "emission period", "92",
        [] { return std::to_string(detect_emission_period(builtin("p92_gun"), Rule::conway(), 8, 800)); });

    auto describe = [](const CollisionOutcome& o) {
        std::string s = kind_name(o.kind);
        if (o.residue_heading) s += " heading " + heading_name(*o.residue_heading);
        if (o.kind == CollisionKind::Reflection) s += o.residue.size() == 5 ? ", target destroyed" : ", debris left";
        if (!o.residue_name.empty() && o.kind != CollisionKind::Reflection) s += " residue " + o.residue_name;
        return s;
    };
    // the three interactions every construction relies on
    add("glider+glider", "collision", "Annihilation", [&] {
        return describe(replay(find_reaction(catalog, "annihilate")));
    });
    add("boat+glider", "collision", "Reflection heading SE, target destroyed", [&] {
        const auto& r = find_reaction(catalog, "reflect");
        auto o = replay(r);
        auto turn = rotate_heading(r.projectile.heading, {1, false});
        auto back = rotate_heading(r.projectile.heading, {3, false});
        if (!o.residue_heading || !(*o.residue_heading == turn || *o.residue_heading == back))
            return describe(o) + " (not a 90 degree turn)";
        return describe(o);
    });
    add("passive_blinker+glider", "collision", "Transformation residue blinker", [&] {
        return describe(replay(find_reaction(catalog, "activate")));
    });
    for (const auto& r : catalog) {
        add("catalog:" + r.name, "replay matches record", "settle " + std::to_string(r.outcome.settle_generation), [&] {
            auto o = replay(r);
            if (o.kind != r.outcome.kind || !(o.residue == r.outcome.residue) ||
                !(o.residue_origin == r.outcome.residue_origin))
                return describe(o) + " differs from record";
            if (o.settle_generation > 400) return std::string("settles after 400");
            return "settle " + std::to_string(o.settle_generation);
        });
    }
    return rows;
}

std::string format_validation(const std::vector<ValidationRow>& rows) {
    std::size_t w0 = 7, w1 = 5;
    for (const auto& r : rows) {
        w0 = std::max(w0, r.subject.size());
        w1 = std::max(w1, r.check.size());
    }
    std::ostringstream os;
    auto pad = [](const std::string& s, std::size_t w) { return s + std::string(w - s.size(), ' '); };
    os << pad("subject", w0) << "  " << pad("check", w1) << "  result  observed\n";
    for (const auto& r : rows)
        os << pad(r.subject, w0) << "  " << pad(r.check, w1) << "  " << (r.pass ? "PASS  " : "FAIL  ") << "  "
           << r.observed << (r.pass ? "" : " (expected " + r.expected + ")") << "\n";
    return os.str();
}

}  // namespace cafo
