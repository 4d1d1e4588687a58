#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cafo/failover.hpp"

namespace cafo {

struct ScenarioAction {
    std::int64_t generation = 0;
    std::string name;  // Init, KillPrimary, ResetBackup
    bool force = false;
};

// Scenario file (JSON):
//   {"config": "builtin" | "<config.json>", "total": 2760,
//    "actions": [{"generation": 920, "name": "KillPrimary", "force": false}],
//    "outputs": {"events": "events.jsonl", "frames": [0, 920], "metrics": "metrics.json"}}
// Relative paths are resolved against the scenario file's directory
// (config) or the output directory (outputs).
struct Scenario {
    std::string config = "builtin";
    std::int64_t total = 0;
    std::vector<ScenarioAction> actions;
    std::string events_path = "events.jsonl";
    std::vector<std::int64_t> frames;
    std::string metrics_path = "metrics.json";
};

// Throws std::invalid_argument with a readable message.
Scenario parse_scenario(const std::string& text);
std::string scenario_to_json(const Scenario& s);

struct FailoverRecord {
    std::int64_t kill = 0;
    std::int64_t complete = -1;
    std::int64_t latency = -1;
    std::int64_t bound = 0;
};

struct RunResult {
    int exit_code = 0;  // 0 ok, 1 invariant violation, 2 rejected action
    std::vector<std::string> violations;
    std::string error;
    std::vector<MonitorEvent> events;
    std::vector<FailoverRecord> failovers;
    std::uint64_t final_hash = 0;
    std::string metrics_json;
};

// Runs the scenario; writes artifacts when out_dir is non-empty.
RunResult run_scenario(const Scenario& s, const FailoverConfig& cfg, const std::filesystem::path& out_dir = {});

// Checks the invariants that the runner enforces over a finished event log.
std::vector<std::string> check_invariants(const std::vector<MonitorEvent>& events, std::int64_t end_generation);

struct ValidationRow {
    std::string subject;
    std::string check;
    std::string expected;
    std::string observed;
    bool pass = false;
};

std::vector<ValidationRow> validate_assets(const std::vector<Reaction>& catalog);
std::string format_validation(const std::vector<ValidationRow>& rows);

}  // namespace cafo
