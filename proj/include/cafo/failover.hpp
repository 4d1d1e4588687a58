#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cafo/engine.hpp"
#include "cafo/gliders.hpp"
#include "cafo/oracles.hpp"
#include "cafo/patterns.hpp"

namespace cafo {

// Knobs of the construction. The external stream of the primary meets the
// backup's internal stream at the crossing (xa, ya); everything else is
// placed relative to that meeting point and mirrored for the other side.
struct LayoutParams {
    int xa = 233, ya = 70;          // SE glider bbox at the meeting, generation `meet`
    int meet = 44;                  // meeting generation mod period
    Transform external{3, true};    // gun orientation of the external stream
    Transform internal{1, false};   // gun orientation of the internal stream
    int external_back = 30;         // gun distance behind the meeting point, in cells
    int internal_back = 30;
    int boat_along = 6;             // boat distance along the internal lane (catalog reaction units)
    int eater_along = 10;
    int blinker_along = -6;         // passive blinker along the reflected lane
    int trigger_lead = 0;           // extra cells between the trigger glider and the boat
    int split_x = 210;              // first column of the backup region
    friend bool operator==(const LayoutParams&, const LayoutParams&) = default;
};

// A monitored glider lane: gliders sighted inside `window` (next to the
// gun) travelling along `lane` must have tau mod period == tau_mod.
struct LaneWatch {
    Heading heading;
    std::int64_t lane = 0;
    std::int64_t tau_mod = 0;
    Region window;
};

struct SectionLayout {
    std::string name;
    Region region;
    Region reset_pocket;  // cleared with the region on reset
    Placement internal_gun;
    Placement external_gun;
    Placement reflector;
    Placement passive_blinker;
    Placement eater;
    std::optional<Placement> trigger_glider;
    Region blinker_site;
    Region crossing;  // where this section's internal stream is annihilated
    Region lost_sentinel;  // on the internal lane just past the crossing
    LaneWatch external_lane;
    LaneWatch internal_lane;
};

struct FailoverConfig {
    int grid_width = 420;
    int grid_height = 200;
    Rule rule;
    int gun_period = 92;
    LayoutParams params;
    std::array<SectionLayout, 2> sections;  // [0] primary, [1] backup
    Region corridor_region;
    int activation_travel = 0;
    int first_meeting = 0;  // generation of the first heartbeat annihilation
    // external gun offset relative to the internal gun, per section
    std::array<Cell, 2> gun_offsets;

    const SectionLayout& primary() const { return sections[0]; }
    const SectionLayout& backup() const { return sections[1]; }
};

// Cells a section restores on reset (no trigger glider).
std::vector<Cell> standby_snapshot(const FailoverConfig& cfg, int section);
// Every placement of both sections, including the primary's trigger.
Grid initial_grid(const FailoverConfig& cfg);

// Deterministic layout for the given knobs; throws if parts overlap or
// leave the grid. No simulation.
FailoverConfig layout(const Pattern& gun, const std::vector<Reaction>& catalog, const LayoutParams& p,
                      int period = 92);

struct BuildReport {
    bool reflects_only_with_boat = false;
    bool sustained_annihilation = false;
    bool primary_activates = false;
    bool backup_stays_passive = false;
    int annihilations[2] = {0, 0};
    int primary_activation_gen = -1;
    bool ok() const {
        return reflects_only_with_boat && sustained_annihilation && primary_activates && backup_stays_passive;
    }
};

// Simulation checks on a laid-out config.
BuildReport verify_config(FailoverConfig& cfg);

// Builds the default layout and verifies it; if verification fails, searches
// the crossing point within +-8 cells and every meeting phase.
FailoverConfig build_config(const Pattern& gun, const std::vector<Reaction>& catalog,
                            const LayoutParams& seed = LayoutParams{}, int max_candidates = 64);
// build_config with the repository assets, cached.
const FailoverConfig& default_config();

std::string config_to_json(const FailoverConfig& cfg);
FailoverConfig config_from_json(const std::string& text);
std::string params_to_json(const LayoutParams& p);
// Missing keys keep their defaults.
LayoutParams params_from_json(const std::string& text);

inline std::int64_t failover_bound_formula(int gliders_in_path, int period, int activation_travel) {
    return static_cast<std::int64_t>(gliders_in_path) * period + activation_travel;
}

enum class EventKind { HeartbeatAnnihilation, HeartbeatLost, BlinkerActivated, FailoverComplete, DesyncDetected, ActionApplied };
std::string event_kind_name(EventKind k);

struct MonitorEvent {
    std::int64_t generation = 0;
    EventKind kind = EventKind::ActionApplied;
    std::string section;
    std::string action;  // ActionApplied only: Init, KillPrimary, ResetBackup
    std::string detail;
    friend bool operator==(const MonitorEvent&, const MonitorEvent&) = default;
};

std::string event_to_json(const MonitorEvent& e);

enum class BlinkerState { Passive, Active, Absent, Other };
std::string blinker_state_name(BlinkerState s);

enum class BackupRole { Standby, ActingPrimary };

class Session {
public:
    explicit Session(FailoverConfig cfg, int threads = 1);

    void init();
    void kill_primary();
    // Throws std::invalid_argument on a non-multiple generation without force.
    void reset_backup(bool force = false);
    void step(std::int64_t n = 1);

    const Grid& grid() const { return grid_; }
    std::int64_t generation() const { return grid_.generation(); }
    const FailoverConfig& config() const { return cfg_; }
    const std::vector<MonitorEvent>& events() const { return events_; }
    BlinkerState blinker_state(int section) const;
    BackupRole role_of_backup() const { return acting_ == 1 ? BackupRole::ActingPrimary : BackupRole::Standby; }
    int acting_primary() const { return acting_; }
    // Section the next ResetBackup restores.
    int reset_target() const { return 1 - acting_; }
    std::int64_t next_reset_gen() const;
    // g * period + activation_travel, g = acting-primary external gliders in flight.
    std::int64_t failover_bound() const;
    int gliders_in_path() const;
    // Latency of the last completed failover, -1 if none.
    std::int64_t last_failover_latency() const { return last_latency_; }
    std::int64_t last_failover_bound() const { return last_bound_; }

private:
    void log(EventKind k, const std::string& section, const std::string& action = {}, const std::string& detail = {});
    void monitor();
    BlinkerState site_state(int section, const std::vector<Cell>& now, const std::vector<Cell>& before) const;

    FailoverConfig cfg_;
    Stepper stepper_;
    Grid grid_;
    std::array<std::vector<Cell>, 2> prev_site_;
    std::vector<MonitorEvent> events_;
    std::array<std::vector<Cell>, 2> snapshots_;
    std::array<std::vector<Cell>, 2> passive_cells_;
    int acting_ = 0;
    bool pending_failover_ = false;
    std::int64_t kill_gen_ = -1;
    std::int64_t kill_bound_ = 0;
    std::int64_t last_latency_ = -1;
    std::int64_t last_bound_ = -1;

    struct Watch {
        std::int64_t prev_pop = 0;
        std::int64_t last_ext = -1000, last_int = -1000;
        bool lost = false;
        BlinkerState blinker = BlinkerState::Passive;
        bool desync = false;
    };
    std::array<Watch, 2> watch_;
};

}  // namespace cafo
