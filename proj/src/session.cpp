#include <algorithm>
#include <stdexcept>

#include <json.hpp>

#include "cafo/failover.hpp"

namespace cafo {

namespace {

std::int64_t mod(std::int64_t a, std::int64_t m) { return ((a % m) + m) % m; }

bool overlaps(const Region& r, const GliderState& s) {
    Region b{s.pos.x, s.pos.y, s.pos.x + 2, s.pos.y + 2};
    return !(b.x1 < r.x0 || b.x0 > r.x1 || b.y1 < r.y0 || b.y0 > r.y1);
}

bool on_lane(const GliderSighting& g, const LaneWatch& w) {
    return g.state.heading == w.heading && lane_key(g.state, g.generation).lane == w.lane;
}

}  // namespace

std::string event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::HeartbeatAnnihilation: return "HeartbeatAnnihilation";
        case EventKind::HeartbeatLost: return "HeartbeatLost";
        case EventKind::BlinkerActivated: return "BlinkerActivated";
        case EventKind::FailoverComplete: return "FailoverComplete";
        case EventKind::DesyncDetected: return "DesyncDetected";
        case EventKind::ActionApplied: return "ActionApplied";
    }
    return "?";
}

std::string blinker_state_name(BlinkerState s) {
    switch (s) {
        case BlinkerState::Passive: return "passive";
        case BlinkerState::Active: return "active";
        case BlinkerState::Absent: return "absent";
        case BlinkerState::Other: return "other";
    }
    return "?";
}

std::string event_to_json(const MonitorEvent& e) {
    nlohmann::ordered_json j;
    j["generation"] = e.generation;
    j["kind"] = event_kind_name(e.kind);
    j["section"] = e.section;
    if (!e.action.empty()) j["action"] = e.action;
    if (!e.detail.empty()) j["detail"] = e.detail;
    return j.dump();
}

Session::Session(FailoverConfig cfg, int threads) : cfg_(std::move(cfg)), stepper_(cfg_.rule, threads) {
    for (int s = 0; s < 2; ++s) {
        snapshots_[s] = standby_snapshot(cfg_, s);
        auto pb = placement_cells(cfg_.sections[s].passive_blinker, cfg_.rule);
        std::sort(pb.begin(), pb.end());
        passive_cells_[s] = pb;
    }
    init();
}

void Session::init() {
    grid_ = initial_grid(cfg_);
    events_.clear();
    acting_ = 0;
    pending_failover_ = false;
    kill_gen_ = -1;
    kill_bound_ = 0;
    last_latency_ = last_bound_ = -1;
    for (int s = 0; s < 2; ++s) {
        watch_[s] = Watch{};
        prev_site_[s] = grid_.live_cells(cfg_.sections[s].blinker_site);
        watch_[s].blinker = site_state(s, prev_site_[s], prev_site_[s]);
    }
    log(EventKind::ActionApplied, "", "Init");
}

void Session::log(EventKind k, const std::string& section, const std::string& action, const std::string& detail) {
    events_.push_back({grid_.generation(), k, section, action, detail});
}

BlinkerState Session::site_state(int section, const std::vector<Cell>& now, const std::vector<Cell>& before) const {
    if (now.empty()) return BlinkerState::Absent;
    if (now == passive_cells_[section]) return BlinkerState::Passive;
    if (now.size() == 3 && before.size() == 3 && now != before && identify(now, cfg_.rule) == "blinker" &&
        identify(before, cfg_.rule) == "blinker")
        return BlinkerState::Active;
    return BlinkerState::Other;
}

BlinkerState Session::blinker_state(int section) const { return watch_.at(section).blinker; }

std::int64_t Session::next_reset_gen() const {
    std::int64_t g = grid_.generation(), p = cfg_.gun_period;
    return (g + p - 1) / p * p;
}

int Session::gliders_in_path() const {
    const auto& ext = cfg_.sections[acting_].external_lane;
    // crossing point of this external lane, as an along-lane coordinate
    const auto& far = cfg_.sections[1 - acting_].crossing;
    int limit = ext.heading.dx > 0 ? far.x1 : -far.x0;
    std::vector<GliderSighting> gl;
    std::vector<Cell> rest;
    split_gliders(grid_, {0, 0, grid_.width() - 1, grid_.height() - 1}, gl, rest);
    int n = 0;
    for (auto& g : gl) {
        g.generation = grid_.generation();
        if (!on_lane(g, ext)) continue;
        int along = ext.heading.dx > 0 ? g.state.pos.x : -g.state.pos.x;
        if (along <= limit - 5) ++n;
    }
    return n;
}

std::int64_t Session::failover_bound() const {
    return failover_bound_formula(gliders_in_path(), cfg_.gun_period, cfg_.activation_travel);
}

void Session::kill_primary() {
    const auto& sec = cfg_.sections[acting_];
    if (!pending_failover_) {
        kill_bound_ = failover_bound();
        kill_gen_ = grid_.generation();
        pending_failover_ = true;
    }
    clear_region_inplace(grid_, sec.region);
    prev_site_[acting_] = grid_.live_cells(sec.blinker_site);
    watch_[acting_].blinker = site_state(acting_, prev_site_[acting_], prev_site_[acting_]);
    for (auto& w : watch_) w.desync = false;
    log(EventKind::ActionApplied, sec.name, "KillPrimary", "bound=" + std::to_string(kill_bound_));
}

void Session::reset_backup(bool force) {
    std::int64_t g = grid_.generation();
    if (!force && g % cfg_.gun_period != 0)
        throw std::invalid_argument("ResetBackup allowed only at generation N*" + std::to_string(cfg_.gun_period) +
                                    " (next: " + std::to_string(next_reset_gen()) + ")");
    int s = reset_target();
    const auto& sec = cfg_.sections[s];
    clear_region_inplace(grid_, sec.region);
    clear_region_inplace(grid_, sec.reset_pocket);
    place_cells(grid_, snapshots_[s]);
    watch_[s] = Watch{};
    watch_[s].blinker = BlinkerState::Passive;
    prev_site_[s] = grid_.live_cells(sec.blinker_site);
    for (auto& w : watch_) w.desync = false;
    log(EventKind::ActionApplied, sec.name, "ResetBackup", force && g % cfg_.gun_period ? "forced" : "");
}

void Session::step(std::int64_t n) {
    for (std::int64_t i = 0; i < n; ++i) {
        stepper_.advance(grid_);
        monitor();
    }
}

void Session::monitor() {
    const std::int64_t now = grid_.generation();
    const std::int64_t p = cfg_.gun_period;
    std::vector<GliderSighting> gl;
    std::vector<Cell> rest;
    split_gliders(grid_, {0, 0, grid_.width() - 1, grid_.height() - 1}, gl, rest);
    for (auto& g : gl) g.generation = now;

    for (int s = 0; s < 2; ++s) {
        const auto& sec = cfg_.sections[s];
        const auto& other = cfg_.sections[1 - s];
        auto& w = watch_[s];

        // heartbeat: this section's internal stream meets the other's external stream
        for (const auto& g : gl) {
            if (!overlaps(sec.crossing, g.state)) continue;
            if (g.state.heading == sec.internal_lane.heading) w.last_int = now;
            if (g.state.heading == other.external_lane.heading) w.last_ext = now;
        }
        std::int64_t pop = grid_.population(sec.crossing);
        if (w.prev_pop > 0 && pop == 0 && now - w.last_int <= 16 && now - w.last_ext <= 16) {
            log(EventKind::HeartbeatAnnihilation, sec.name);
            w.lost = false;
            w.last_int = w.last_ext = -1000;
        }
        w.prev_pop = pop;

        // only stream gliders count; a stray on the lane (the trigger) does not
        for (const auto& g : gl)
            if (!w.lost && overlaps(sec.lost_sentinel, g.state) && on_lane(g, sec.internal_lane) &&
                mod(lane_key(g.state, now).tau, p) == sec.internal_lane.tau_mod) {
                log(EventKind::HeartbeatLost, sec.name);
                w.lost = true;
            }

        // stream phase on both lanes of this section
        if (!w.desync)
            for (const LaneWatch* lw : {&sec.external_lane, &sec.internal_lane})
                for (const auto& g : gl) {
                    if (w.desync || !overlaps(lw->window, g.state) || !on_lane(g, *lw)) continue;
                    std::int64_t tau = mod(lane_key(g.state, now).tau, p);
                    if (tau != lw->tau_mod) {
                        log(EventKind::DesyncDetected, sec.name, "",
                            "lane " + heading_name(lw->heading) + " phase " + std::to_string(tau) + " expected " +
                                std::to_string(lw->tau_mod));
                        w.desync = true;
                    }
                }

        auto site = grid_.live_cells(sec.blinker_site);
        BlinkerState st = site_state(s, site, prev_site_[s]);
        if (st == BlinkerState::Active && w.blinker != BlinkerState::Active) {
            log(EventKind::BlinkerActivated, sec.name);
            if (pending_failover_ && s != acting_) {
                last_latency_ = now - kill_gen_;
                last_bound_ = kill_bound_;
                log(EventKind::FailoverComplete, sec.name, "",
                    "latency=" + std::to_string(last_latency_) + " bound=" + std::to_string(last_bound_));
                acting_ = s;
                pending_failover_ = false;
            }
        }
        // a blinker holds its state across the one-generation gap before alternation is confirmed
        if (!(w.blinker == BlinkerState::Active && st == BlinkerState::Other && site.size() == 3)) w.blinker = st;
        prev_site_[s] = site;
    }
}

}  // namespace cafo
