#include <algorithm>
#include <map>
#include <mutex>
#include <stdexcept>

#include <json.hpp>

#include "cafo/failover.hpp"

namespace cafo {

using json = nlohmann::json;

namespace {

std::int64_t mod(std::int64_t a, std::int64_t m) { return ((a % m) + m) % m; }

Region grow(Region r, int m) { return {r.x0 - m, r.y0 - m, r.x1 + m, r.y1 + m}; }

Region unite(const Region& a, const Region& b) {
    return {std::min(a.x0, b.x0), std::min(a.y0, b.y0), std::max(a.x1, b.x1), std::max(a.y1, b.y1)};
}

struct Frame {
    int w, h;
    Cell cell(Cell c) const { return {w - 1 - c.x, h - 1 - c.y}; }
    Region region(const Region& r) const { return {w - 1 - r.x1, h - 1 - r.y1, w - 1 - r.x0, h - 1 - r.y0}; }
    Placement placement(const Placement& p) const {
        Pattern t = apply_transform(p.pattern, p.transform);
        Placement out = p;
        out.transform = compose(p.transform, {2, false});
        out.origin = {w - 1 - (p.origin.x + t.width() - 1), h - 1 - (p.origin.y + t.height() - 1)};
        return out;
    }
    GliderState glider(const GliderState& s) const {
        std::vector<Cell> cells;
        for (const auto& c : glider_cells(s)) cells.push_back(cell(c));
        auto m = match_glider(normalize(cells).cells);
        if (!m) throw std::logic_error("rotated glider lost its shape");
        return {m->first, m->second, bbox_origin(cells)};
    }
};

// Glider the gun emits, relative to its origin, at gun phase == period.
GliderState gun_emission(const Pattern& gun, const Transform& t, int period) {
    static std::mutex mu;
    static std::map<std::tuple<std::vector<Cell>, int, bool, int>, GliderState> cache;
    auto key = std::make_tuple(gun.cells, t.rotation, t.flip, period);
    {
        std::lock_guard<std::mutex> lock(mu);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    Pattern core = apply_transform(gun, t);
    int pad = period / 4 + 16;
    Grid g(core.width() + 2 * pad, core.height() + 2 * pad);
    for (const auto& c : core.cells) g.set(c.x + pad, c.y + pad, true);
    Stepper(Rule::conway()).advance(g, period);
    auto gl = track_gliders(g);
    if (gl.size() != 1) throw std::invalid_argument("gun does not show exactly one free glider after one period");
    GliderState s = gl[0].state;
    s.pos = {s.pos.x - pad, s.pos.y - pad};
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace(key, s);
    return s;
}

struct GunPlan {
    Placement placement;
    std::int64_t first_arrival = 0;
};

// Gun whose stream contains state `target` at generation t, with the gun
// set `back` cells behind it along the lane.
GunPlan place_gun(const Pattern& gun, const Transform& tr, int period, const GliderState& target, std::int64_t t,
                  int back) {
    GliderState se = gun_emission(gun, tr, period);
    if (!(se.heading == target.heading))
        throw std::invalid_argument("gun orientation emits " + heading_name(se.heading) + ", lane needs " +
                                    heading_name(target.heading));
    GliderState sb = rewind(target, 4 * back);
    std::int64_t tb = t - 4 * back;
    tb += advance_to_phase(sb, se.phase);
    int phi = static_cast<int>(mod(period - tb, period));
    GunPlan out;
    out.placement = Placement{gun, {sb.pos.x - se.pos.x, sb.pos.y - se.pos.y}, tr, phi};
    out.first_arrival = period - phi + (t - tb);
    return out;
}

// Target origin such that the glider in state s at generation t meets it
// as in `react`, `along` cells further down the lane.
std::pair<Cell, std::int64_t> place_target_on(GliderState s, std::int64_t t, const GliderState& react, int along) {
    if (!(s.heading == react.heading)) throw std::invalid_argument("reaction heading does not match the lane");
    t += advance_to_phase(s, react.phase);
    Cell o{s.pos.x - react.pos.x + along * s.heading.dx, s.pos.y - react.pos.y + along * s.heading.dy};
    return {o, t + 4 * along};
}

Region window_of(const std::vector<GliderState>& states, int margin) {
    std::vector<Cell> cells;
    for (const auto& s : states) {
        auto c = glider_cells(s);
        cells.insert(cells.end(), c.begin(), c.end());
    }
    return grow(bbox(cells), margin);
}

Region clip(Region r, int w, int h) { return {std::max(r.x0, 0), std::max(r.y0, 0), std::min(r.x1, w - 1), std::min(r.y1, h - 1)}; }

std::vector<std::pair<std::string, const Placement*>> parts(const SectionLayout& s, bool with_trigger) {
    std::vector<std::pair<std::string, const Placement*>> out = {{"internal_gun", &s.internal_gun},
                                                                 {"external_gun", &s.external_gun},
                                                                 {"reflector", &s.reflector},
                                                                 {"passive_blinker", &s.passive_blinker},
                                                                 {"eater", &s.eater}};
    if (with_trigger && s.trigger_glider) out.push_back({"trigger_glider", &*s.trigger_glider});
    return out;
}

}  // namespace

std::vector<Cell> standby_snapshot(const FailoverConfig& cfg, int section) {
    std::vector<Cell> out;
    for (const auto& [name, pl] : parts(cfg.sections.at(section), false)) {
        auto c = placement_cells(*pl, cfg.rule);
        out.insert(out.end(), c.begin(), c.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

Grid initial_grid(const FailoverConfig& cfg) {
    Grid g(cfg.grid_width, cfg.grid_height);
    for (const auto& s : cfg.sections)
        for (const auto& [name, pl] : parts(s, true)) {
            try {
                place_cells(g, placement_cells(*pl, cfg.rule));
            } catch (const std::exception& e) {
                throw std::invalid_argument(s.name + " " + name + ": " + e.what());
            }
        }
    return g;
}

FailoverConfig layout(const Pattern& gun, const std::vector<Reaction>& catalog, const LayoutParams& p, int period) {
    FailoverConfig cfg;
    cfg.gun_period = period;
    cfg.params = p;
    const Frame fr{cfg.grid_width, cfg.grid_height};
    const auto& ann = find_reaction(catalog, "annihilate");
    const auto& refl = find_reaction(catalog, "reflect");
    const auto& act = find_reaction(catalog, "activate");
    const auto& eat = find_reaction(catalog, "eat");
    if (!(ann.target.cells == glider_template(kSE, 0)))
        throw std::invalid_argument("annihilate reaction must target a phase-0 SE glider");
    if (ann.outcome.kind != CollisionKind::Annihilation || refl.outcome.kind != CollisionKind::Reflection ||
        act.outcome.kind != CollisionKind::Transformation || eat.outcome.kind != CollisionKind::Transformation)
        throw std::invalid_argument("catalog reactions have the wrong outcome kinds");

    const std::int64_t c = p.meet;
    GliderState A{kSE, 0, {p.xa, p.ya}};
    GliderState B = ann.projectile;
    B.pos = {p.xa + B.pos.x, p.ya + B.pos.y};

    GunPlan ext = place_gun(gun, p.external, period, A, c, p.external_back);
    GunPlan in = place_gun(gun, p.internal, period, B, c, p.internal_back);
    if (ext.first_arrival != in.first_arrival)
        throw std::invalid_argument("streams reach the crossing at different generations");
    cfg.first_meeting = static_cast<int>(ext.first_arrival);

    // backup side, built directly; the primary side is its 180 degree image
    SectionLayout bk;
    bk.name = "backup";
    bk.internal_gun = in.placement;
    auto [boat_o, boat_t] = place_target_on(B, c, refl.projectile, p.boat_along);
    bk.reflector = Placement{builtin("boat"), boat_o, refl.target_transform, 0};
    GliderState out{*refl.outcome.residue_heading, refl.outcome.residue_phase,
                    {refl.outcome.residue_origin.x + boat_o.x, refl.outcome.residue_origin.y + boat_o.y}};
    std::int64_t out_t = boat_t + refl.outcome.settle_generation;
    auto [pb_o, pb_t] = place_target_on(out, out_t, act.projectile, p.blinker_along);
    bk.passive_blinker = Placement{builtin("passive_blinker"), pb_o, act.target_transform, 0};
    {
        auto cells = placement_cells(bk.passive_blinker);
        Region res{pb_o.x + act.outcome.residue_origin.x, pb_o.y + act.outcome.residue_origin.y,
                   pb_o.x + act.outcome.residue_origin.x + act.outcome.residue.width() - 1,
                   pb_o.y + act.outcome.residue_origin.y + act.outcome.residue.height() - 1};
        bk.blinker_site = grow(unite(bbox(cells), res), 1);
    }
    auto [eat_o, eat_t] = place_target_on(B, c, eat.projectile, p.eater_along);
    bk.eater = Placement{builtin("eater"), eat_o, eat.target_transform, 0};
    bk.external_gun = fr.placement(ext.placement);

    SectionLayout pr;
    pr.name = "primary";
    pr.external_gun = ext.placement;
    pr.internal_gun = fr.placement(bk.internal_gun);
    pr.reflector = fr.placement(bk.reflector);
    pr.passive_blinker = fr.placement(bk.passive_blinker);
    pr.eater = fr.placement(bk.eater);
    pr.blinker_site = fr.region(bk.blinker_site);
    GliderState lead = advance(B, boat_t - c - 4 * p.trigger_lead);
    pr.trigger_glider = glider_placement(fr.glider(lead));

    pr.region = {0, 0, p.split_x - 1, cfg.grid_height - 1};
    bk.region = {p.split_x, 0, cfg.grid_width - 1, cfg.grid_height - 1};
    // the primary's external lane leaves its region near the top; a kill can
    // cut a glider there, so resets also clear a pocket past the boundary
    int d = A.pos.y - A.pos.x;
    pr.reset_pocket = clip({p.split_x, p.split_x + d - 4, p.split_x + 11, p.split_x + d + 17}, cfg.grid_width,
                           cfg.grid_height);
    bk.reset_pocket = fr.region(pr.reset_pocket);

    bk.crossing = window_of({A, B}, 5);
    pr.crossing = fr.region(bk.crossing);
    std::vector<GliderState> past;
    for (int k = 24; k <= 40; ++k) past.push_back(advance(B, k));
    bk.lost_sentinel = window_of(past, 0);
    pr.lost_sentinel = fr.region(bk.lost_sentinel);

    auto watch = [&](const GliderState& s, const Placement& gun_pl) {
        LaneKey k = lane_key(s, c);
        return LaneWatch{s.heading, k.lane, mod(k.tau, period), grow(bbox(placement_cells(gun_pl)), 8)};
    };
    pr.external_lane = watch(A, pr.external_gun);
    bk.internal_lane = watch(B, bk.internal_gun);
    bk.external_lane = watch(fr.glider(A), bk.external_gun);
    pr.internal_lane = watch(fr.glider(B), pr.internal_gun);

    cfg.sections = {pr, bk};
    cfg.corridor_region = unite(pr.crossing, bk.crossing);
    for (int s = 0; s < 2; ++s) {
        const auto& e = cfg.sections[s].external_gun.origin;
        const auto& i = cfg.sections[s].internal_gun.origin;
        cfg.gun_offsets[s] = {e.x - i.x, e.y - i.y};
    }

    // static checks: parts inside their own region and clear of each other
    for (const auto& s : cfg.sections)
        for (const auto& [name, pl] : parts(s, true)) {
            Region b = bbox(placement_cells(*pl));
            if (b.x0 < s.region.x0 + (s.region.x0 ? 2 : 0) || b.x1 > s.region.x1 - (s.region.x0 ? 0 : 3) ||
                b.y0 < 0 || b.y1 >= cfg.grid_height)
                throw std::invalid_argument(s.name + " " + name + " is outside or too close to its region edge");
        }
    initial_grid(cfg);
    auto stand = standby_snapshot(cfg, 1);
    for (const auto& cell : stand)
        if (pr.reset_pocket.contains(cell)) throw std::invalid_argument("reset pocket overlaps backup parts");
    return cfg;
}

namespace {

// Runs one section with the other removed; reports the generation of the
// first internal-stream sighting, whether a glider left the boat, and
// when the passive blinker became a blinker.
struct AloneRun {
    std::int64_t first_sighting = -1;
    std::int64_t reflected = -1;
    std::int64_t activated = -1;
};

AloneRun run_alone(const FailoverConfig& cfg, int section, bool with_boat, int gens) {
    const auto& s = cfg.sections[section];
    Grid g(cfg.grid_width, cfg.grid_height);
    for (const auto& [name, pl] : parts(s, false)) {
        if (!with_boat && pl == &s.reflector) continue;
        place_cells(g, placement_cells(*pl, cfg.rule));
    }
    Heading in = s.internal_lane.heading;
    AloneRun r;
    Stepper st(cfg.rule);
    std::vector<Cell> prev;
    for (int t = 1; t <= gens && r.activated < 0; ++t) {
        st.advance(g);
        for (const auto& sg : track_gliders(g)) {
            if (sg.state.heading == in && r.first_sighting < 0) r.first_sighting = t;
            if (!(sg.state.heading == in) && !(sg.state.heading == s.external_lane.heading) && r.reflected < 0)
                r.reflected = t;
        }
        auto site = g.live_cells(s.blinker_site);
        if (site.size() == 3 && prev.size() == 3 && !(site == prev) && identify(site) == "blinker" &&
            identify(prev) == "blinker")
            r.activated = t;
        prev = site;
    }
    return r;
}

}  // namespace

BuildReport verify_config(FailoverConfig& cfg) {
    BuildReport rep;
    AloneRun with = run_alone(cfg, 1, true, 1200);
    AloneRun without = run_alone(cfg, 1, false, 1200);
    rep.reflects_only_with_boat = with.reflected >= 0 && with.activated >= 0 && without.reflected < 0 &&
                                  without.activated < 0;
    if (with.activated >= 0 && with.first_sighting >= 0)
        cfg.activation_travel = static_cast<int>(with.activated - with.first_sighting);

    Session s(cfg);
    int horizon = cfg.first_meeting + 11 * cfg.gun_period;
    s.step(horizon);
    bool lost = false, desync = false;
    rep.backup_stays_passive = true;
    for (const auto& e : s.events()) {
        if (e.kind == EventKind::HeartbeatAnnihilation) ++rep.annihilations[e.section == "primary" ? 0 : 1];
        if (e.kind == EventKind::HeartbeatLost) lost = true;
        if (e.kind == EventKind::DesyncDetected) desync = true;
        if (e.kind == EventKind::BlinkerActivated && e.section == "backup") rep.backup_stays_passive = false;
        if (e.kind == EventKind::BlinkerActivated && e.section == "primary" && rep.primary_activation_gen < 0)
            rep.primary_activation_gen = static_cast<int>(e.generation);
    }
    rep.sustained_annihilation = !lost && !desync && rep.annihilations[0] >= 10 && rep.annihilations[1] >= 10;
    rep.primary_activates = rep.primary_activation_gen >= 0 && rep.primary_activation_gen <= 200;
    return rep;
}

FailoverConfig build_config(const Pattern& gun, const std::vector<Reaction>& catalog, const LayoutParams& seed,
                            int max_candidates) {
    int period = detect_emission_period(gun, Rule::conway(), 8, 800);
    auto attempt = [&](const LayoutParams& p) -> std::optional<FailoverConfig> {
        FailoverConfig cfg;
        try {
            cfg = layout(gun, catalog, p, period);
        } catch (const std::invalid_argument&) {
            return std::nullopt;
        }
        return cfg;
    };
    int simulated = 0;
    auto check = [&](FailoverConfig cfg) -> std::optional<FailoverConfig> {
        ++simulated;
        if (verify_config(cfg).ok()) return cfg;
        return std::nullopt;
    };
    if (auto cfg = attempt(seed))
        if (auto ok = check(*cfg)) return *ok;
    // bounded local search, nearest offsets first
    std::vector<std::pair<int, int>> offsets;
    for (int dy = -8; dy <= 8; ++dy)
        for (int dx = -8; dx <= 8; ++dx) offsets.push_back({dx, dy});
    std::stable_sort(offsets.begin(), offsets.end(), [](auto a, auto b) {
        return std::max(std::abs(a.first), std::abs(a.second)) < std::max(std::abs(b.first), std::abs(b.second));
    });
    for (auto [dx, dy] : offsets)
        for (int m = 0; m < period; ++m) {
            LayoutParams p = seed;
            p.xa += dx;
            p.ya += dy;
            p.meet = m;
            if (p == seed) continue;
            auto cfg = attempt(p);
            if (!cfg) continue;
            if (simulated >= max_candidates) throw std::runtime_error("build_config: no valid alignment found within search bounds");
            if (auto ok = check(*cfg)) return *ok;
        }
    throw std::runtime_error("build_config: no valid alignment found within search bounds");
}

const FailoverConfig& default_config() {
    static const FailoverConfig cfg = build_config(builtin("p92_gun"), builtin_catalog());
    return cfg;
}

namespace {

json cell_json(Cell c) { return json::array({c.x, c.y}); }
Cell cell_from(const json& j) { return {j.at(0).get<int>(), j.at(1).get<int>()}; }
json region_json(const Region& r) { return json::array({r.x0, r.y0, r.x1, r.y1}); }
Region region_from(const json& j) { return {j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>(), j.at(3).get<int>()}; }
json transform_json(const Transform& t) { return {{"rotation", t.rotation}, {"flip", t.flip}}; }
Transform transform_from(const json& j) { return {j.at("rotation").get<int>(), j.at("flip").get<bool>()}; }

json placement_json(const Placement& p) {
    return {{"pattern", p.pattern.name},
            {"origin", cell_json(p.origin)},
            {"transform", transform_json(p.transform)},
            {"phase", p.phase}};
}

Placement placement_from(const json& j) {
    Placement p;
    p.pattern = builtin(j.at("pattern").get<std::string>());
    p.origin = cell_from(j.at("origin"));
    p.transform = transform_from(j.at("transform"));
    p.phase = j.at("phase").get<int>();
    return p;
}

json lane_json(const LaneWatch& l) {
    return {{"heading", heading_name(l.heading)}, {"lane", l.lane}, {"tau_mod", l.tau_mod}, {"window", region_json(l.window)}};
}

LaneWatch lane_from(const json& j) {
    return {parse_heading(j.at("heading").get<std::string>()), j.at("lane").get<std::int64_t>(),
            j.at("tau_mod").get<std::int64_t>(), region_from(j.at("window"))};
}

json params_json(const LayoutParams& p) {
    return {{"crossing", json::array({p.xa, p.ya})},
            {"meet", p.meet},
            {"external", transform_json(p.external)},
            {"internal", transform_json(p.internal)},
            {"external_back", p.external_back},
            {"internal_back", p.internal_back},
            {"boat_along", p.boat_along},
            {"eater_along", p.eater_along},
            {"blinker_along", p.blinker_along},
            {"trigger_lead", p.trigger_lead},
            {"split_x", p.split_x}};
}

LayoutParams params_from(const json& p) {
    LayoutParams q;
    if (p.contains("crossing")) {
        q.xa = p.at("crossing").at(0).get<int>();
        q.ya = p.at("crossing").at(1).get<int>();
    }
    q.meet = p.value("meet", q.meet);
    if (p.contains("external")) q.external = transform_from(p.at("external"));
    if (p.contains("internal")) q.internal = transform_from(p.at("internal"));
    q.external_back = p.value("external_back", q.external_back);
    q.internal_back = p.value("internal_back", q.internal_back);
    q.boat_along = p.value("boat_along", q.boat_along);
    q.eater_along = p.value("eater_along", q.eater_along);
    q.blinker_along = p.value("blinker_along", q.blinker_along);
    q.trigger_lead = p.value("trigger_lead", q.trigger_lead);
    q.split_x = p.value("split_x", q.split_x);
    return q;
}

}  // namespace

std::string params_to_json(const LayoutParams& p) { return params_json(p).dump(2) + "\n"; }

LayoutParams params_from_json(const std::string& text) {
    json j = json::parse(text);
    return params_from(j.contains("params") ? j.at("params") : j);
}

std::string config_to_json(const FailoverConfig& cfg) {
    json j;
    j["grid_width"] = cfg.grid_width;
    j["grid_height"] = cfg.grid_height;
    j["rule"] = json::array({cfg.rule.new_life, cfg.rule.over_population, cfg.rule.under_population});
    j["gun_period"] = cfg.gun_period;
    j["params"] = params_json(cfg.params);
    j["corridor_region"] = region_json(cfg.corridor_region);
    j["activation_travel"] = cfg.activation_travel;
    j["first_meeting"] = cfg.first_meeting;
    j["gun_offsets"] = json::array({cell_json(cfg.gun_offsets[0]), cell_json(cfg.gun_offsets[1])});
    json secs = json::array();
    for (const auto& s : cfg.sections) {
        json e;
        e["name"] = s.name;
        e["region"] = region_json(s.region);
        e["reset_pocket"] = region_json(s.reset_pocket);
        e["internal_gun"] = placement_json(s.internal_gun);
        e["external_gun"] = placement_json(s.external_gun);
        e["reflector"] = placement_json(s.reflector);
        e["passive_blinker"] = placement_json(s.passive_blinker);
        e["eater"] = placement_json(s.eater);
        e["trigger_glider"] = s.trigger_glider ? placement_json(*s.trigger_glider) : json(nullptr);
        e["blinker_site"] = region_json(s.blinker_site);
        e["crossing"] = region_json(s.crossing);
        e["lost_sentinel"] = region_json(s.lost_sentinel);
        e["external_lane"] = lane_json(s.external_lane);
        e["internal_lane"] = lane_json(s.internal_lane);
        secs.push_back(e);
    }
    j["sections"] = secs;
    return j.dump(2) + "\n";
}

FailoverConfig config_from_json(const std::string& text) {
    json j = json::parse(text);
    FailoverConfig cfg;
    cfg.grid_width = j.at("grid_width").get<int>();
    cfg.grid_height = j.at("grid_height").get<int>();
    const auto& r = j.at("rule");
    cfg.rule = {r.at(0).get<int>(), r.at(1).get<int>(), r.at(2).get<int>()};
    cfg.rule.validate();
    cfg.gun_period = j.at("gun_period").get<int>();
    if (cfg.gun_period <= 0) throw std::invalid_argument("config: gun_period must be positive");
    cfg.params = params_from(j.at("params"));
    cfg.corridor_region = region_from(j.at("corridor_region"));
    cfg.activation_travel = j.at("activation_travel").get<int>();
    cfg.first_meeting = j.at("first_meeting").get<int>();
    cfg.gun_offsets = {cell_from(j.at("gun_offsets").at(0)), cell_from(j.at("gun_offsets").at(1))};
    const auto& secs = j.at("sections");
    if (secs.size() != 2) throw std::invalid_argument("config: expected two sections");
    for (int i = 0; i < 2; ++i) {
        const auto& e = secs.at(i);
        auto& s = cfg.sections[i];
        s.name = e.at("name").get<std::string>();
        s.region = region_from(e.at("region"));
        s.reset_pocket = region_from(e.at("reset_pocket"));
        s.internal_gun = placement_from(e.at("internal_gun"));
        s.external_gun = placement_from(e.at("external_gun"));
        s.reflector = placement_from(e.at("reflector"));
        s.passive_blinker = placement_from(e.at("passive_blinker"));
        s.eater = placement_from(e.at("eater"));
        if (!e.at("trigger_glider").is_null()) s.trigger_glider = placement_from(e.at("trigger_glider"));
        s.blinker_site = region_from(e.at("blinker_site"));
        s.crossing = region_from(e.at("crossing"));
        s.lost_sentinel = region_from(e.at("lost_sentinel"));
        s.external_lane = lane_from(e.at("external_lane"));
        s.internal_lane = lane_from(e.at("internal_lane"));
    }
    if (cfg.sections[0].name != "primary" || cfg.sections[1].name != "backup")
        throw std::invalid_argument("config: sections must be primary then backup");
    initial_grid(cfg);  // throws on overlap or out-of-bounds parts
    return cfg;
}

}  // namespace cafo
