#include "cafo/oracles.hpp"

#include <algorithm>
#include <atomic>
#include <deque>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include <json.hpp>

namespace cafo {

using json = nlohmann::json;

namespace {

int chebyshev_gap(const Region& a, const Region& b) {
    return std::max({a.x0 - b.x1, b.x0 - a.x1, a.y0 - b.y1, b.y0 - a.y1});
}

}  // namespace

void split_gliders(const Grid& g, const Region& r, std::vector<GliderSighting>& gliders, std::vector<Cell>& rest) {
    std::vector<Cell> cells = g.live_cells(r);
    const int n = static_cast<int>(cells.size());
    std::unordered_map<std::int64_t, int> index;
    index.reserve(n * 2);
    const std::int64_t w = g.width() + 2;
    auto key = [w](int x, int y) { return (static_cast<std::int64_t>(y) + 1) * w + (x + 1); };
    for (int i = 0; i < n; ++i) index.emplace(key(cells[i].x, cells[i].y), i);

    std::vector<int> comp(n, -1);
    std::vector<int> stack;
    std::vector<Cell> members;
    for (int i = 0; i < n; ++i) {
        if (comp[i] >= 0) continue;
        comp[i] = i;
        stack.assign(1, i);
        members.clear();
        bool big = false;
        while (!stack.empty()) {
            int j = stack.back();
            stack.pop_back();
            members.push_back(cells[j]);
            if (members.size() > 5) big = true;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (!dx && !dy) continue;
                    auto it = index.find(key(cells[j].x + dx, cells[j].y + dy));
                    if (it != index.end() && comp[it->second] < 0) {
                        comp[it->second] = i;
                        stack.push_back(it->second);
                    }
                }
        }
        if (!big && members.size() == 5) {
            Pattern p = normalize(members);
            if (auto m = match_glider(p.cells)) {
                gliders.push_back({GliderState{m->first, m->second, bbox_origin(members)}, g.generation()});
                continue;
            }
        }
        rest.insert(rest.end(), members.begin(), members.end());
    }
    std::sort(rest.begin(), rest.end());
    std::sort(gliders.begin(), gliders.end(), [](const GliderSighting& a, const GliderSighting& b) {
        return a.state.pos < b.state.pos;
    });
}

std::vector<GliderSighting> track_gliders(const Grid& g, const Region& r) {
    std::vector<GliderSighting> out;
    std::vector<Cell> rest;
    split_gliders(g, r, out, rest);
    return out;
}

std::vector<GliderSighting> track_gliders(const Grid& g) {
    return track_gliders(g, Region{0, 0, g.width() - 1, g.height() - 1});
}

OscillatorReport detect_period(const Pattern& p, const Rule& rule, int max_gens) {
    if (p.empty()) return {1, {0, 0}};
    int extent = std::max(p.width(), p.height());
    int pad = 2 * extent + max_gens / 2 + 4;
    Grid g(p.width() + 2 * pad, p.height() + 2 * pad);
    for (const auto& c : p.cells) g.set(c.x + pad, c.y + pad, true);
    Pattern start = normalize(g.live_cells());
    Cell o0 = bbox_origin(g.live_cells());
    Stepper s(rule);
    for (int t = 1; t <= max_gens; ++t) {
        s.advance(g);
        auto live = g.live_cells();
        if (live.empty()) throw std::runtime_error("detect_period: pattern died");
        Region b = bbox(live);
        if (b.x0 == 0 || b.y0 == 0 || b.x1 == g.width() - 1 || b.y1 == g.height() - 1)
            throw std::runtime_error("detect_period: pattern reached the scratch boundary");
        if (live.size() == start.size() && normalize(live) == start) {
            Cell o = bbox_origin(live);
            return {t, {o.x - o0.x, o.y - o0.y}};
        }
    }
    throw std::runtime_error("detect_period: no period within " + std::to_string(max_gens) + " generations");
}

int detect_emission_period(const Pattern& gun, const Rule& rule, int sentinel_offset, int horizon) {
    if (gun.empty()) throw std::runtime_error("detect_emission_period: no crossings");
    int pad = horizon / 4 + sentinel_offset + 16;
    Grid g(gun.width() + 2 * pad, gun.height() + 2 * pad);
    for (const auto& c : gun.cells) g.set(c.x + pad, c.y + pad, true);
    Region body{pad, pad, pad + gun.width() - 1, pad + gun.height() - 1};
    std::vector<std::int64_t> crossings;
    Stepper s(rule);
    for (int t = 1; t <= horizon; ++t) {
        s.advance(g);
        for (const auto& sg : track_gliders(g)) {
            if (sg.state.phase != 0) continue;
            Region gb{sg.state.pos.x, sg.state.pos.y, sg.state.pos.x + 2, sg.state.pos.y + 2};
            if (chebyshev_gap(gb, body) == sentinel_offset) crossings.push_back(t);
        }
    }
    if (crossings.empty()) throw std::runtime_error("detect_emission_period: no crossings within horizon");
    // warm-up: the first two crossings may come from start-up transients
    if (crossings.size() < 5) throw std::runtime_error("detect_emission_period: too few crossings within horizon");
    std::int64_t gap = crossings[3] - crossings[2];
    for (std::size_t i = 3; i < crossings.size(); ++i)
        if (crossings[i] - crossings[i - 1] != gap)
            throw std::runtime_error("detect_emission_period: non-constant gaps");
    if (gap <= 0) throw std::runtime_error("detect_emission_period: simultaneous crossings");
    return static_cast<int>(gap);
}

std::string kind_name(CollisionKind k) {
    switch (k) {
    case CollisionKind::Annihilation: return "Annihilation";
    case CollisionKind::Reflection: return "Reflection";
    case CollisionKind::Transformation: return "Transformation";
    case CollisionKind::Mess: return "Mess";
    }
    return "Mess";
}

CollisionKind parse_kind(const std::string& s) {
    for (auto k : {CollisionKind::Annihilation, CollisionKind::Reflection, CollisionKind::Transformation,
                   CollisionKind::Mess})
        if (kind_name(k) == s) return k;
    throw std::invalid_argument("unknown collision kind: " + s);
}

namespace {

struct Known {
    std::string name;
    std::vector<std::vector<Cell>> shapes;
};

const std::vector<Known>& known_objects() {
    static const std::vector<Known> table = [] {
        std::vector<Known> out;
        for (const char* name : {"block", "blinker", "boat", "passive_blinker", "eater"}) {
            Pattern p = builtin(name);
            int period = detect_period(p).period;
            Known k{name, {}};
            std::vector<Cell> cur = p.cells;
            for (int ph = 0; ph < period; ++ph) {
                for (const auto& t : all_transforms()) {
                    auto s = apply_transform(normalize(cur), t).cells;
                    if (std::find(k.shapes.begin(), k.shapes.end(), s) == k.shapes.end()) k.shapes.push_back(s);
                }
                cur = evolve(cur, 1);
            }
            out.push_back(std::move(k));
        }
        return out;
    }();
    return table;
}

}  // namespace

std::string identify(const std::vector<Cell>& cells, const Rule& rule) {
    if (cells.empty() || !(rule == Rule::conway())) return {};
    auto n = normalize(cells).cells;
    for (const auto& k : known_objects())
        for (const auto& s : k.shapes)
            if (s == n) return k.name;
    return {};
}

CollisionOutcome classify_collision(const Placement& a, const Placement& b, const Rule& rule, int horizon) {
    auto ca = placement_cells(a, rule);
    auto cb = placement_cells(b, rule);
    std::vector<Cell> all = ca;
    all.insert(all.end(), cb.begin(), cb.end());
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end())
        throw std::invalid_argument("classify_collision: placements overlap");
    if (all.empty()) throw std::invalid_argument("classify_collision: nothing placed");

    Region start = bbox(all);
    int extent = std::max(start.width(), start.height());
    int pad = 2 * extent + horizon / 4 + 16;
    Grid g(start.width() + 2 * pad, start.height() + 2 * pad);
    const int ox = pad - start.x0, oy = pad - start.y0;
    for (const auto& c : all) g.set(c.x + ox, c.y + oy, true);
    Region hood{start.x0 + ox, start.y0 + oy, start.x1 + ox, start.y1 + oy};
    Region whole{0, 0, g.width() - 1, g.height() - 1};

    std::deque<std::vector<Cell>> history;  // non-glider cells, newest first
    constexpr int kDepth = 12;
    Stepper s(rule);
    for (int t = 1; t <= horizon; ++t) {
        s.advance(g);
        std::vector<GliderSighting> gl;
        std::vector<Cell> rest;
        split_gliders(g, whole, gl, rest);
        history.push_front(rest);
        if (static_cast<int>(history.size()) > kDepth) history.pop_back();

        bool periodic = false;
        for (int p = 1; p <= 4 && !periodic; ++p) {
            if (static_cast<int>(history.size()) < p + 4) break;
            periodic = true;
            for (int j = 0; j < 4; ++j)
                if (history[j] != history[j + p]) periodic = false;
        }
        if (!periodic) continue;

        Region near = rest.empty() ? hood : bbox(rest);
        double cx = (near.x0 + near.x1) / 2.0, cy = (near.y0 + near.y1) / 2.0;
        bool departed = true;
        for (const auto& sg : gl) {
            const auto& st = sg.state;
            Region gb{st.pos.x, st.pos.y, st.pos.x + 2, st.pos.y + 2};
            double along = st.heading.dx * (st.pos.x + 1 - cx) + st.heading.dy * (st.pos.y + 1 - cy);
            if (along <= 0 || chebyshev_gap(gb, near) < 10) departed = false;
        }
        if (!departed) continue;

        CollisionOutcome out;
        out.settle_generation = t;
        if (rest.empty() && gl.empty()) {
            out.kind = CollisionKind::Annihilation;
        } else if (rest.empty() && gl.size() == 1) {
            const auto& st = gl[0].state;
            out.kind = CollisionKind::Reflection;
            out.residue = normalize(glider_cells(st), "glider");
            out.residue_name = "glider";
            out.residue_heading = st.heading;
            out.residue_origin = {st.pos.x - ox, st.pos.y - oy};
            out.residue_phase = st.phase;
        } else {
            std::string name = gl.empty() ? identify(rest, rule) : std::string{};
            out.kind = name.empty() ? CollisionKind::Mess : CollisionKind::Transformation;
            std::vector<Cell> res = rest;
            for (const auto& sg : gl) {
                auto gc = glider_cells(sg.state);
                res.insert(res.end(), gc.begin(), gc.end());
            }
            Cell o = bbox_origin(res);
            out.residue = normalize(res, name);
            out.residue_name = name;
            out.residue_origin = {o.x - ox, o.y - oy};
        }
        return out;
    }
    throw std::runtime_error("classify_collision: no stable outcome within " + std::to_string(horizon) +
                             " generations");
}

std::vector<ReactionMatch> search_reactions(const SearchSpec& spec, const Rule& rule, int threads) {
    struct Job {
        Cell offset;
        int phase;
    };
    std::vector<Job> jobs;
    for (int y = spec.offsets.y0; y <= spec.offsets.y1; ++y)
        for (int x = spec.offsets.x0; x <= spec.offsets.x1; ++x)
            for (int ph = std::max(spec.phase_lo, 0); ph <= std::min(spec.phase_hi, 3); ++ph) jobs.push_back({{x, y}, ph});

    Placement target{spec.target, {0, 0}, {}, 0};
    std::vector<std::optional<CollisionOutcome>> results(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            GliderState gs{spec.heading, jobs[i].phase, jobs[i].offset};
            auto gc = glider_cells(gs);
            int sep = 1 << 30;
            for (const auto& a : gc)
                for (const auto& b : spec.target.cells)
                    sep = std::min(sep, std::max(std::abs(a.x - b.x), std::abs(a.y - b.y)));
            if (sep < spec.min_separation) continue;
            try {
                CollisionOutcome o = classify_collision(target, glider_placement(gs), rule, spec.horizon);
                if (o.kind != spec.want) continue;
                if (!spec.want_residue.empty() && o.residue_name != spec.want_residue) continue;
                if (spec.want_heading && o.residue_heading != spec.want_heading) continue;
                results[i] = std::move(o);
            } catch (const std::runtime_error&) {
                // unsettled: not a match
            }
        }
    };
    if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::vector<ReactionMatch> out;
    for (std::size_t i = 0; i < jobs.size(); ++i)
        if (results[i]) out.push_back({jobs[i].offset, jobs[i].phase, *results[i]});
    return out;
}

namespace {

json transform_json(const Transform& t) { return {{"rotation", t.rotation}, {"flip", t.flip}}; }

Transform transform_from(const json& j) { return {j.at("rotation").get<int>(), j.at("flip").get<bool>()}; }

}  // namespace

std::string catalog_to_json(const std::vector<Reaction>& catalog) {
    json arr = json::array();
    for (const auto& r : catalog) {
        const auto& o = r.outcome;
        json e;
        e["name"] = r.name;
        e["target"] = {{"name", r.target.name}, {"transform", transform_json(r.target_transform)},
                       {"rle", emit_rle(apply_transform(builtin(r.target.name), r.target_transform))}};
        e["projectile"] = {{"name", "glider"},
                           {"heading", heading_name(r.projectile.heading)},
                           {"phase", r.projectile.phase},
                           {"offset", {r.projectile.pos.x, r.projectile.pos.y}},
                           {"rle", emit_rle(normalize(glider_cells(r.projectile)))}};
        e["outcome"] = {{"kind", kind_name(o.kind)},
                        {"residue_rle", emit_rle(o.residue)},
                        {"residue_name", o.residue_name},
                        {"residue_origin", {o.residue_origin.x, o.residue_origin.y}},
                        {"residue_phase", o.residue_phase},
                        {"settle_generation", o.settle_generation}};
        if (o.residue_heading) e["outcome"]["residue_heading"] = heading_name(*o.residue_heading);
        arr.push_back(e);
    }
    return json{{"reactions", arr}}.dump(2) + "\n";
}

std::vector<Reaction> catalog_from_json(const std::string& text) {
    json root = json::parse(text);
    std::vector<Reaction> out;
    for (const auto& e : root.at("reactions")) {
        Reaction r;
        r.name = e.at("name").get<std::string>();
        const auto& t = e.at("target");
        r.target_transform = transform_from(t.at("transform"));
        r.target = apply_transform(builtin(t.at("name").get<std::string>()), r.target_transform);
        r.target.name = t.at("name").get<std::string>();
        if (t.contains("rle") && !(parse_rle(t.at("rle").get<std::string>()) == r.target))
            throw std::invalid_argument("catalog: target rle does not match named pattern for " + r.name);
        const auto& p = e.at("projectile");
        r.projectile = {parse_heading(p.at("heading").get<std::string>()), p.at("phase").get<int>(),
                        {p.at("offset").at(0).get<int>(), p.at("offset").at(1).get<int>()}};
        const auto& o = e.at("outcome");
        r.outcome.kind = parse_kind(o.at("kind").get<std::string>());
        r.outcome.residue = parse_rle(o.at("residue_rle").get<std::string>());
        r.outcome.residue_name = o.value("residue_name", std::string{});
        r.outcome.residue.name = r.outcome.residue_name;
        r.outcome.residue_origin = {o.at("residue_origin").at(0).get<int>(), o.at("residue_origin").at(1).get<int>()};
        r.outcome.residue_phase = o.value("residue_phase", 0);
        r.outcome.settle_generation = o.at("settle_generation").get<int>();
        if (o.contains("residue_heading")) r.outcome.residue_heading = parse_heading(o.at("residue_heading").get<std::string>());
        out.push_back(std::move(r));
    }
    return out;
}

const Reaction& find_reaction(const std::vector<Reaction>& catalog, const std::string& name) {
    for (const auto& r : catalog)
        if (r.name == name) return r;
    throw std::invalid_argument("reaction catalog has no entry named " + name);
}

const std::vector<Reaction>& builtin_catalog() {
    static const std::vector<Reaction> cat = catalog_from_json(std::string(asset_text("reactions.json")));
    return cat;
}

std::vector<Reaction> discover_catalog(const std::string& spec_json, const Rule& rule, int threads) {
    json root = json::parse(spec_json);
    std::vector<Reaction> out;
    for (const auto& e : root.at("reactions")) {
        Reaction r;
        r.name = e.at("name").get<std::string>();
        std::string target = e.at("target").get<std::string>();
        r.target_transform = e.contains("transform") ? transform_from(e.at("transform")) : Transform{};
        r.target = apply_transform(builtin(target), r.target_transform);
        r.target.name = target;
        SearchSpec s;
        s.target = r.target;
        s.heading = parse_heading(e.at("heading").get<std::string>());
        if (e.contains("offsets")) {
            const auto& o = e.at("offsets");
            s.offsets = {o.at(0).get<int>(), o.at(1).get<int>(), o.at(2).get<int>(), o.at(3).get<int>()};
        }
        s.horizon = e.value("horizon", s.horizon);
        s.min_separation = e.value("min_separation", s.min_separation);
        s.want = parse_kind(e.at("want").get<std::string>());
        s.want_residue = e.value("want_residue", std::string{});
        if (e.contains("want_heading")) s.want_heading = parse_heading(e.at("want_heading").get<std::string>());
        auto matches = search_reactions(s, rule, threads);
        std::size_t pick = e.value("pick", 0);
        if (matches.empty()) continue;
        if (pick >= matches.size())
            throw std::runtime_error("discover: " + r.name + " has " + std::to_string(matches.size()) +
                                     " matches, pick " + std::to_string(pick) + " unavailable");
        const auto& m = matches[pick];
        r.projectile = {s.heading, m.phase, m.offset};
        r.outcome = m.outcome;
        out.push_back(std::move(r));
    }
    return out;
}

CollisionOutcome replay(const Reaction& r, const Rule& rule, int horizon) {
    return classify_collision(Placement{r.target, {0, 0}, {}, 0}, glider_placement(r.projectile), rule, horizon);
}

}  // namespace cafo
