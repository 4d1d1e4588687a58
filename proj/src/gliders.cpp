#include "cafo/gliders.hpp"

#include <array>
#include <mutex>
#include <stdexcept>

namespace cafo {

namespace {

int heading_index(Heading h) {
    if (h == kSE) return 0;
    if (h == kSW) return 1;
    if (h == kNW) return 2;
    if (h == kNE) return 3;
    throw std::invalid_argument("not a diagonal heading");
}

struct Tables {
    std::array<std::array<std::vector<Cell>, 4>, 4> shape;
    std::array<std::array<Cell, 4>, 4> delta;  // bbox shift from phase k to k+1
};

const Tables& tables() {
    static const Tables t = [] {
        Tables out;
        Pattern base = builtin("glider");
        for (int rot = 0; rot < 4; ++rot) {
            std::vector<Cell> cur = apply_transform(base, {rot, false}).cells;
            std::array<std::vector<Cell>, 5> seq;
            seq[0] = cur;
            for (int k = 1; k <= 4; ++k) seq[k] = evolve(seq[k - 1], 1);
            Cell o0 = bbox_origin(seq[0]), o4 = bbox_origin(seq[4]);
            Heading h{o4.x - o0.x, o4.y - o0.y};
            int hi = heading_index(h);
            for (int k = 0; k < 4; ++k) {
                out.shape[hi][k] = normalize(seq[k]).cells;
                Cell a = bbox_origin(seq[k]), b = bbox_origin(seq[k + 1]);
                out.delta[hi][k] = {b.x - a.x, b.y - a.y};
            }
        }
        return out;
    }();
    return t;
}

}  // namespace

std::string heading_name(Heading h) {
    static const char* names[] = {"SE", "SW", "NW", "NE"};
    return names[heading_index(h)];
}

Heading parse_heading(const std::string& s) {
    for (Heading h : all_headings())
        if (heading_name(h) == s) return h;
    throw std::invalid_argument("unknown heading: " + s);
}

std::vector<Heading> all_headings() { return {kSE, kSW, kNW, kNE}; }

Heading rotate_heading(Heading h, const Transform& t) {
    Cell c = transform_cell({h.dx, h.dy}, t);
    return {c.x, c.y};
}

const std::vector<Cell>& glider_template(Heading h, int phase) {
    return tables().shape[heading_index(h)][((phase % 4) + 4) % 4];
}

std::optional<std::pair<Heading, int>> match_glider(const std::vector<Cell>& normalized) {
    if (normalized.size() != 5) return std::nullopt;
    for (Heading h : all_headings())
        for (int ph = 0; ph < 4; ++ph)
            if (glider_template(h, ph) == normalized) return std::make_pair(h, ph);
    return std::nullopt;
}

GliderState advance(GliderState s, std::int64_t n) {
    if (n < 0) return rewind(s, -n);
    const auto& d = tables().delta[heading_index(s.heading)];
    std::int64_t whole = n / 4;
    s.pos.x += static_cast<int>(whole * s.heading.dx);
    s.pos.y += static_cast<int>(whole * s.heading.dy);
    for (std::int64_t i = 0; i < n % 4; ++i) {
        s.pos.x += d[s.phase].x;
        s.pos.y += d[s.phase].y;
        s.phase = (s.phase + 1) % 4;
    }
    return s;
}

GliderState rewind(GliderState s, std::int64_t n) {
    if (n < 0) return advance(s, -n);
    std::int64_t k = (n + 3) / 4;
    s = advance(s, 4 * k - n);
    s.pos.x -= static_cast<int>(k * s.heading.dx);
    s.pos.y -= static_cast<int>(k * s.heading.dy);
    return s;
}

int advance_to_phase(GliderState& s, int ph) {
    int n = ((ph - s.phase) % 4 + 4) % 4;
    s = advance(s, n);
    return n;
}

std::vector<Cell> glider_cells(const GliderState& s) {
    std::vector<Cell> out = glider_template(s.heading, s.phase);
    for (auto& c : out) {
        c.x += s.pos.x;
        c.y += s.pos.y;
    }
    return out;
}

Placement glider_placement(const GliderState& s) {
    // templates are rotations of the phase-0 SE glider, stepped
    Transform t;
    for (int r = 0; r < 4; ++r)
        if (rotate_heading(kSE, {r, false}) == s.heading) t = {r, false};
    Pattern g = builtin("glider");
    std::vector<Cell> stepped = evolve(apply_transform(g, t).cells, s.phase);
    Cell o = bbox_origin(stepped);
    return Placement{g, {s.pos.x - o.x, s.pos.y - o.y}, t, s.phase};
}

LaneKey lane_key(const GliderState& s, std::int64_t t) {
    GliderState s0 = rewind(s, s.phase);
    LaneKey k;
    k.heading = s.heading;
    k.lane = static_cast<std::int64_t>(s.heading.dx) * s0.pos.y - static_cast<std::int64_t>(s.heading.dy) * s0.pos.x;
    k.tau = t - s.phase - 4 * static_cast<std::int64_t>(s.heading.dx) * s0.pos.x;
    return k;
}

}  // namespace cafo
