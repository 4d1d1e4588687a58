#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cafo/engine.hpp"
#include "cafo/patterns.hpp"

namespace cafo {

// One of the four diagonal directions, components in {-1, 1}.
struct Heading {
    int dx = 1;
    int dy = 1;

    friend bool operator==(const Heading&, const Heading&) = default;
    friend bool operator<(const Heading& a, const Heading& b) {
        return a.dx != b.dx ? a.dx < b.dx : a.dy < b.dy;
    }
};

inline constexpr Heading kSE{1, 1};
inline constexpr Heading kSW{-1, 1};
inline constexpr Heading kNW{-1, -1};
inline constexpr Heading kNE{1, -1};

std::string heading_name(Heading h);  // "SE", "SW", "NW", "NE"
Heading parse_heading(const std::string& s);
Heading rotate_heading(Heading h, const Transform& t);
std::vector<Heading> all_headings();  // SE, SW, NW, NE

// Glider at a given phase with its bounding box at pos.
struct GliderState {
    Heading heading;
    int phase = 0;
    Cell pos;

    friend bool operator==(const GliderState&, const GliderState&) = default;
};

// Normalized cells of the glider shape for (heading, phase). Phase 0 of the
// SE glider is "bo$2bo$3o!"; phase k is phase 0 stepped k generations.
const std::vector<Cell>& glider_template(Heading h, int phase);
// Matches a normalized 5-cell set against the 16 templates.
std::optional<std::pair<Heading, int>> match_glider(const std::vector<Cell>& normalized);

GliderState advance(GliderState s, std::int64_t n);
GliderState rewind(GliderState s, std::int64_t n);
// Advances to the next generation at which the phase equals ph; returns gens taken.
int advance_to_phase(GliderState& s, int ph);
std::vector<Cell> glider_cells(const GliderState& s);
Placement glider_placement(const GliderState& s);

// Stream invariants: gliders on the same lane share `lane`; a stream with
// period P has a constant tau mod P. tau is the generation offset of the
// glider relative to the lane's phase-0 reference point.
struct LaneKey {
    Heading heading;
    std::int64_t lane = 0;
    std::int64_t tau = 0;
};
// s observed at generation t.
LaneKey lane_key(const GliderState& s, std::int64_t t);

}  // namespace cafo
