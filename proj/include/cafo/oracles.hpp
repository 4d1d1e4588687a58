#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cafo/engine.hpp"
#include "cafo/gliders.hpp"
#include "cafo/patterns.hpp"

namespace cafo {

struct OscillatorReport {
    int period = 0;
    Cell displacement;
};

// Smallest t >= 1 with generation t a translate of generation 0.
OscillatorReport detect_period(const Pattern& p, const Rule& rule = Rule::conway(), int max_gens = 400);

// Inter-arrival gap of gliders crossing a ring `sentinel_offset` cells
// outside the gun's bounding box.
int detect_emission_period(const Pattern& gun, const Rule& rule = Rule::conway(), int sentinel_offset = 8,
                           int horizon = 600);

struct GliderSighting {
    GliderState state;
    std::int64_t generation = 0;
};

// 8-connected components of the live cells inside r that exactly match a
// glider template. Components touching the region edge are clipped to it.
std::vector<GliderSighting> track_gliders(const Grid& g, const Region& r);
std::vector<GliderSighting> track_gliders(const Grid& g);

// Splits live cells (inside r) into glider sightings and everything else.
void split_gliders(const Grid& g, const Region& r, std::vector<GliderSighting>& gliders, std::vector<Cell>& rest);

enum class CollisionKind { Annihilation, Reflection, Transformation, Mess };
std::string kind_name(CollisionKind k);
CollisionKind parse_kind(const std::string& s);

struct CollisionOutcome {
    CollisionKind kind = CollisionKind::Mess;
    Pattern residue;
    std::string residue_name;              // named still life / oscillator, if any
    std::optional<Heading> residue_heading;  // Reflection only
    // Residue position relative to the scratch frame used by the caller:
    // for classify_collision, grid coordinates of the placements.
    Cell residue_origin;
    int residue_phase = 0;  // glider phase for Reflection
    int settle_generation = 0;
};

// Simulates a and b together until the outcome is stable. Throws if the
// horizon passes first, or if the placements overlap.
CollisionOutcome classify_collision(const Placement& a, const Placement& b, const Rule& rule = Rule::conway(),
                                    int horizon = 400);

// Names a non-glider residue when it is some phase and orientation of a
// builtin still life or oscillator.
std::string identify(const std::vector<Cell>& cells, const Rule& rule = Rule::conway());

struct SearchSpec {
    Pattern target;  // stationary, placed with its origin at (0,0)
    Heading heading = kSE;  // projectile glider heading
    Region offsets{-8, -8, 8, 8};  // projectile bbox origin relative to target origin
    int phase_lo = 0, phase_hi = 3;
    int horizon = 400;
    int min_separation = 3;  // Chebyshev distance between projectile and target cells
    CollisionKind want = CollisionKind::Annihilation;
    std::string want_residue;  // empty: any
    std::optional<Heading> want_heading;
};

struct ReactionMatch {
    Cell offset;
    int phase = 0;
    CollisionOutcome outcome;
};

// All matches ordered by (offset.y, offset.x, phase).
std::vector<ReactionMatch> search_reactions(const SearchSpec& spec, const Rule& rule = Rule::conway(),
                                            int threads = 0);

// Catalog entry: a stationary target hit by a glider.
struct Reaction {
    std::string name;
    Pattern target;
    Transform target_transform;  // applied to the named builtin
    GliderState projectile;      // relative to the target origin, generation 0
    CollisionOutcome outcome;    // residue_origin relative to the target origin
};

std::string catalog_to_json(const std::vector<Reaction>& catalog);
std::vector<Reaction> catalog_from_json(const std::string& text);
const Reaction& find_reaction(const std::vector<Reaction>& catalog, const std::string& name);
// The frozen catalog shipped as an asset.
const std::vector<Reaction>& builtin_catalog();
// Runs the reaction from scratch and returns the outcome.
CollisionOutcome replay(const Reaction& r, const Rule& rule = Rule::conway(), int horizon = 400);

// Runs one search per entry of a discovery spec and keeps match `pick`
// (default 0) of each; entries without matches are left out. Spec format:
//   {"reactions": [{"name", "target", "transform": {"rotation", "flip"},
//     "heading", "offsets": [x0, y0, x1, y1], "want", "want_residue",
//     "want_heading", "pick"}]}
std::vector<Reaction> discover_catalog(const std::string& spec_json, const Rule& rule = Rule::conway(),
                                       int threads = 0);

}  // namespace cafo
