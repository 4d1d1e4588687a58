#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cafo/engine.hpp"

namespace cafo {

struct Pattern {
    std::vector<Cell> cells;  // sorted row-major, min x = min y = 0
    std::string name;

    bool empty() const { return cells.empty(); }
    std::size_t size() const { return cells.size(); }
    int width() const;
    int height() const;
    friend bool operator==(const Pattern& a, const Pattern& b) { return a.cells == b.cells; }
};

// Sorts, dedups and shifts so the bounding box starts at (0,0).
Pattern normalize(std::vector<Cell> cells, std::string name = {});
// Top-left of the bounding box; (0,0) for an empty set.
Cell bbox_origin(const std::vector<Cell>& cells);
Region bbox(const std::vector<Cell>& cells);

struct Transform {
    int rotation = 0;  // quarter turns, (x,y) -> (-y,x)
    bool flip = false;  // x -> -x, applied before rotation

    friend bool operator==(const Transform&, const Transform&) = default;
};

Transform compose(const Transform& first, const Transform& then);
Transform inverse(const Transform& t);
// All 8 symmetries in a fixed order.
std::vector<Transform> all_transforms();

Pattern apply_transform(const Pattern& p, const Transform& t);
// Raw transform of a cell, without renormalizing.
Cell transform_cell(Cell c, const Transform& t);

struct Placement {
    Pattern pattern;
    Cell origin;
    Transform transform;
    int phase = 0;
};

// Cells of the placement in grid coordinates. The origin is where the
// transformed phase-0 pattern's bounding box starts; stepped cells keep
// their displacement relative to it.
std::vector<Cell> placement_cells(const Placement& pl, const Rule& rule = Rule::conway());

// Evolves cells in isolation on a scratch grid large enough that nothing
// reaches its edge. Coordinates are preserved.
std::vector<Cell> evolve(const std::vector<Cell>& cells, int gens, const Rule& rule = Rule::conway());

Grid place(const Grid& g, const Placement& pl, const Rule& rule = Rule::conway());
void place_cells(Grid& g, const std::vector<Cell>& cells);

Pattern parse_rle(std::string_view text);
std::string emit_rle(const Pattern& p);
// Rows of the grid as RLE, with a #C generation line.
std::string grid_to_rle(const Grid& g);
// Full-size grid from RLE; the header must carry the grid size.
Grid grid_from_rle(std::string_view text);

Pattern builtin(const std::string& name);
std::vector<std::string> builtin_names();
// Raw asset text (RLE or JSON) by file name, e.g. "reactions.json".
std::string_view asset_text(const std::string& file);

}  // namespace cafo
