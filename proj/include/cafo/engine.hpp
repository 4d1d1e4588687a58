#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cafo {

struct Cell {
    int x = 0;
    int y = 0;

    friend bool operator==(const Cell&, const Cell&) = default;
    // row-major order, same as RLE
    friend bool operator<(const Cell& a, const Cell& b) {
        return a.y != b.y ? a.y < b.y : a.x < b.x;
    }
};

// (new_life, over_population, under_population)
struct Rule {
    int new_life = 3;
    int over_population = 3;
    int under_population = 2;

    static Rule conway() { return {3, 3, 2}; }
    void validate() const;
    friend bool operator==(const Rule&, const Rule&) = default;
};

// Inclusive rectangle.
struct Region {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    bool contains(Cell c) const { return c.x >= x0 && c.x <= x1 && c.y >= y0 && c.y <= y1; }
    int width() const { return x1 - x0 + 1; }
    int height() const { return y1 - y0 + 1; }
    friend bool operator==(const Region&, const Region&) = default;
};

class Grid {
public:
    Grid() = default;
    Grid(int width, int height);

    int width() const { return width_; }
    int height() const { return height_; }
    std::int64_t generation() const { return generation_; }
    void set_generation(std::int64_t g) { generation_ = g; }

    bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
    bool get(int x, int y) const;
    void set(int x, int y, bool alive);

    std::int64_t population() const;
    std::int64_t population(const Region& r) const;
    std::vector<Cell> live_cells() const;
    std::vector<Cell> live_cells(const Region& r) const;
    bool empty() const;

    int words_per_row() const { return wpr_; }
    const std::uint64_t* row(int y) const { return bits_.data() + static_cast<std::size_t>(y) * wpr_; }
    std::uint64_t* row(int y) { return bits_.data() + static_cast<std::size_t>(y) * wpr_; }

    // cell-set equality; generation is ignored
    bool same_cells(const Grid& o) const;
    friend bool operator==(const Grid& a, const Grid& b) {
        return a.generation_ == b.generation_ && a.same_cells(b);
    }

private:
    int width_ = 0;
    int height_ = 0;
    int wpr_ = 0;
    std::int64_t generation_ = 0;
    std::vector<std::uint64_t> bits_;
};

Grid step(const Grid& g, const Rule& rule = Rule::conway());
// Band-parallel variant; result is bit-identical to step().
Grid step_parallel(const Grid& g, const Rule& rule, int threads);
Grid step_n(const Grid& g, const Rule& rule, std::int64_t n);

// In-place stepping with a reusable scratch buffer, for hot loops.
class Stepper {
public:
    explicit Stepper(Rule rule = Rule::conway(), int threads = 1);
    void advance(Grid& g);
    void advance(Grid& g, std::int64_t n);
    const Rule& rule() const { return rule_; }

private:
    Rule rule_;
    int threads_;
    Grid scratch_;
};

Grid clear_region(const Grid& g, const Region& r);
Grid write_region(const Grid& g, const Region& r, const std::vector<Cell>& cells);
void clear_region_inplace(Grid& g, const Region& r);

inline std::int64_t population(const Grid& g) { return g.population(); }
std::uint64_t grid_hash(const Grid& g);
std::string hash_hex(std::uint64_t h);

std::string to_ascii(const Grid& g);
Grid from_ascii(const std::string& text);

void check_region(const Grid& g, const Region& r);

}  // namespace cafo
