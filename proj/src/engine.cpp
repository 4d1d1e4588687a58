#include "cafo/engine.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <sstream>
#include <thread>

namespace cafo {

void Rule::validate() const {
    auto ok = [](int v) { return v >= 0 && v <= 8; };
    if (!ok(new_life) || !ok(over_population) || !ok(under_population))
        throw std::invalid_argument("rule counts must lie in 0..8");
    if (under_population > over_population)
        throw std::invalid_argument("rule requires under_population <= over_population");
}

Grid::Grid(int width, int height) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("grid dimensions must be positive");
    wpr_ = (width + 63) / 64;
    bits_.assign(static_cast<std::size_t>(wpr_) * height, 0);
}

bool Grid::get(int x, int y) const {
    if (!in_bounds(x, y)) return false;
    return (row(y)[x >> 6] >> (x & 63)) & 1u;
}

void Grid::set(int x, int y, bool alive) {
    if (!in_bounds(x, y)) throw std::out_of_range("cell outside grid");
    std::uint64_t m = std::uint64_t{1} << (x & 63);
    if (alive)
        row(y)[x >> 6] |= m;
    else
        row(y)[x >> 6] &= ~m;
}

std::int64_t Grid::population() const {
    std::int64_t n = 0;
    for (auto w : bits_) n += std::popcount(w);
    return n;
}

namespace {

// mask of bits [lo, hi] inside word index w (bit positions absolute)
std::uint64_t span_mask(int w, int lo, int hi) {
    int base = w * 64;
    int a = std::max(lo - base, 0);
    int b = std::min(hi - base, 63);
    if (a > b) return 0;
    std::uint64_t m = (b == 63) ? ~std::uint64_t{0} : ((std::uint64_t{1} << (b + 1)) - 1);
    return m & (~std::uint64_t{0} << a);
}

}  // namespace

std::int64_t Grid::population(const Region& r) const {
    std::int64_t n = 0;
    int y0 = std::max(r.y0, 0), y1 = std::min(r.y1, height_ - 1);
    int x0 = std::max(r.x0, 0), x1 = std::min(r.x1, width_ - 1);
    if (x0 > x1) return 0;
    for (int y = y0; y <= y1; ++y) {
        const auto* rw = row(y);
        for (int w = x0 >> 6; w <= (x1 >> 6); ++w) n += std::popcount(rw[w] & span_mask(w, x0, x1));
    }
    return n;
}

std::vector<Cell> Grid::live_cells() const {
    return live_cells(Region{0, 0, width_ - 1, height_ - 1});
}

std::vector<Cell> Grid::live_cells(const Region& r) const {
    std::vector<Cell> out;
    int y0 = std::max(r.y0, 0), y1 = std::min(r.y1, height_ - 1);
    int x0 = std::max(r.x0, 0), x1 = std::min(r.x1, width_ - 1);
    if (x0 > x1) return out;
    for (int y = y0; y <= y1; ++y) {
        const auto* rw = row(y);
        for (int w = x0 >> 6; w <= (x1 >> 6); ++w) {
            std::uint64_t bits = rw[w] & span_mask(w, x0, x1);
            while (bits) {
                int b = std::countr_zero(bits);
                out.push_back({w * 64 + b, y});
                bits &= bits - 1;
            }
        }
    }
    return out;
}

bool Grid::empty() const {
    return std::all_of(bits_.begin(), bits_.end(), [](auto w) { return w == 0; });
}

bool Grid::same_cells(const Grid& o) const {
    return width_ == o.width_ && height_ == o.height_ && bits_ == o.bits_;
}

namespace {

struct Counts {
    std::uint64_t c0 = 0, c1 = 0, c2 = 0, c3 = 0;
    void add(std::uint64_t x) {
        std::uint64_t t0 = c0 & x;
        c0 ^= x;
        std::uint64_t t1 = c1 & t0;
        c1 ^= t0;
        std::uint64_t t2 = c2 & t1;
        c2 ^= t1;
        c3 |= t2;
    }
    std::uint64_t eq(int k) const {
        return ((k & 1) ? c0 : ~c0) & ((k & 2) ? c1 : ~c1) & ((k & 4) ? c2 : ~c2) & ((k & 8) ? c3 : ~c3);
    }
};

bool is_conway(const Rule& r) { return r.new_life == 3 && r.over_population == 3 && r.under_population == 2; }

void step_rows(const Grid& src, Grid& dst, const Rule& rule, int ybeg, int yend) {
    const int wpr = src.words_per_row();
    const int h = src.height();
    const int tail = src.width() & 63;
    const std::uint64_t last_mask = tail ? ((std::uint64_t{1} << tail) - 1) : ~std::uint64_t{0};
    const bool conway = is_conway(rule);
    static const std::vector<std::uint64_t> zeros(1024, 0);
    std::vector<std::uint64_t> zrow;
    const std::uint64_t* zero = zeros.data();
    if (wpr > static_cast<int>(zeros.size())) {
        zrow.assign(wpr, 0);
        zero = zrow.data();
    }

    for (int y = ybeg; y < yend; ++y) {
        const std::uint64_t* rows[3] = {y > 0 ? src.row(y - 1) : zero, src.row(y), y + 1 < h ? src.row(y + 1) : zero};
        std::uint64_t* out = dst.row(y);
        for (int w = 0; w < wpr; ++w) {
            Counts c;
            std::uint64_t cur = rows[1][w];
            for (int r = 0; r < 3; ++r) {
                const std::uint64_t* rw = rows[r];
                std::uint64_t mid = rw[w];
                std::uint64_t west = (mid << 1) | (w > 0 ? rw[w - 1] >> 63 : 0);
                std::uint64_t east = (mid >> 1) | (w + 1 < wpr ? rw[w + 1] << 63 : 0);
                c.add(west);
                c.add(east);
                if (r != 1) c.add(mid);
            }
            std::uint64_t next;
            if (conway) {
                next = c.c1 & ~c.c2 & ~c.c3 & (c.c0 | cur);
            } else {
                std::uint64_t survive = 0;
                for (int k = rule.under_population; k <= rule.over_population; ++k) survive |= c.eq(k);
                next = (~cur & c.eq(rule.new_life)) | (cur & survive);
            }
            if (w == wpr - 1) next &= last_mask;
            out[w] = next;
        }
    }
}

void run_bands(const Grid& src, Grid& dst, const Rule& rule, int threads) {
    int h = src.height();
    threads = std::clamp(threads, 1, h);
    if (threads == 1) {
        step_rows(src, dst, rule, 0, h);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads - 1);
    int band = (h + threads - 1) / threads;
    for (int t = 1; t < threads; ++t) {
        int a = t * band, b = std::min(h, a + band);
        if (a >= b) break;
        pool.emplace_back([&, a, b] { step_rows(src, dst, rule, a, b); });
    }
    step_rows(src, dst, rule, 0, std::min(h, band));
    for (auto& th : pool) th.join();
}

}  // namespace

Grid step(const Grid& g, const Rule& rule) { return step_parallel(g, rule, 1); }

Grid step_parallel(const Grid& g, const Rule& rule, int threads) {
    rule.validate();
    Grid out(g.width(), g.height());
    run_bands(g, out, rule, threads);
    out.set_generation(g.generation() + 1);
    return out;
}

Grid step_n(const Grid& g, const Rule& rule, std::int64_t n) {
    if (n < 0) throw std::invalid_argument("step count must be non-negative");
    Grid cur = g;
    Stepper s(rule);
    s.advance(cur, n);
    return cur;
}

Stepper::Stepper(Rule rule, int threads) : rule_(rule), threads_(std::max(threads, 1)) { rule_.validate(); }

void Stepper::advance(Grid& g) {
    if (scratch_.width() != g.width() || scratch_.height() != g.height()) scratch_ = Grid(g.width(), g.height());
    run_bands(g, scratch_, rule_, threads_);
    scratch_.set_generation(g.generation() + 1);
    std::swap(g, scratch_);
}

void Stepper::advance(Grid& g, std::int64_t n) {
    for (std::int64_t i = 0; i < n; ++i) advance(g);
}

void check_region(const Grid& g, const Region& r) {
    if (r.x0 > r.x1 || r.y0 > r.y1) throw std::invalid_argument("region corners out of order");
    if (!g.in_bounds(r.x0, r.y0) || !g.in_bounds(r.x1, r.y1)) throw std::out_of_range("region outside grid");
}

void clear_region_inplace(Grid& g, const Region& r) {
    check_region(g, r);
    for (int y = r.y0; y <= r.y1; ++y) {
        auto* rw = g.row(y);
        for (int w = r.x0 >> 6; w <= (r.x1 >> 6); ++w) rw[w] &= ~span_mask(w, r.x0, r.x1);
    }
}

Grid clear_region(const Grid& g, const Region& r) {
    Grid out = g;
    clear_region_inplace(out, r);
    return out;
}

Grid write_region(const Grid& g, const Region& r, const std::vector<Cell>& cells) {
    check_region(g, r);
    for (const auto& c : cells)
        if (!r.contains(c)) throw std::out_of_range("cell outside region");
    Grid out = clear_region(g, r);
    for (const auto& c : cells) out.set(c.x, c.y, true);
    return out;
}

std::uint64_t grid_hash(const Grid& g) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto feed = [&h](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) {
            h ^= (v >> (8 * i)) & 0xffu;
            h *= 0x100000001b3ull;
        }
    };
    feed(static_cast<std::uint32_t>(g.width()));
    feed(static_cast<std::uint32_t>(g.height()));
    for (const auto& c : g.live_cells()) {
        feed(static_cast<std::uint32_t>(c.x));
        feed(static_cast<std::uint32_t>(c.y));
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string to_ascii(const Grid& g) {
    std::string s;
    s.reserve(static_cast<std::size_t>(g.width() + 1) * g.height());
    for (int y = 0; y < g.height(); ++y) {
        for (int x = 0; x < g.width(); ++x) s += g.get(x, y) ? 'O' : '.';
        s += '\n';
    }
    return s;
}

Grid from_ascii(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    if (lines.empty()) throw std::invalid_argument("empty ascii grid");
    Grid g(static_cast<int>(lines[0].size()), static_cast<int>(lines.size()));
    for (int y = 0; y < g.height(); ++y) {
        if (static_cast<int>(lines[y].size()) != g.width()) throw std::invalid_argument("ragged ascii grid");
        for (int x = 0; x < g.width(); ++x) {
            char ch = lines[y][x];
            if (ch == 'O')
                g.set(x, y, true);
            else if (ch != '.')
                throw std::invalid_argument("ascii grid uses only '.' and 'O'");
        }
    }
    return g;
}

}  // namespace cafo
