#include "cafo/patterns.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>

namespace cafo {

// generated from assets/ at build time
const std::map<std::string, std::string_view>& embedded_assets();

int Pattern::width() const {
    int w = 0;
    for (const auto& c : cells) w = std::max(w, c.x + 1);
    return w;
}

int Pattern::height() const {
    int h = 0;
    for (const auto& c : cells) h = std::max(h, c.y + 1);
    return h;
}

Cell bbox_origin(const std::vector<Cell>& cells) {
    if (cells.empty()) return {0, 0};
    Cell o = cells.front();
    for (const auto& c : cells) {
        o.x = std::min(o.x, c.x);
        o.y = std::min(o.y, c.y);
    }
    return o;
}

Region bbox(const std::vector<Cell>& cells) {
    if (cells.empty()) return {0, 0, -1, -1};
    Region r{cells[0].x, cells[0].y, cells[0].x, cells[0].y};
    for (const auto& c : cells) {
        r.x0 = std::min(r.x0, c.x);
        r.y0 = std::min(r.y0, c.y);
        r.x1 = std::max(r.x1, c.x);
        r.y1 = std::max(r.y1, c.y);
    }
    return r;
}

Pattern normalize(std::vector<Cell> cells, std::string name) {
    Cell o = bbox_origin(cells);
    for (auto& c : cells) {
        c.x -= o.x;
        c.y -= o.y;
    }
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    return Pattern{std::move(cells), std::move(name)};
}

Cell transform_cell(Cell c, const Transform& t) {
    if (t.flip) c.x = -c.x;
    for (int i = 0; i < ((t.rotation % 4) + 4) % 4; ++i) c = {-c.y, c.x};
    return c;
}

Pattern apply_transform(const Pattern& p, const Transform& t) {
    std::vector<Cell> out;
    out.reserve(p.cells.size());
    for (const auto& c : p.cells) out.push_back(transform_cell(c, t));
    return normalize(std::move(out), p.name);
}

// Elements are represented as flip-then-rotate; composing works on the
// images of two probe vectors.
Transform compose(const Transform& first, const Transform& then) {
    for (const auto& t : all_transforms()) {
        bool same = true;
        for (Cell probe : {Cell{1, 0}, Cell{0, 1}})
            if (transform_cell(transform_cell(probe, first), then) != transform_cell(probe, t)) same = false;
        if (same) return t;
    }
    throw std::logic_error("transform composition not closed");
}

Transform inverse(const Transform& t) {
    for (const auto& u : all_transforms())
        if (compose(t, u) == Transform{}) return u;
    throw std::logic_error("transform without inverse");
}

std::vector<Transform> all_transforms() {
    std::vector<Transform> out;
    for (int f = 0; f < 2; ++f)
        for (int r = 0; r < 4; ++r) out.push_back({r, f == 1});
    return out;
}

std::vector<Cell> evolve(const std::vector<Cell>& cells, int gens, const Rule& rule) {
    if (gens < 0) throw std::invalid_argument("negative phase");
    if (gens == 0 || cells.empty()) return cells;
    Region b = bbox(cells);
    int pad = gens + 4;
    Grid g(b.width() + 2 * pad, b.height() + 2 * pad);
    for (const auto& c : cells) g.set(c.x - b.x0 + pad, c.y - b.y0 + pad, true);
    Stepper s(rule);
    s.advance(g, gens);
    std::vector<Cell> out;
    for (const auto& c : g.live_cells()) out.push_back({c.x + b.x0 - pad, c.y + b.y0 - pad});
    return out;
}

std::vector<Cell> placement_cells(const Placement& pl, const Rule& rule) {
    Pattern t = apply_transform(pl.pattern, pl.transform);
    std::vector<Cell> cells = evolve(t.cells, pl.phase, rule);
    for (auto& c : cells) {
        c.x += pl.origin.x;
        c.y += pl.origin.y;
    }
    std::sort(cells.begin(), cells.end());
    return cells;
}

void place_cells(Grid& g, const std::vector<Cell>& cells) {
    for (const auto& c : cells)
        if (!g.in_bounds(c.x, c.y)) throw std::out_of_range("placement outside grid");
    for (const auto& c : cells)
        if (g.get(c.x, c.y)) throw std::invalid_argument("placement overlaps live cells");
    for (const auto& c : cells) g.set(c.x, c.y, true);
}

Grid place(const Grid& g, const Placement& pl, const Rule& rule) {
    Grid out = g;
    place_cells(out, placement_cells(pl, rule));
    return out;
}

namespace {

struct RleBody {
    std::vector<Cell> cells;
    int header_w = -1, header_h = -1;
};

int parse_int(std::string_view s, std::size_t& i) {
    if (i >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i]))) throw std::invalid_argument("rle: expected number");
    long v = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
        v = v * 10 + (s[i++] - '0');
        if (v > 1'000'000) throw std::invalid_argument("rle: number too large");
    }
    return static_cast<int>(v);
}

void parse_header(std::string_view line, RleBody& out) {
    std::string compact;
    for (char ch : line)
        if (!std::isspace(static_cast<unsigned char>(ch))) compact += ch;
    std::size_t i = 0;
    auto expect = [&](std::string_view lit) {
        if (compact.compare(i, lit.size(), lit) != 0) throw std::invalid_argument("rle: malformed header");
        i += lit.size();
    };
    expect("x=");
    out.header_w = parse_int(compact, i);
    expect(",y=");
    out.header_h = parse_int(compact, i);
    if (i == compact.size()) return;
    expect(",rule=");
    std::string rule = compact.substr(i);
    std::transform(rule.begin(), rule.end(), rule.begin(), [](unsigned char c) { return std::tolower(c); });
    if (rule != "b3/s23" && rule != "23/3") throw std::invalid_argument("rle: only the B3/S23 rule is supported");
}

RleBody parse_body(std::string_view text) {
    RleBody out;
    std::string body;
    bool header_seen = false;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
        std::size_t lead = line.find_first_not_of(" \t");
        if (lead == std::string_view::npos) continue;
        line.remove_prefix(lead);
        if (line[0] == '#') continue;
        if (!header_seen && body.empty() && line[0] == 'x') {
            parse_header(line, out);
            header_seen = true;
            continue;
        }
        body.append(line);
    }

    int x = 0, y = 0;
    bool done = false;
    std::size_t i = 0;
    while (i < body.size() && !done) {
        char ch = body[i];
        if (std::isspace(static_cast<unsigned char>(ch))) {
            ++i;
            continue;
        }
        int n = 1;
        if (std::isdigit(static_cast<unsigned char>(ch))) {
            n = parse_int(body, i);
            if (i >= body.size()) throw std::invalid_argument("rle: run count without tag");
            ch = body[i];
            if (n == 0) throw std::invalid_argument("rle: zero run count");
        }
        ++i;
        switch (ch) {
        case 'b':
        case '.':
            x += n;
            break;
        case 'o':
        case 'A':
            for (int k = 0; k < n; ++k) out.cells.push_back({x + k, y});
            x += n;
            break;
        case '$':
            y += n;
            x = 0;
            break;
        case '!':
            done = true;
            break;
        default:
            throw std::invalid_argument(std::string("rle: unexpected character '") + ch + "'");
        }
    }
    if (!done) throw std::invalid_argument("rle: missing terminating '!'");
    for (; i < body.size(); ++i)
        if (!std::isspace(static_cast<unsigned char>(body[i]))) throw std::invalid_argument("rle: text after '!'");
    if (out.header_w >= 0) {
        for (const auto& c : out.cells)
            if (c.x >= out.header_w || c.y >= out.header_h)
                throw std::invalid_argument("rle: content exceeds header size");
    }
    return out;
}

void append_run(std::string& s, int n, char tag) {
    if (n <= 0) return;
    if (n > 1) s += std::to_string(n);
    s += tag;
}

std::string encode_rows(const std::vector<Cell>& sorted, int height) {
    std::string s;
    std::size_t i = 0;
    int pending_rows = 0;
    for (int y = 0; y < height && i < sorted.size(); ++y) {
        if (sorted[i].y != y) {
            ++pending_rows;
            continue;
        }
        append_run(s, pending_rows, '$');
        pending_rows = 1;
        int x = 0;
        while (i < sorted.size() && sorted[i].y == y) {
            int start = sorted[i].x;
            int run = 1;
            while (i + run < sorted.size() && sorted[i + run].y == y && sorted[i + run].x == start + run) ++run;
            append_run(s, start - x, 'b');
            append_run(s, run, 'o');
            x = start + run;
            i += run;
        }
    }
    s += '!';
    // wrap at 70 columns without splitting a run
    std::string out;
    std::size_t col = 0, tok = 0;
    while (tok < s.size()) {
        std::size_t end = tok;
        while (end < s.size() && std::isdigit(static_cast<unsigned char>(s[end]))) ++end;
        ++end;
        std::size_t len = end - tok;
        if (col + len > 70) {
            out += '\n';
            col = 0;
        }
        out.append(s, tok, len);
        col += len;
        tok = end;
    }
    return out;
}

}  // namespace

Pattern parse_rle(std::string_view text) {
    RleBody b = parse_body(text);
    return normalize(std::move(b.cells));
}

std::string emit_rle(const Pattern& p) {
    Pattern n = normalize(p.cells);
    std::string s = "x = " + std::to_string(n.width()) + ", y = " + std::to_string(n.height()) + "\n";
    return s + encode_rows(n.cells, n.height());
}

std::string grid_to_rle(const Grid& g) {
    std::string s = "#C generation=" + std::to_string(g.generation()) + "\n";
    s += "x = " + std::to_string(g.width()) + ", y = " + std::to_string(g.height()) + ", rule = B3/S23\n";
    return s + encode_rows(g.live_cells(), g.height()) + "\n";
}

Grid grid_from_rle(std::string_view text) {
    RleBody b = parse_body(text);
    if (b.header_w <= 0 || b.header_h <= 0) throw std::invalid_argument("rle: grid dump needs an x/y header");
    Grid g(b.header_w, b.header_h);
    for (const auto& c : b.cells) g.set(c.x, c.y, true);
    // the generation comment is optional
    std::string_view key = "#C generation=";
    if (auto at = text.find(key); at != std::string_view::npos) {
        std::size_t i = at + key.size();
        std::string num;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) num += text[i++];
        if (!num.empty()) g.set_generation(std::stoll(num));
    }
    return g;
}

std::string_view asset_text(const std::string& file) {
    const auto& a = embedded_assets();
    auto it = a.find(file);
    if (it == a.end()) throw std::invalid_argument("unknown asset: " + file);
    return it->second;
}

std::vector<std::string> builtin_names() {
    return {"blinker", "block", "boat", "eater", "glider", "gosper_gun", "p92_gun", "passive_blinker"};
}

Pattern builtin(const std::string& name) {
    auto names = builtin_names();
    if (std::find(names.begin(), names.end(), name) == names.end())
        throw std::invalid_argument("unknown builtin pattern: " + name);
    Pattern p = parse_rle(asset_text(name + ".rle"));
    p.name = name;
    return p;
}

}  // namespace cafo
