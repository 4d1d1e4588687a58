#pragma once

#include <vector>

#include "cafo/engine.hpp"

// Independent reference: neighbour counting on a plain 2D array, cells
// outside the grid are dead.
namespace naive {

using Board = std::vector<std::vector<int>>;

inline Board from_grid(const cafo::Grid& g) {
    Board b(g.height(), std::vector<int>(g.width(), 0));
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x) b[y][x] = g.get(x, y) ? 1 : 0;
    return b;
}

inline Board step(const Board& b, int birth = 3, int over = 3, int under = 2) {
    int h = static_cast<int>(b.size()), w = h ? static_cast<int>(b[0].size()) : 0;
    Board out(h, std::vector<int>(w, 0));
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int n = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (!dx && !dy) continue;
                    int yy = y + dy, xx = x + dx;
                    if (yy >= 0 && yy < h && xx >= 0 && xx < w) n += b[yy][xx];
                }
            out[y][x] = b[y][x] ? (n >= under && n <= over) : (n == birth);
        }
    return out;
}

}  // namespace naive
