#include <random>

#include <gtest/gtest.h>

#include "cafo/patterns.hpp"

using namespace cafo;

TEST(Rle, ParsesGlider) {
    Pattern p = parse_rle("#N Glider\nx = 3, y = 3, rule = B3/S23\nbo$2bo$3o!\n");
    EXPECT_EQ(p.cells, (std::vector<Cell>{{1, 0}, {2, 1}, {0, 2}, {1, 2}, {2, 2}}));
    EXPECT_EQ(p.width(), 3);
    EXPECT_EQ(p.height(), 3);
}

TEST(Rle, RunCountsAndBlankRows) {
    Pattern p = parse_rle("x = 4, y = 4\n2o2$3bo!");
    EXPECT_EQ(p.cells, (std::vector<Cell>{{0, 0}, {1, 0}, {3, 2}}));
}

TEST(Rle, Errors) {
    EXPECT_THROW(parse_rle("x = 3, y = 3\nbo$2bo$3o"), std::invalid_argument);      // no terminator
    EXPECT_THROW(parse_rle("x = 2, y = 2\n3o!"), std::invalid_argument);            // wider than header
    EXPECT_THROW(parse_rle("x = 3, y = 3\nbq$!"), std::invalid_argument);           // bad tag
    EXPECT_EQ(parse_rle("bo$2bo$3o!"), builtin("glider"));                           // header is optional
}

TEST(Rle, RoundTripRandom) {
    std::mt19937 rng(4);
    for (int i = 0; i < 50; ++i) {
        std::vector<Cell> cells;
        std::uniform_int_distribution<int> d(0, 90);
        for (int k = 0; k < 60; ++k) cells.push_back({d(rng), d(rng) / 3});
        Pattern p = normalize(cells);
        EXPECT_EQ(parse_rle(emit_rle(p)), p);
    }
}

TEST(Rle, LinesWrapAt70) {
    std::vector<Cell> cells;
    for (int x = 0; x < 300; x += 2) cells.push_back({x, 0});
    std::string text = emit_rle(normalize(cells));
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        EXPECT_LE(end - start, 70u);
        start = end + 1;
    }
}

TEST(Rle, EmptyPattern) {
    EXPECT_EQ(emit_rle(Pattern{}), "x = 0, y = 0\n!");
    EXPECT_TRUE(parse_rle("x = 0, y = 0\n!").empty());
}

TEST(Rle, GridDumpCarriesGeneration) {
    Grid g(20, 10);
    g.set(3, 4, true);
    g.set(19, 9, true);
    g.set_generation(276);
    std::string text = grid_to_rle(g);
    EXPECT_EQ(text.rfind("#C generation=276\n", 0), 0u);
    Grid back = grid_from_rle(text);
    EXPECT_EQ(back.width(), 20);
    EXPECT_EQ(back.height(), 10);
    EXPECT_EQ(back.generation(), 276);
    EXPECT_TRUE(back.same_cells(g));
}

TEST(Transform, EightDistinctGliderImages) {
    std::vector<Pattern> seen;
    for (const auto& t : all_transforms()) {
        Pattern p = apply_transform(builtin("glider"), t);
        for (const auto& s : seen) EXPECT_FALSE(s == p);
        seen.push_back(p);
    }
    EXPECT_EQ(seen.size(), 8u);
}

TEST(Transform, ComposeAndInverse) {
    Pattern g = builtin("glider");
    for (const auto& a : all_transforms())
        for (const auto& b : all_transforms()) {
            EXPECT_EQ(apply_transform(apply_transform(g, a), b), apply_transform(g, compose(a, b)));
        }
    for (const auto& a : all_transforms()) EXPECT_EQ(apply_transform(apply_transform(g, a), inverse(a)), g);
}

TEST(Transform, QuarterTurn) {
    EXPECT_EQ(transform_cell({1, 0}, {1, false}), (Cell{0, 1}));
    EXPECT_EQ(transform_cell({1, 0}, {0, true}), (Cell{-1, 0}));
}

TEST(Placement, PhaseEvolvesInIsolation) {
    Placement pl{builtin("blinker"), {5, 5}, {}, 1};
    auto cells = placement_cells(pl);
    EXPECT_EQ(cells.size(), 3u);
    EXPECT_EQ(bbox(cells).width(), 1);
    Grid g(12, 12);
    Grid placed = place(g, pl);
    EXPECT_EQ(placed.population(), 3);
    EXPECT_THROW(place(placed, pl), std::invalid_argument);  // overlap
    EXPECT_THROW(place(g, Placement{builtin("block"), {11, 11}, {}, 0}), std::out_of_range);
}

TEST(Builtins, KnownShapes) {
    EXPECT_EQ(builtin("glider").size(), 5u);
    EXPECT_EQ(builtin("blinker").size(), 3u);
    EXPECT_EQ(builtin("block").size(), 4u);
    EXPECT_EQ(builtin("boat").size(), 5u);
    EXPECT_EQ(builtin("gosper_gun").size(), 36u);
    EXPECT_EQ(builtin("p92_gun").size(), 139u);
    EXPECT_EQ(builtin("passive_blinker").size(), 6u);
    EXPECT_EQ(builtin("eater").size(), 7u);
    EXPECT_THROW(builtin("nope"), std::invalid_argument);
    EXPECT_GE(builtin_names().size(), 8u);
}
