#include <gtest/gtest.h>

#include "cafo/gliders.hpp"

using namespace cafo;

TEST(Gliders, TemplatesMatchSimulation) {
    for (Heading h : all_headings())
        for (int ph = 0; ph < 4; ++ph) {
            GliderState s{h, ph, {20, 20}};
            auto next = evolve(glider_cells(s), 1);
            std::sort(next.begin(), next.end());
            auto want = glider_cells(advance(s, 1));
            std::sort(want.begin(), want.end());
            EXPECT_EQ(next, want) << heading_name(h) << " phase " << ph;
        }
}

TEST(Gliders, FourStepsMoveOneDiagonal) {
    GliderState s{kNW, 2, {10, 10}};
    GliderState t = advance(s, 4);
    EXPECT_EQ(t.phase, 2);
    EXPECT_EQ(t.pos, (Cell{9, 9}));
    EXPECT_EQ(rewind(t, 4), s);
    EXPECT_EQ(rewind(advance(s, 13), 13), s);
}

TEST(Gliders, MatchTemplates) {
    for (Heading h : all_headings())
        for (int ph = 0; ph < 4; ++ph) {
            auto m = match_glider(glider_template(h, ph));
            ASSERT_TRUE(m.has_value());
            EXPECT_EQ(m->first, h);
            EXPECT_EQ(m->second, ph);
        }
    EXPECT_FALSE(match_glider(builtin("boat").cells).has_value());
}

TEST(Gliders, PlacementReproducesState) {
    for (Heading h : all_headings())
        for (int ph = 0; ph < 4; ++ph) {
            GliderState s{h, ph, {7, 9}};
            auto a = placement_cells(glider_placement(s));
            auto b = glider_cells(s);
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            EXPECT_EQ(a, b);
        }
}

TEST(Gliders, LaneKeyIsInvariantAlongTheStream) {
    GliderState s{kSW, 1, {40, 3}};
    LaneKey k0 = lane_key(s, 100);
    for (int n : {1, 2, 5, 17, 40}) {
        LaneKey k = lane_key(advance(s, n), 100 + n);
        EXPECT_EQ(k.lane, k0.lane);
        EXPECT_EQ(k.tau, k0.tau);
    }
    // a glider one period later on the same lane
    LaneKey later = lane_key(s, 192);
    EXPECT_EQ(later.lane, k0.lane);
    EXPECT_EQ(later.tau - k0.tau, 92);
}

TEST(Gliders, HeadingNames) {
    for (Heading h : all_headings()) EXPECT_EQ(parse_heading(heading_name(h)), h);
    EXPECT_THROW(parse_heading("N"), std::invalid_argument);
    EXPECT_EQ(rotate_heading(kSE, {1, false}), kSW);
}
