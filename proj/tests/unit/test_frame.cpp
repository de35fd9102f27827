#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "moire/errors.hpp"
#include "moire/frame.hpp"
#include "test_support.hpp"

using namespace moire;
using namespace moire::align;

TEST(Frame, AnalyticCornersOfDefaultSpec) {
    const auto f = synthesize_frame(moire::test::random_image(3, 64, 64, 1), FrameSpec{});
    EXPECT_EQ(f.image.width(), 128u);
    EXPECT_EQ(f.reference_rect.x, 32u);
    const auto& p = f.corners.points;
    // Counter-clockwise on screen from the top-left frame corner: down the left edge first.
    EXPECT_EQ(p[0], (Point2{23.5, 23.5}));
    EXPECT_EQ(p[1], (Point2{23.5, 55.5}));
    EXPECT_EQ(p[2], (Point2{15.5, 55.5}));
    EXPECT_EQ(p[3], (Point2{15.5, 71.5}));
    EXPECT_EQ(p[4], (Point2{23.5, 71.5}));
    EXPECT_EQ(p[5], (Point2{23.5, 103.5}));
    EXPECT_EQ(p[10], (Point2{103.5, 103.5}));
    EXPECT_EQ(p[15], (Point2{103.5, 23.5}));
    EXPECT_EQ(p[17], (Point2{71.5, 15.5}));
}

TEST(Frame, PixelLayout) {
    const auto ref = moire::test::random_image(1, 64, 64, 2);
    const auto f = synthesize_frame(ref, FrameSpec{});
    EXPECT_EQ(f.image.at(0, 0, 0), 1.0);            // white surround
    EXPECT_EQ(f.image.at(0, 24, 24), 0.0);          // border
    EXPECT_EQ(f.image.at(0, 16, 60), 0.0);          // top block
    EXPECT_EQ(f.image.at(0, 16, 50), 1.0);          // beside the top block
    EXPECT_EQ(f.image.at(0, 40, 50), ref.at(0, 8, 18));
    EXPECT_EQ(crop(f.image, 32, 32, 64, 64), ref);
}

TEST(Frame, RejectsDegenerateSpecs) {
    const auto ref = moire::test::random_image(3, 64, 64, 3);
    FrameSpec s;
    s.block_width = 0;
    EXPECT_THROW(synthesize_frame(ref, s), ConfigError);
    s = FrameSpec{};
    s.border_width = 0;
    EXPECT_THROW(synthesize_frame(ref, s), ConfigError);
    EXPECT_THROW(synthesize_frame(moire::test::random_image(3, 100, 100, 4), FrameSpec{}), ShapeError);
}

TEST(CanonicalOrder, StableUnderShuffleAndRotation) {
    const auto f = synthesize_frame(Image(1, 64, 64, 0.5), FrameSpec{});
    std::vector<Point2> pts(f.corners.points.begin(), f.corners.points.end());
    std::mt19937_64 rng(5);
    std::shuffle(pts.begin(), pts.end(), rng);
    const auto reordered = canonical_order(pts);
    EXPECT_EQ(reordered.points, f.corners.points);

    for (double deg : {-25.0, -10.0, 10.0, 25.0}) {
        const double a = deg * M_PI / 180.0;
        std::vector<Point2> rot;
        for (const auto& p : f.corners.points) {
            const double x = p.x - 64, y = p.y - 64;
            rot.push_back({64 + std::cos(a) * x - std::sin(a) * y, 64 + std::sin(a) * x + std::cos(a) * y});
        }
        std::vector<Point2> shuffled = rot;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const auto o = canonical_order(shuffled);
        for (std::size_t i = 0; i < kFrameCorners; ++i) EXPECT_EQ(o.points[i], rot[i]) << deg << " deg, index " << i;
    }
    EXPECT_THROW(canonical_order(std::span<const Point2>(pts).first(19)), ShapeError);
}
