#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "moire/homography.hpp"
#include "moire/image.hpp"

namespace moire::align {

inline constexpr std::size_t kFrameCorners = 20;

/// The 20 outer-boundary corners of a frame in canonical order: polar angle about their
/// centroid, counter-clockwise as seen on screen, starting at the top-left frame corner.
/// Points 0, 5, 10 and 15 are the frame corners (top-left, bottom-left, bottom-right,
/// top-right); the four points between consecutive frame corners belong to one block.
struct CornerSet {
    std::array<Point2, kFrameCorners> points{};

    [[nodiscard]] std::span<const Point2> span() const noexcept { return points; }
    [[nodiscard]] std::array<Point2, 4> frame_corners() const noexcept {
        return {points[0], points[5], points[10], points[15]};
    }
};

/// Orders exactly 20 boundary corners canonically. The frame corners are identified as the
/// phase whose edges pass through the adjacent block base corners, which keeps the order
/// stable under in-plane rotation and mild perspective. Throws ShapeError for a count other
/// than 20.
CornerSet canonical_order(std::span<const Point2> points);

/// Display frame around a reference image: black border, one black block extruded outward
/// from the middle of each border edge, white everywhere else.
struct FrameSpec {
    std::size_t border_width = 8;
    std::size_t block_width = 16;   // along the edge
    std::size_t block_height = 8;   // outward from the edge
    std::size_t canvas_width = 128;
    std::size_t canvas_height = 128;
};

struct Rect {
    std::size_t x = 0, y = 0, width = 0, height = 0;
};

struct FramedImage {
    Image image;
    CornerSet corners;   // analytic, on pixel-edge coordinates (half-integers)
    Rect reference_rect; // where the reference image sits in the canvas
};

/// Centres `reference` on the canvas inside the frame. Throws ConfigError for zero-sized
/// blocks or border, and ShapeError when reference, border and blocks do not fit.
FramedImage synthesize_frame(const Image& reference, const FrameSpec& spec);

}  // namespace moire::align
