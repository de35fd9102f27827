#include "moire/frame.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

#include "moire/errors.hpp"

namespace moire::align {
namespace {

double line_distance(Point2 p, Point2 a, Point2 b) {
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len = std::hypot(dx, dy);
    if (len == 0.0) return distance(p, a);
    return std::abs(dy * (p.x - a.x) - dx * (p.y - a.y)) / len;
}

void fill_rect(Image& img, std::size_t x0, std::size_t y0, std::size_t w, std::size_t h, double v) {
    for (std::size_t c = 0; c < img.channels(); ++c)
        for (std::size_t y = y0; y < y0 + h; ++y)
            for (std::size_t x = x0; x < x0 + w; ++x) img.at(c, y, x) = v;
}

}  // namespace

CornerSet canonical_order(std::span<const Point2> points) {
    if (points.size() != kFrameCorners)
        throw ShapeError("canonical_order: expected " + std::to_string(kFrameCorners) +
                         " corners, got " + std::to_string(points.size()));
    Point2 centre{};
    for (const auto& p : points) centre = centre + p;
    centre = (1.0 / static_cast<double>(points.size())) * centre;

    // Screen-counter-clockwise angle: y grows downward, so negate it.
    auto angle = [&](const Point2& p) { return std::atan2(-(p.y - centre.y), p.x - centre.x); };
    std::vector<Point2> sorted(points.begin(), points.end());
    std::ranges::sort(sorted, [&](const Point2& a, const Point2& b) {
        const double ta = angle(a), tb = angle(b);
        if (ta != tb) return ta < tb;
        return std::tie(a.x, a.y) < std::tie(b.x, b.y);
    });

    const std::size_t n = sorted.size();
    auto at = [&](std::size_t i) { return sorted[i % n]; };
    std::size_t best_phase = 0;
    double best_residual = std::numeric_limits<double>::infinity();
    for (std::size_t phase = 0; phase < 5; ++phase) {
        double residual = 0.0;
        for (std::size_t k = 0; k < 4; ++k) {
            const std::size_t i = phase + 5 * k;
            residual += line_distance(at(i + 1), at(i), at(i + 5)) +
                        line_distance(at(i + 4), at(i), at(i + 5));
        }
        if (residual < best_residual) {
            best_residual = residual;
            best_phase = phase;
        }
    }

    // Among the four frame corners, the top-left one points most toward (-1, -1).
    std::size_t start = best_phase;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < 4; ++k) {
        const Point2 p = at(best_phase + 5 * k);
        const double score = -(p.x - centre.x) - (p.y - centre.y);
        if (score > best_score) {
            best_score = score;
            start = (best_phase + 5 * k) % n;
        }
    }

    CornerSet out;
    for (std::size_t i = 0; i < n; ++i) out.points[i] = at(start + i);
    return out;
}

FramedImage synthesize_frame(const Image& reference, const FrameSpec& spec) {
    if (spec.block_width == 0 || spec.block_height == 0)
        throw ConfigError("synthesize_frame: zero-sized blocks collapse the frame to 4 corners");
    if (spec.border_width == 0) throw ConfigError("synthesize_frame: border width must be positive");
    const std::size_t outer_w = reference.width() + 2 * spec.border_width;
    const std::size_t outer_h = reference.height() + 2 * spec.border_width;
    if (spec.block_width >= outer_w || spec.block_width >= outer_h)
        throw ConfigError("synthesize_frame: block width must be shorter than every border edge");
    const std::size_t need_w = outer_w + 2 * spec.block_height + 2;
    const std::size_t need_h = outer_h + 2 * spec.block_height + 2;
    if (reference.empty() || need_w > spec.canvas_width || need_h > spec.canvas_height)
        throw ShapeError("synthesize_frame: reference " + std::to_string(reference.width()) + "x" +
                         std::to_string(reference.height()) + " with border and blocks needs at least " +
                         std::to_string(need_w) + "x" + std::to_string(need_h) + " canvas, have " +
                         std::to_string(spec.canvas_width) + "x" + std::to_string(spec.canvas_height));

    FramedImage f;
    f.image = Image(reference.channels(), spec.canvas_height, spec.canvas_width, 1.0);
    const std::size_t rx = (spec.canvas_width - reference.width()) / 2;
    const std::size_t ry = (spec.canvas_height - reference.height()) / 2;
    f.reference_rect = {rx, ry, reference.width(), reference.height()};

    const std::size_t bx = rx - spec.border_width;  // outer border, pixel indices [bx, bx+outer_w)
    const std::size_t by = ry - spec.border_width;
    fill_rect(f.image, bx, by, outer_w, outer_h, 0.0);
    const std::size_t hx = bx + (outer_w - spec.block_width) / 2;  // top/bottom block start
    const std::size_t vy = by + (outer_h - spec.block_width) / 2;  // left/right block start
    fill_rect(f.image, hx, by - spec.block_height, spec.block_width, spec.block_height, 0.0);
    fill_rect(f.image, hx, by + outer_h, spec.block_width, spec.block_height, 0.0);
    fill_rect(f.image, bx - spec.block_height, vy, spec.block_height, spec.block_width, 0.0);
    fill_rect(f.image, bx + outer_w, vy, spec.block_height, spec.block_width, 0.0);
    for (std::size_t c = 0; c < reference.channels(); ++c)
        for (std::size_t y = 0; y < reference.height(); ++y)
            for (std::size_t x = 0; x < reference.width(); ++x)
                f.image.at(c, ry + y, rx + x) = reference.at(c, y, x);

    // Pixel i spans [i - 0.5, i + 0.5], so region edges fall on half-integers.
    auto e = [](std::size_t i) { return static_cast<double>(i) - 0.5; };
    const double l = e(bx), r = e(bx + outer_w), t = e(by), b = e(by + outer_h);
    const double h0 = e(hx), h1 = e(hx + spec.block_width);
    const double v0 = e(vy), v1 = e(vy + spec.block_width);
    const double bh = static_cast<double>(spec.block_height);
    const std::array<Point2, kFrameCorners> pts{{
        {l, t}, {r, t}, {l, b}, {r, b},
        {h0, t}, {h0, t - bh}, {h1, t - bh}, {h1, t},
        {h0, b}, {h0, b + bh}, {h1, b + bh}, {h1, b},
        {l, v0}, {l - bh, v0}, {l - bh, v1}, {l, v1},
        {r, v0}, {r + bh, v0}, {r + bh, v1}, {r, v1},
    }};
    f.corners = canonical_order(pts);
    return f;
}

}  // namespace moire::align
