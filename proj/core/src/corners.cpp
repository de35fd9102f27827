#include "moire/corners.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <tuple>

namespace moire::align {
namespace {

using Plane = std::vector<double>;

std::vector<double> gaussian_kernel(double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> g(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        g[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += g[i + radius];
    }
    for (double& v : g) v /= sum;
    return g;
}

// Separable filtering with edge replication.
Plane blur(const Plane& src, std::size_t w, std::size_t h, const std::vector<double>& g) {
    const int r = static_cast<int>(g.size() / 2);
    const int iw = static_cast<int>(w), ih = static_cast<int>(h);
    Plane tmp(src.size()), out(src.size());
    for (int y = 0; y < ih; ++y)
        for (int x = 0; x < iw; ++x) {
            double s = 0.0;
            for (int i = -r; i <= r; ++i) s += g[i + r] * src[y * iw + std::clamp(x + i, 0, iw - 1)];
            tmp[y * iw + x] = s;
        }
    for (int y = 0; y < ih; ++y)
        for (int x = 0; x < iw; ++x) {
            double s = 0.0;
            for (int i = -r; i <= r; ++i) s += g[i + r] * tmp[std::clamp(y + i, 0, ih - 1) * iw + x];
            out[y * iw + x] = s;
        }
    return out;
}

void sobel(const Plane& f, std::size_t w, std::size_t h, Plane& gx, Plane& gy) {
    const int iw = static_cast<int>(w), ih = static_cast<int>(h);
    gx.assign(f.size(), 0.0);
    gy.assign(f.size(), 0.0);
    auto at = [&](int x, int y) { return f[std::clamp(y, 0, ih - 1) * iw + std::clamp(x, 0, iw - 1)]; };
    for (int y = 0; y < ih; ++y)
        for (int x = 0; x < iw; ++x) {
            gx[y * iw + x] = ((at(x + 1, y - 1) + 2 * at(x + 1, y) + at(x + 1, y + 1)) -
                              (at(x - 1, y - 1) + 2 * at(x - 1, y) + at(x - 1, y + 1))) / 8.0;
            gy[y * iw + x] = ((at(x - 1, y + 1) + 2 * at(x, y + 1) + at(x + 1, y + 1)) -
                              (at(x - 1, y - 1) + 2 * at(x, y - 1) + at(x + 1, y - 1))) / 8.0;
        }
}

// Labels of the largest 8-connected black component (true = member).
std::vector<std::uint8_t> largest_component(const BinaryImage& b) {
    const std::size_t w = b.width, h = b.height;
    std::vector<int> label(w * h, -1);
    std::vector<std::size_t> sizes;
    std::deque<std::size_t> queue;
    for (std::size_t start = 0; start < w * h; ++start) {
        if (!b.black[start] || label[start] >= 0) continue;
        const int id = static_cast<int>(sizes.size());
        std::size_t count = 0;
        label[start] = id;
        queue.push_back(start);
        while (!queue.empty()) {
            const std::size_t p = queue.front();
            queue.pop_front();
            ++count;
            const auto px = static_cast<long>(p % w), py = static_cast<long>(p / w);
            for (long dy = -1; dy <= 1; ++dy)
                for (long dx = -1; dx <= 1; ++dx) {
                    const long nx = px + dx, ny = py + dy;
                    if (nx < 0 || ny < 0 || nx >= static_cast<long>(w) || ny >= static_cast<long>(h)) continue;
                    const std::size_t q = static_cast<std::size_t>(ny) * w + static_cast<std::size_t>(nx);
                    if (b.black[q] && label[q] < 0) {
                        label[q] = id;
                        queue.push_back(q);
                    }
                }
        }
        sizes.push_back(count);
    }
    std::vector<std::uint8_t> member(w * h, 0);
    if (sizes.empty()) return member;
    const int best = static_cast<int>(std::ranges::max_element(sizes) - sizes.begin());
    for (std::size_t i = 0; i < w * h; ++i) member[i] = label[i] == best;
    return member;
}

// White pixels 4-connected to the image border.
std::vector<std::uint8_t> exterior_white(const BinaryImage& b) {
    const std::size_t w = b.width, h = b.height;
    std::vector<std::uint8_t> ext(w * h, 0);
    std::deque<std::size_t> queue;
    auto seed = [&](std::size_t x, std::size_t y) {
        const std::size_t p = y * w + x;
        if (!b.black[p] && !ext[p]) {
            ext[p] = 1;
            queue.push_back(p);
        }
    };
    for (std::size_t x = 0; x < w; ++x) {
        seed(x, 0);
        seed(x, h - 1);
    }
    for (std::size_t y = 0; y < h; ++y) {
        seed(0, y);
        seed(w - 1, y);
    }
    while (!queue.empty()) {
        const std::size_t p = queue.front();
        queue.pop_front();
        const std::size_t x = p % w, y = p / w;
        if (x > 0) seed(x - 1, y);
        if (x + 1 < w) seed(x + 1, y);
        if (y > 0) seed(x, y - 1);
        if (y + 1 < h) seed(x, y + 1);
    }
    return ext;
}

// Moves `p` to the point that best satisfies g(q) . (q - p) = 0 for gradients g in a window.
Point2 refine_corner(const Plane& gx, const Plane& gy, std::size_t w, std::size_t h, Point2 p) {
    constexpr int radius = 4;
    constexpr double window_sigma = 2.0;
    const Point2 start = p;
    for (int iter = 0; iter < 20; ++iter) {
        double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
        const int cx = static_cast<int>(std::lround(p.x)), cy = static_cast<int>(std::lround(p.y));
        for (int y = cy - radius; y <= cy + radius; ++y) {
            if (y < 0 || y >= static_cast<int>(h)) continue;
            for (int x = cx - radius; x <= cx + radius; ++x) {
                if (x < 0 || x >= static_cast<int>(w)) continue;
                const double dx = x - p.x, dy = y - p.y;
                const double wt = std::exp(-0.5 * (dx * dx + dy * dy) / (window_sigma * window_sigma));
                const double u = gx[y * w + x], v = gy[y * w + x];
                const double guu = wt * u * u, guv = wt * u * v, gvv = wt * v * v;
                a11 += guu;
                a12 += guv;
                a22 += gvv;
                b1 += guu * x + guv * y;
                b2 += guv * x + gvv * y;
            }
        }
        const double det = a11 * a22 - a12 * a12;
        const double tr = a11 + a22;
        if (tr <= 0.0 || det <= 1e-6 * tr * tr) return start;
        const Point2 next{(a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det};
        const double moved = distance(next, p);
        p = next;
        if (distance(p, start) > 2.5) return start;
        if (moved < 1e-3) break;
    }
    return p;
}

}  // namespace

std::size_t BinaryImage::count_black() const noexcept {
    return static_cast<std::size_t>(std::ranges::count(black, std::uint8_t{1}));
}

double otsu_threshold(const Image& image) {
    const Image lum = luminance(image);
    std::array<double, 256> hist{};
    for (double v : lum.data()) {
        const int bin = std::clamp(static_cast<int>(v * 255.0 + 0.5), 0, 255);
        hist[bin] += 1.0;
    }
    const double total = static_cast<double>(lum.data().size());
    double sum_all = 0.0;
    for (int i = 0; i < 256; ++i) sum_all += i * hist[i];
    double w0 = 0.0, sum0 = 0.0, best = -1.0;
    int best_bin = 127;
    for (int t = 0; t < 256; ++t) {
        w0 += hist[t];
        if (w0 == 0.0) continue;
        const double w1 = total - w0;
        if (w1 == 0.0) break;
        sum0 += t * hist[t];
        const double m0 = sum0 / w0, m1 = (sum_all - sum0) / w1;
        const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
        if (between > best) {
            best = between;
            best_bin = t;
        }
    }
    return (best_bin + 0.5) / 255.0;
}

BinaryImage binarize(const Image& image, double threshold) {
    const Image lum = luminance(image);
    BinaryImage b(image.width(), image.height());
    auto src = lum.data();
    for (std::size_t i = 0; i < src.size(); ++i) b.black[i] = src[i] <= threshold ? 1 : 0;
    return b;
}

BinaryImage binarize(const Image& image) { return binarize(image, otsu_threshold(image)); }

std::vector<CornerCandidate> detect_corners(const BinaryImage& binary, const HarrisOptions& opt) {
    const std::size_t w = binary.width, h = binary.height;
    if (w < 3 || h < 3 || binary.count_black() == 0)
        throw CornerDetectionError("detect_corners: image contains no black region");

    const auto member = largest_component(binary);
    const auto ext = exterior_white(binary);
    std::vector<std::uint8_t> band(w * h, 0);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            if (!member[y * w + x]) continue;
            bool touches = false;
            for (int dy = -1; dy <= 1 && !touches; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const long nx = static_cast<long>(x) + dx, ny = static_cast<long>(y) + dy;
                    if (nx < 0 || ny < 0 || nx >= static_cast<long>(w) || ny >= static_cast<long>(h)) {
                        continue;
                    }
                    if (ext[static_cast<std::size_t>(ny) * w + static_cast<std::size_t>(nx)]) {
                        touches = true;
                        break;
                    }
                }
            if (!touches) continue;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const long nx = static_cast<long>(x) + dx, ny = static_cast<long>(y) + dy;
                    if (nx < 0 || ny < 0 || nx >= static_cast<long>(w) || ny >= static_cast<long>(h)) continue;
                    const std::size_t q = static_cast<std::size_t>(ny) * w + static_cast<std::size_t>(nx);
                    if (q == y * w + x || ext[q]) band[q] = 1;
                }
        }
    if (std::ranges::count(band, std::uint8_t{1}) == 0)
        throw CornerDetectionError("detect_corners: black region has no outer boundary");
    // Widen the band so response peaks of staircased (rotated) corners stay inside it.
    for (int pass = 0; pass < 2; ++pass) {
        std::vector<std::uint8_t> grown = band;
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) {
                if (!band[y * w + x]) continue;
                for (std::size_t ny = y > 0 ? y - 1 : 0; ny <= std::min(y + 1, h - 1); ++ny)
                    for (std::size_t nx = x > 0 ? x - 1 : 0; nx <= std::min(x + 1, w - 1); ++nx) grown[ny * w + nx] = 1;
            }
        band = std::move(grown);
    }

    Plane f(w * h);
    for (std::size_t i = 0; i < w * h; ++i) f[i] = binary.black[i] ? 1.0 : 0.0;
    Plane gx, gy;
    sobel(f, w, h, gx, gy);
    Plane xx(w * h), yy(w * h), xy(w * h);
    for (std::size_t i = 0; i < w * h; ++i) {
        xx[i] = gx[i] * gx[i];
        yy[i] = gy[i] * gy[i];
        xy[i] = gx[i] * gy[i];
    }
    const auto g = gaussian_kernel(opt.sigma);
    xx = blur(xx, w, h, g);
    yy = blur(yy, w, h, g);
    xy = blur(xy, w, h, g);
    Plane response(w * h);
    double max_r = 0.0;
    for (std::size_t i = 0; i < w * h; ++i) {
        const double tr = xx[i] + yy[i];
        response[i] = xx[i] * yy[i] - xy[i] * xy[i] - opt.k * tr * tr;
        if (band[i]) max_r = std::max(max_r, response[i]);
    }
    if (max_r <= 0.0) return {};
    const double threshold = opt.relative_threshold * max_r;

    Plane smooth_gx, smooth_gy;
    if (opt.refine) {
        const Plane smooth = blur(f, w, h, gaussian_kernel(1.0));
        smooth_gx.assign(w * h, 0.0);
        smooth_gy.assign(w * h, 0.0);
        for (std::size_t y = 1; y + 1 < h; ++y)
            for (std::size_t x = 1; x + 1 < w; ++x) {
                smooth_gx[y * w + x] = 0.5 * (smooth[y * w + x + 1] - smooth[y * w + x - 1]);
                smooth_gy[y * w + x] = 0.5 * (smooth[(y + 1) * w + x] - smooth[(y - 1) * w + x]);
            }
    }

    std::vector<CornerCandidate> out;
    for (std::size_t y = 1; y + 1 < h; ++y)
        for (std::size_t x = 1; x + 1 < w; ++x) {
            const std::size_t i = y * w + x;
            const double r = response[i];
            if (!band[i] || r < threshold) continue;
            bool is_max = true;
            for (int dy = -1; dy <= 1 && is_max; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const double q = response[(y + dy) * w + (x + dx)];
                    // Ties go to the first pixel in raster order.
                    const bool earlier = dy < 0 || (dy == 0 && dx < 0);
                    if (q > r || (earlier && q == r)) {
                        is_max = false;
                        break;
                    }
                }
            if (!is_max) continue;
            auto vertex = [](double a, double b, double c) {
                const double denom = a - 2.0 * b + c;
                return denom < 0.0 ? std::clamp(0.5 * (a - c) / denom, -0.5, 0.5) : 0.0;
            };
            Point2 p{static_cast<double>(x) + vertex(response[i - 1], r, response[i + 1]),
                     static_cast<double>(y) + vertex(response[i - w], r, response[i + w])};
            if (opt.refine) p = refine_corner(smooth_gx, smooth_gy, w, h, p);
            out.push_back({p, r});
        }
    return out;
}

CornerSet refine_corners(const CornerSet& corners, const Image& image) {
    const std::size_t w = image.width(), h = image.height();
    const Image lum = luminance(image);
    const Plane smooth = blur(Plane(lum.data().begin(), lum.data().end()), w, h, gaussian_kernel(1.0));
    Plane gx(w * h, 0.0), gy(w * h, 0.0);
    for (std::size_t y = 1; y + 1 < h; ++y)
        for (std::size_t x = 1; x + 1 < w; ++x) {
            gx[y * w + x] = 0.5 * (smooth[y * w + x + 1] - smooth[y * w + x - 1]);
            gy[y * w + x] = 0.5 * (smooth[(y + 1) * w + x] - smooth[(y - 1) * w + x]);
        }
    CornerSet out = corners;
    for (auto& p : out.points) p = refine_corner(gx, gy, w, h, p);
    return out;
}

double corner_ratio(const BinaryImage& binary, Point2 p, int size) {
    const double half = size / 2.0;
    const double x0 = p.x - half, x1 = p.x + half, y0 = p.y - half, y1 = p.y + half;
    double black = 0.0, white = 0.0;
    for (long y = static_cast<long>(std::floor(y0 + 0.5)); y <= static_cast<long>(std::ceil(y1 - 0.5)); ++y) {
        const double oy = std::min(y1, y + 0.5) - std::max(y0, y - 0.5);
        if (oy <= 0.0) continue;
        for (long x = static_cast<long>(std::floor(x0 + 0.5)); x <= static_cast<long>(std::ceil(x1 - 0.5)); ++x) {
            const double ox = std::min(x1, x + 0.5) - std::max(x0, x - 0.5);
            if (ox <= 0.0) continue;
            const bool inside = x >= 0 && y >= 0 && x < static_cast<long>(binary.width) &&
                                y < static_cast<long>(binary.height);
            const bool is_black =
                inside && binary.is_black(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
            (is_black ? black : white) += ox * oy;
        }
    }
    if (white <= 0.0) return std::numeric_limits<double>::infinity();
    return black / white;
}

bool ratio_accepted(double ratio, const CleanOptions& opt) {
    return (ratio >= opt.convex_low && ratio <= opt.convex_high) ||
           (ratio >= opt.concave_low && ratio <= opt.concave_high);
}

CornerSet clean_corners(std::span<const CornerCandidate> candidates, const BinaryImage& binary,
                        const CleanOptions& opt) {
    std::vector<CornerCandidate> kept;
    for (const auto& c : candidates)
        if (ratio_accepted(corner_ratio(binary, c.position, opt.neighborhood), opt)) kept.push_back(c);
    std::ranges::sort(kept, [](const CornerCandidate& a, const CornerCandidate& b) {
        return std::tie(b.response, a.position.y, a.position.x) <
               std::tie(a.response, b.position.y, b.position.x);
    });
    std::vector<CornerCandidate> survivors;
    for (const auto& c : kept) {
        const bool close = std::ranges::any_of(survivors, [&](const CornerCandidate& s) {
            return distance(s.position, c.position) < opt.min_distance;
        });
        if (!close) survivors.push_back(c);
    }
    if (survivors.size() != kFrameCorners)
        throw CornerCleaningError("clean_corners: " + std::to_string(survivors.size()) +
                                      " corners survived cleaning, expected " +
                                      std::to_string(kFrameCorners),
                                  survivors);
    std::vector<Point2> pts;
    for (const auto& s : survivors) pts.push_back(s.position);
    return canonical_order(pts);
}

}  // namespace moire::align
