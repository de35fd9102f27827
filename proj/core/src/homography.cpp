#include "moire/homography.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>

#include "moire/errors.hpp"

namespace moire::align {

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

Homography::Homography(const Eigen::Matrix3d& m) {
    if (!m.allFinite()) throw NumericalError("homography: non-finite matrix entries");
    if (std::abs(m(2, 2)) < 1e-12 * m.cwiseAbs().maxCoeff())
        throw NumericalError("homography: h33 is zero, cannot normalise");
    m_ = m / m(2, 2);
    if (std::abs(m_.determinant()) <= 1e-9)
        throw NumericalError("homography: matrix is singular (|det| <= 1e-9)");
}

Homography Homography::translation(double tx, double ty) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    m(0, 2) = tx;
    m(1, 2) = ty;
    return Homography(m);
}

Point2 Homography::apply(Point2 p) const {
    const double x = m_(0, 0) * p.x + m_(0, 1) * p.y + m_(0, 2);
    const double y = m_(1, 0) * p.x + m_(1, 1) * p.y + m_(1, 2);
    const double w = m_(2, 0) * p.x + m_(2, 1) * p.y + m_(2, 2);
    return {x / w, y / w};
}

Homography Homography::inverse() const { return Homography(m_.inverse()); }

namespace {

// Similarity that moves the centroid to the origin and sets the mean distance to sqrt(2).
Eigen::Matrix3d normaliser(std::span<const Point2> pts) {
    double cx = 0.0, cy = 0.0;
    for (const auto& p : pts) {
        cx += p.x;
        cy += p.y;
    }
    const double n = static_cast<double>(pts.size());
    cx /= n;
    cy /= n;
    double mean_dist = 0.0;
    for (const auto& p : pts) mean_dist += std::hypot(p.x - cx, p.y - cy);
    mean_dist /= n;
    if (mean_dist <= 0.0) throw NumericalError("estimate_homography: all points coincide");
    const double s = std::sqrt(2.0) / mean_dist;
    Eigen::Matrix3d t;
    t << s, 0, -s * cx, 0, s, -s * cy, 0, 0, 1;
    return t;
}

}  // namespace

Homography estimate_homography(std::span<const Point2> src, std::span<const Point2> dst) {
    if (src.size() != dst.size())
        throw ShapeError("estimate_homography: " + std::to_string(src.size()) + " source vs " +
                         std::to_string(dst.size()) + " destination points");
    if (src.size() < 4) throw ShapeError("estimate_homography: at least 4 correspondences required");

    const Eigen::Matrix3d ts = normaliser(src);
    const Eigen::Matrix3d td = normaliser(dst);
    const auto n = static_cast<Eigen::Index>(src.size());
    Eigen::MatrixXd a(2 * n, 9);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Vector3d p = ts * Eigen::Vector3d(src[i].x, src[i].y, 1.0);
        const Eigen::Vector3d q = td * Eigen::Vector3d(dst[i].x, dst[i].y, 1.0);
        const double x = p.x() / p.z(), y = p.y() / p.z();
        const double u = q.x() / q.z(), v = q.y() / q.z();
        a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
        a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    // A unique solution needs rank 8: the eighth singular value must be well above zero.
    if (sv.size() < 8 || sv(7) <= 1e-10 * sv(0))
        throw NumericalError("estimate_homography: degenerate point configuration (rank < 8)");
    const Eigen::VectorXd h = svd.matrixV().col(8);
    Eigen::Matrix3d hn;
    hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
    return Homography(td.inverse() * hn * ts);
}

double mean_reprojection_error(const Homography& h, std::span<const Point2> src,
                               std::span<const Point2> dst) {
    if (src.size() != dst.size() || src.empty())
        throw ShapeError("mean_reprojection_error: point sets must be non-empty and equal length");
    double total = 0.0;
    for (std::size_t i = 0; i < src.size(); ++i) total += distance(h.apply(src[i]), dst[i]);
    return total / static_cast<double>(src.size());
}

Image warp(const Image& image, const Homography& h, std::size_t out_width, std::size_t out_height) {
    const Homography inv = h.inverse();
    Image out(image.channels(), out_height, out_width);
    const double max_x = static_cast<double>(image.width()) - 1.0;
    const double max_y = static_cast<double>(image.height()) - 1.0;
    for (std::size_t y = 0; y < out_height; ++y) {
        for (std::size_t x = 0; x < out_width; ++x) {
            const Point2 s = inv.apply({static_cast<double>(x), static_cast<double>(y)});
            if (!(s.x >= 0.0 && s.y >= 0.0 && s.x <= max_x && s.y <= max_y)) continue;
            const auto x0 = static_cast<std::size_t>(s.x);
            const auto y0 = static_cast<std::size_t>(s.y);
            const std::size_t x1 = std::min(x0 + 1, image.width() - 1);
            const std::size_t y1 = std::min(y0 + 1, image.height() - 1);
            const double fx = s.x - static_cast<double>(x0);
            const double fy = s.y - static_cast<double>(y0);
            for (std::size_t c = 0; c < image.channels(); ++c) {
                const double top = image.at(c, y0, x0) + fx * (image.at(c, y0, x1) - image.at(c, y0, x0));
                const double bot = image.at(c, y1, x0) + fx * (image.at(c, y1, x1) - image.at(c, y1, x0));
                out.at(c, y, x) = top + fy * (bot - top);
            }
        }
    }
    return out;
}

}  // namespace moire::align
