#pragma once

#include <Eigen/Core>
#include <span>

#include "moire/image.hpp"

namespace moire::align {

/// Image-plane point; pixel (x, y) has its centre at integer coordinates.
struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
    friend bool operator==(const Point2&, const Point2&) = default;
};

double distance(Point2 a, Point2 b);

/// 3x3 projective map normalised so that h33 == 1.
class Homography {
public:
    Homography() : m_(Eigen::Matrix3d::Identity()) {}
    /// Normalises by m(2,2). Throws NumericalError if h33 vanishes or |det| <= 1e-9 afterwards.
    explicit Homography(const Eigen::Matrix3d& m);

    static Homography identity() { return {}; }
    static Homography translation(double tx, double ty);

    [[nodiscard]] const Eigen::Matrix3d& matrix() const noexcept { return m_; }
    [[nodiscard]] Point2 apply(Point2 p) const;
    [[nodiscard]] Homography inverse() const;

    friend Homography operator*(const Homography& a, const Homography& b) {
        return Homography(a.m_ * b.m_);
    }

private:
    Eigen::Matrix3d m_;
};

/// Least-squares homography mapping src[i] to dst[i] by the normalised direct linear transform:
/// both point sets are translated to their centroid and scaled to mean distance sqrt(2), the
/// 2n x 9 design matrix is solved for its smallest right singular vector, and the
/// normalisation is undone. Throws ShapeError for fewer than 4 or unequal point counts and
/// NumericalError for a degenerate (rank-deficient) configuration.
Homography estimate_homography(std::span<const Point2> src, std::span<const Point2> dst);

/// Mean Euclidean distance between H(src[i]) and dst[i].
double mean_reprojection_error(const Homography& h, std::span<const Point2> src,
                               std::span<const Point2> dst);

/// Renders an out_width x out_height image whose pixel p samples `image` at H^-1(p) with
/// bilinear interpolation; samples outside the source are black.
Image warp(const Image& image, const Homography& h, std::size_t out_width, std::size_t out_height);

}  // namespace moire::align
