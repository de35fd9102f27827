#pragma once

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "moire/homography.hpp"
#include "moire/image.hpp"

namespace moire::test {

/// Canvas-to-photo homography of a camera viewing the screen plane: the plane is tilted about
/// both axes and rotated in-plane by up to `max_deg` degrees, then centred in the photo.
inline align::Homography random_view(std::mt19937_64& rng, double max_deg, std::size_t canvas,
                                     std::size_t photo, double focal = 400.0) {
    std::uniform_real_distribution<double> angle(-max_deg * M_PI / 180.0, max_deg * M_PI / 180.0);
    const double ax = angle(rng), ay = angle(rng), az = angle(rng);
    const Eigen::Matrix3d r = (Eigen::AngleAxisd(az, Eigen::Vector3d::UnitZ()) *
                               Eigen::AngleAxisd(ay, Eigen::Vector3d::UnitY()) *
                               Eigen::AngleAxisd(ax, Eigen::Vector3d::UnitX()))
                                  .toRotationMatrix();
    const double c = (static_cast<double>(canvas) - 1.0) / 2.0;
    const double p = (static_cast<double>(photo) - 1.0) / 2.0;
    Eigen::Matrix3d centre;
    centre << 1, 0, -c, 0, 1, -c, 0, 0, 1;
    // Plane point (u, v) lands at R (u, v, 0) + (0, 0, focal), so the untilted view has unit scale.
    Eigen::Matrix3d place;
    place.col(0) = r.col(0);
    place.col(1) = r.col(1);
    place.col(2) = Eigen::Vector3d(0, 0, focal);
    Eigen::Matrix3d project;
    project << focal, 0, p, 0, focal, p, 0, 0, 1;
    return align::Homography(project * place * centre);
}

/// Photographs `canvas` through `h`; everything outside the screen is white.
inline Image photograph(const Image& canvas, const align::Homography& h, std::size_t size) {
    Image out = align::warp(canvas, h, size, size);
    const Image coverage = align::warp(Image(1, canvas.height(), canvas.width(), 1.0), h, size, size);
    for (std::size_t c = 0; c < out.channels(); ++c)
        for (std::size_t y = 0; y < size; ++y)
            for (std::size_t x = 0; x < size; ++x) out.at(c, y, x) += 1.0 - coverage.at(0, y, x);
    return out;
}

}  // namespace moire::test
