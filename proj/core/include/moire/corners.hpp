#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "moire/errors.hpp"
#include "moire/frame.hpp"
#include "moire/image.hpp"

namespace moire::align {

struct BinaryImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> black;  // 1 = black, 0 = white

    BinaryImage() = default;
    BinaryImage(std::size_t w, std::size_t h) : width(w), height(h), black(w * h, 0) {}

    [[nodiscard]] bool is_black(std::size_t x, std::size_t y) const noexcept {
        return black[y * width + x] != 0;
    }
    void set(std::size_t x, std::size_t y, bool b) noexcept { black[y * width + x] = b ? 1 : 0; }
    [[nodiscard]] std::size_t count_black() const noexcept;
};

/// Otsu threshold on the channel-mean luminance (256 bins over [0, 1]).
double otsu_threshold(const Image& image);

/// Channel-mean luminance <= threshold is black.
BinaryImage binarize(const Image& image, double threshold);
/// Binarizes with otsu_threshold(image).
BinaryImage binarize(const Image& image);

struct CornerCandidate {
    Point2 position;
    double response = 0.0;
};

struct HarrisOptions {
    double k = 0.04;
    double sigma = 1.5;
    double relative_threshold = 0.01;  // fraction of the maximum boundary response
    bool refine = true;                // gradient-orthogonality subpixel refinement
};

class CornerDetectionError : public DataError {
public:
    using DataError::DataError;
};

/// Harris corners restricted to the outer boundary of the largest black component, i.e. black
/// pixels of that component touching the white region connected to the image border, plus the
/// white pixels next to them, widened by two pixels. Recall-oriented: keeps every 3x3 local
/// maximum above the threshold.
/// Throws CornerDetectionError when there is no black region.
std::vector<CornerCandidate> detect_corners(const BinaryImage& binary, const HarrisOptions& opt = {});

/// Re-localises each corner on the smoothed luminance of `image` by gradient orthogonality;
/// points that do not converge nearby are kept as they are.
CornerSet refine_corners(const CornerSet& corners, const Image& image);

/// Black:white area ratio in a size x size window centred on `p` (fractional pixel coverage).
/// Returns +inf if the window holds no white.
double corner_ratio(const BinaryImage& binary, Point2 p, int size = 11);

struct CleanOptions {
    int neighborhood = 11;
    double convex_low = 0.25;   // accepted ratio band around 1/3
    double convex_high = 0.5;
    double concave_low = 2.0;   // accepted ratio band around 3
    double concave_high = 4.0;
    double min_distance = 5.0;   // below the 8 px block height of the default frame
};

class CornerCleaningError : public DataError {
public:
    CornerCleaningError(const std::string& what, std::vector<CornerCandidate> survivors)
        : DataError(what), survivors_(std::move(survivors)) {}
    [[nodiscard]] const std::vector<CornerCandidate>& survivors() const noexcept { return survivors_; }

private:
    std::vector<CornerCandidate> survivors_;
};

[[nodiscard]] bool ratio_accepted(double ratio, const CleanOptions& opt = {});

/// Keeps candidates whose window ratio is near 3 or 1/3, suppresses duplicates closer than
/// min_distance (highest response wins), and returns the canonically ordered 20 corners.
/// Throws CornerCleaningError (carrying the survivors) if the survivor count is not 20.
CornerSet clean_corners(std::span<const CornerCandidate> candidates, const BinaryImage& binary,
                        const CleanOptions& opt = {});

}  // namespace moire::align
