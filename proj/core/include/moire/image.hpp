#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "moire/tensor.hpp"

namespace moire {

/// Planar floating-point image with values nominally in [0, 1].
class Image {
public:
    Image() = default;
    Image(std::size_t channels, std::size_t height, std::size_t width, double fill = 0.0)
        : c_(channels), h_(height), w_(width), data_(channels * height * width, fill) {}

    [[nodiscard]] std::size_t channels() const noexcept { return c_; }
    [[nodiscard]] std::size_t height() const noexcept { return h_; }
    [[nodiscard]] std::size_t width() const noexcept { return w_; }
    [[nodiscard]] std::size_t plane_size() const noexcept { return h_ * w_; }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }
    [[nodiscard]] bool same_shape(const Image& o) const noexcept {
        return c_ == o.c_ && h_ == o.h_ && w_ == o.w_;
    }

    double& at(std::size_t c, std::size_t y, std::size_t x) noexcept {
        return data_[(c * h_ + y) * w_ + x];
    }
    [[nodiscard]] double at(std::size_t c, std::size_t y, std::size_t x) const noexcept {
        return data_[(c * h_ + y) * w_ + x];
    }
    [[nodiscard]] std::span<double> plane(std::size_t c) noexcept {
        return {data_.data() + c * plane_size(), plane_size()};
    }
    [[nodiscard]] std::span<const double> plane(std::size_t c) const noexcept {
        return {data_.data() + c * plane_size(), plane_size()};
    }
    [[nodiscard]] std::span<double> data() noexcept { return data_; }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t c_ = 0, h_ = 0, w_ = 0;
    std::vector<double> data_;
};

/// Throws ShapeError unless both images have identical channels, height and width.
void require_same_shape(const Image& a, const Image& b, const char* what);

/// Mean of the channels per pixel.
Image luminance(const Image& img);
/// Replicates a single-channel image into three channels, or averages three into one.
Image convert_channels(const Image& img, std::size_t channels);
Image clamp01(Image img);
Image crop(const Image& img, std::size_t x0, std::size_t y0, std::size_t width, std::size_t height);
/// Pads right/bottom edges by replication up to the requested size.
Image pad_replicate(const Image& img, std::size_t height, std::size_t width);
/// Per-channel mean.
std::vector<double> channel_means(const Image& img);

template <typename T>
nn::Tensor4<T> to_tensor(const Image& img);
/// Stacks equally-shaped images into one batch.
template <typename T>
nn::Tensor4<T> to_batch(std::span<const Image> images);
/// Extracts sample `n` of a batch as an image (values copied unchanged, no clamping).
template <typename T>
Image from_tensor(const nn::Tensor4<T>& t, std::size_t n = 0);

}  // namespace moire
