#include "moire/image.hpp"

#include <algorithm>
#include <string>

#include "moire/errors.hpp"

namespace moire {

void require_same_shape(const Image& a, const Image& b, const char* what) {
    if (a.same_shape(b)) return;
    const char* axis = a.channels() != b.channels() ? "channel" : a.height() != b.height() ? "height" : "width";
    throw ShapeError(std::string(what) + ": " + axis + " mismatch (" + std::to_string(a.channels()) +
                     "x" + std::to_string(a.height()) + "x" + std::to_string(a.width()) + " vs " +
                     std::to_string(b.channels()) + "x" + std::to_string(b.height()) + "x" +
                     std::to_string(b.width()) + ")");
}

Image luminance(const Image& img) {
    Image out(1, img.height(), img.width());
    auto dst = out.data();
    for (std::size_t c = 0; c < img.channels(); ++c) {
        auto src = img.plane(c);
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
    const double inv = img.channels() ? 1.0 / static_cast<double>(img.channels()) : 0.0;
    for (double& v : dst) v *= inv;
    return out;
}

Image convert_channels(const Image& img, std::size_t channels) {
    if (img.channels() == channels) return img;
    if (channels == 1) return luminance(img);
    if (img.channels() != 1 || channels != 3)
        throw ShapeError("convert_channels: unsupported conversion from " +
                         std::to_string(img.channels()) + " to " + std::to_string(channels));
    Image out(3, img.height(), img.width());
    for (std::size_t c = 0; c < 3; ++c) std::ranges::copy(img.plane(0), out.plane(c).begin());
    return out;
}

Image clamp01(Image img) {
    for (double& v : img.data()) v = std::clamp(v, 0.0, 1.0);
    return img;
}

Image crop(const Image& img, std::size_t x0, std::size_t y0, std::size_t width, std::size_t height) {
    if (x0 + width > img.width() || y0 + height > img.height())
        throw ShapeError("crop: window exceeds image bounds");
    Image out(img.channels(), height, width);
    for (std::size_t c = 0; c < img.channels(); ++c)
        for (std::size_t y = 0; y < height; ++y)
            for (std::size_t x = 0; x < width; ++x) out.at(c, y, x) = img.at(c, y0 + y, x0 + x);
    return out;
}

Image pad_replicate(const Image& img, std::size_t height, std::size_t width) {
    if (height < img.height() || width < img.width() || img.empty())
        throw ShapeError("pad_replicate: target smaller than image");
    Image out(img.channels(), height, width);
    for (std::size_t c = 0; c < img.channels(); ++c)
        for (std::size_t y = 0; y < height; ++y)
            for (std::size_t x = 0; x < width; ++x)
                out.at(c, y, x) = img.at(c, std::min(y, img.height() - 1), std::min(x, img.width() - 1));
    return out;
}

std::vector<double> channel_means(const Image& img) {
    std::vector<double> means(img.channels(), 0.0);
    for (std::size_t c = 0; c < img.channels(); ++c) {
        double s = 0.0;
        for (double v : img.plane(c)) s += v;
        means[c] = img.plane_size() ? s / static_cast<double>(img.plane_size()) : 0.0;
    }
    return means;
}

template <typename T>
nn::Tensor4<T> to_tensor(const Image& img) {
    return to_batch<T>(std::span<const Image>(&img, 1));
}

template <typename T>
nn::Tensor4<T> to_batch(std::span<const Image> images) {
    if (images.empty()) throw ShapeError("to_batch: no images");
    const Image& first = images.front();
    nn::Tensor4<T> t(images.size(), first.channels(), first.height(), first.width());
    for (std::size_t n = 0; n < images.size(); ++n) {
        require_same_shape(first, images[n], "to_batch");
        auto src = images[n].data();
        T* dst = t.sample(n);
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<T>(src[i]);
    }
    return t;
}

template <typename T>
Image from_tensor(const nn::Tensor4<T>& t, std::size_t n) {
    const nn::Dims& d = t.dims();
    if (n >= d.n) throw ShapeError("from_tensor: sample index out of range");
    Image img(d.c, d.h, d.w);
    const T* src = t.sample(n);
    auto dst = img.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<double>(src[i]);
    return img;
}

template nn::Tensor4<float> to_tensor<float>(const Image&);
template nn::Tensor4<double> to_tensor<double>(const Image&);
template nn::Tensor4<float> to_batch<float>(std::span<const Image>);
template nn::Tensor4<double> to_batch<double>(std::span<const Image>);
template Image from_tensor<float>(const nn::Tensor4<float>&, std::size_t);
template Image from_tensor<double>(const nn::Tensor4<double>&, std::size_t);

}  // namespace moire
