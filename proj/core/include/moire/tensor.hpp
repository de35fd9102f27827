#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace moire::nn {

/// Dimensions of a 4-D tensor in (batch, channels, height, width) order.
struct Dims {
    std::size_t n = 0;
    std::size_t c = 0;
    std::size_t h = 0;
    std::size_t w = 0;

    [[nodiscard]] constexpr std::size_t size() const noexcept { return n * c * h * w; }
    [[nodiscard]] constexpr std::size_t plane() const noexcept { return h * w; }
    friend constexpr bool operator==(const Dims&, const Dims&) = default;
};

std::string to_string(const Dims& d);

/// Throws ShapeError naming `what` and the first axis on which `a` and `b` differ.
void require_same_dims(const Dims& a, const Dims& b, const std::string& what);

/// Dense row-major (n, c, h, w) array with an optional gradient buffer of the same shape.
template <typename T>
class Tensor4 {
public:
    using value_type = T;

    Tensor4() = default;
    explicit Tensor4(Dims dims, T fill = T(0)) : dims_(dims), data_(dims.size(), fill) {}
    Tensor4(std::size_t n, std::size_t c, std::size_t h, std::size_t w, T fill = T(0))
        : Tensor4(Dims{n, c, h, w}, fill) {}

    [[nodiscard]] const Dims& dims() const noexcept { return dims_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    [[nodiscard]] std::span<T> data() noexcept { return data_; }
    [[nodiscard]] std::span<const T> data() const noexcept { return data_; }
    [[nodiscard]] T* raw() noexcept { return data_.data(); }
    [[nodiscard]] const T* raw() const noexcept { return data_.data(); }

    [[nodiscard]] std::size_t index(std::size_t n, std::size_t c, std::size_t y,
                                    std::size_t x) const noexcept {
        return ((n * dims_.c + c) * dims_.h + y) * dims_.w + x;
    }
    T& operator()(std::size_t n, std::size_t c, std::size_t y, std::size_t x) noexcept {
        return data_[index(n, c, y, x)];
    }
    const T& operator()(std::size_t n, std::size_t c, std::size_t y,
                        std::size_t x) const noexcept {
        return data_[index(n, c, y, x)];
    }
    T& operator[](std::size_t i) noexcept { return data_[i]; }
    const T& operator[](std::size_t i) const noexcept { return data_[i]; }

    /// Pointer to the (h, w) plane of sample n, channel c.
    [[nodiscard]] T* plane(std::size_t n, std::size_t c) noexcept {
        return data_.data() + (n * dims_.c + c) * dims_.plane();
    }
    [[nodiscard]] const T* plane(std::size_t n, std::size_t c) const noexcept {
        return data_.data() + (n * dims_.c + c) * dims_.plane();
    }
    [[nodiscard]] T* sample(std::size_t n) noexcept {
        return data_.data() + n * dims_.c * dims_.plane();
    }
    [[nodiscard]] const T* sample(std::size_t n) const noexcept {
        return data_.data() + n * dims_.c * dims_.plane();
    }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    [[nodiscard]] bool has_grad() const noexcept { return !grad_.empty(); }
    /// Allocates a zeroed gradient buffer if absent.
    std::span<T> ensure_grad() {
        if (grad_.size() != data_.size()) grad_.assign(data_.size(), T(0));
        return grad_;
    }
    [[nodiscard]] std::span<T> grad() noexcept { return grad_; }
    [[nodiscard]] std::span<const T> grad() const noexcept { return grad_; }
    void zero_grad() { std::fill(grad_.begin(), grad_.end(), T(0)); }
    void drop_grad() {
        grad_.clear();
        grad_.shrink_to_fit();
    }

    /// True when every value (and gradient, if present) is finite.
    [[nodiscard]] bool all_finite() const noexcept;

private:
    Dims dims_{};
    std::vector<T> data_;
    std::vector<T> grad_;
};

/// Copies the values of `src` into a tensor of another scalar type.
template <typename To, typename From>
Tensor4<To> tensor_cast(const Tensor4<From>& src) {
    Tensor4<To> out(src.dims());
    auto in = src.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < in.size(); ++i) dst[i] = static_cast<To>(in[i]);
    return out;
}

extern template class Tensor4<float>;
extern template class Tensor4<double>;

}  // namespace moire::nn
