#pragma once

#include <cstddef>

#include "moire/tensor.hpp"

namespace moire::nn {

/// Weights of one convolution or transposed convolution.
///
/// Convolution kernels are laid out (out_c, in_c, k, k). Transposed convolution kernels are
/// laid out (in_c, out_c, k, k), so the same array is the kernel of the adjoint convolution.
template <typename T>
struct ConvParams {
    Tensor4<T> kernel;
    Tensor4<T> bias;  // (out_c, 1, 1, 1)
    std::size_t stride = 1;
    std::size_t padding = 0;

    [[nodiscard]] std::size_t kernel_size() const noexcept { return kernel.dims().h; }
    [[nodiscard]] std::size_t parameter_count() const noexcept {
        return kernel.size() + bias.size();
    }
};

template <typename T>
ConvParams<T> make_conv(std::size_t in_c, std::size_t out_c, std::size_t k, std::size_t stride,
                        std::size_t padding);

template <typename T>
ConvParams<T> make_deconv(std::size_t in_c, std::size_t out_c, std::size_t k = 4,
                          std::size_t stride = 2, std::size_t padding = 1);

/// Output spatial size of a zero-padded cross-correlation along one axis.
constexpr std::size_t conv_out_size(std::size_t in, std::size_t k, std::size_t stride,
                                    std::size_t padding) noexcept {
    return (in + 2 * padding - k) / stride + 1;
}

/// Output spatial size of a transposed convolution along one axis.
constexpr std::size_t deconv_out_size(std::size_t in, std::size_t k, std::size_t stride,
                                      std::size_t padding) noexcept {
    return (in - 1) * stride + k - 2 * padding;
}

template <typename T>
struct ConvGrads {
    Tensor4<T> input;
    Tensor4<T> kernel;
    Tensor4<T> bias;
};

template <typename T>
Tensor4<T> conv2d_forward(const Tensor4<T>& input, const ConvParams<T>& params);

/// Gradients of a convolution. When `want_input` is false the input gradient is left empty.
template <typename T>
ConvGrads<T> conv2d_backward(const Tensor4<T>& input, const ConvParams<T>& params,
                             const Tensor4<T>& grad_out, bool want_input = true);

template <typename T>
Tensor4<T> deconv2d_forward(const Tensor4<T>& input, const ConvParams<T>& params);

template <typename T>
ConvGrads<T> deconv2d_backward(const Tensor4<T>& input, const ConvParams<T>& params,
                               const Tensor4<T>& grad_out, bool want_input = true);

template <typename T>
Tensor4<T> relu(const Tensor4<T>& input);

template <typename T>
void relu_inplace(Tensor4<T>& t) noexcept;

/// Gradient of relu given its input (or, equivalently, its output); zero where x <= 0.
template <typename T>
Tensor4<T> relu_backward(const Tensor4<T>& x, const Tensor4<T>& grad_out);

/// Multiplies `grad` in place by the relu derivative evaluated at activation `y`.
template <typename T>
void relu_backward_inplace(const Tensor4<T>& y, Tensor4<T>& grad);

}  // namespace moire::nn
