#include "moire/layers.hpp"

#include <Eigen/Core>
#include <string>

#include "moire/errors.hpp"

namespace moire::nn {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMapMat = Eigen::Map<const RowMat<T>>;

struct Geometry {
    std::size_t channels, in_h, in_w, k, stride, pad, out_h, out_w;
};

// Unfolds `image` (channels, in_h, in_w) into a (channels*k*k, out_h*out_w) matrix.
template <typename T>
void im2col(const T* image, const Geometry& g, T* col) {
    const std::size_t cols = g.out_h * g.out_w;
    for (std::size_t c = 0; c < g.channels; ++c) {
        const T* src = image + c * g.in_h * g.in_w;
        for (std::size_t ky = 0; ky < g.k; ++ky) {
            for (std::size_t kx = 0; kx < g.k; ++kx) {
                T* row = col + ((c * g.k + ky) * g.k + kx) * cols;
                for (std::size_t oy = 0; oy < g.out_h; ++oy) {
                    const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                                    static_cast<std::ptrdiff_t>(g.pad);
                    T* dst = row + oy * g.out_w;
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.in_h)) {
                        std::fill(dst, dst + g.out_w, T(0));
                        continue;
                    }
                    const T* line = src + static_cast<std::size_t>(iy) * g.in_w;
                    for (std::size_t ox = 0; ox < g.out_w; ++ox) {
                        const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                                        static_cast<std::ptrdiff_t>(g.pad);
                        dst[ox] = (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.in_w))
                                      ? T(0)
                                      : line[ix];
                    }
                }
            }
        }
    }
}

// Adjoint of im2col: scatters-and-adds columns back onto `image`, which must be zeroed.
template <typename T>
void col2im(const T* col, const Geometry& g, T* image) {
    const std::size_t cols = g.out_h * g.out_w;
    for (std::size_t c = 0; c < g.channels; ++c) {
        T* dst = image + c * g.in_h * g.in_w;
        for (std::size_t ky = 0; ky < g.k; ++ky) {
            for (std::size_t kx = 0; kx < g.k; ++kx) {
                const T* row = col + ((c * g.k + ky) * g.k + kx) * cols;
                for (std::size_t oy = 0; oy < g.out_h; ++oy) {
                    const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                                    static_cast<std::ptrdiff_t>(g.pad);
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.in_h)) continue;
                    T* line = dst + static_cast<std::size_t>(iy) * g.in_w;
                    const T* src = row + oy * g.out_w;
                    for (std::size_t ox = 0; ox < g.out_w; ++ox) {
                        const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                                        static_cast<std::ptrdiff_t>(g.pad);
                        if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(g.in_w)) line[ix] += src[ox];
                    }
                }
            }
        }
    }
}

template <typename T>
void check_params(const ConvParams<T>& p, const char* op) {
    const Dims& kd = p.kernel.dims();
    if (kd.h != kd.w || kd.h == 0)
        throw ShapeError(std::string(op) + ": kernel must be square, got " + to_string(kd));
    if (p.stride == 0) throw ShapeError(std::string(op) + ": stride must be positive");
}

// Geometry of the convolution whose input is (c, h, w).
template <typename T>
Geometry conv_geometry(const ConvParams<T>& p, std::size_t c, std::size_t h, std::size_t w,
                       const char* op) {
    const std::size_t k = p.kernel_size();
    if (h + 2 * p.padding < k || w + 2 * p.padding < k)
        throw ShapeError(std::string(op) + ": input " + std::to_string(h) + "x" + std::to_string(w) +
                         " smaller than kernel " + std::to_string(k));
    return {c, h, w, k, p.stride, p.padding, conv_out_size(h, k, p.stride, p.padding),
            conv_out_size(w, k, p.stride, p.padding)};
}

template <typename T>
void add_bias(Tensor4<T>& out, const Tensor4<T>& bias) {
    const Dims& d = out.dims();
    for (std::size_t n = 0; n < d.n; ++n)
        for (std::size_t c = 0; c < d.c; ++c) {
            T* p = out.plane(n, c);
            const T b = bias[c];
            for (std::size_t i = 0; i < d.plane(); ++i) p[i] += b;
        }
}

template <typename T>
Tensor4<T> bias_grad(const Tensor4<T>& grad_out) {
    const Dims& d = grad_out.dims();
    Tensor4<T> gb(d.c, 1, 1, 1);
    for (std::size_t n = 0; n < d.n; ++n)
        for (std::size_t c = 0; c < d.c; ++c) {
            const T* p = grad_out.plane(n, c);
            T s = 0;
            for (std::size_t i = 0; i < d.plane(); ++i) s += p[i];
            gb[c] += s;
        }
    return gb;
}

}  // namespace

template <typename T>
ConvParams<T> make_conv(std::size_t in_c, std::size_t out_c, std::size_t k, std::size_t stride,
                        std::size_t padding) {
    return {Tensor4<T>(out_c, in_c, k, k), Tensor4<T>(out_c, 1, 1, 1), stride, padding};
}

template <typename T>
ConvParams<T> make_deconv(std::size_t in_c, std::size_t out_c, std::size_t k, std::size_t stride,
                          std::size_t padding) {
    return {Tensor4<T>(in_c, out_c, k, k), Tensor4<T>(out_c, 1, 1, 1), stride, padding};
}

template <typename T>
Tensor4<T> conv2d_forward(const Tensor4<T>& input, const ConvParams<T>& params) {
    check_params(params, "conv2d_forward");
    const Dims& in = input.dims();
    const Dims& kd = params.kernel.dims();
    if (in.c != kd.c)
        throw ShapeError("conv2d_forward: channel axis mismatch, input has " + std::to_string(in.c) +
                         " channels, kernel expects " + std::to_string(kd.c));
    if (params.bias.size() != kd.n) throw ShapeError("conv2d_forward: bias length != out channels");
    const Geometry g = conv_geometry(params, in.c, in.h, in.w, "conv2d_forward");
    const std::size_t rows = in.c * g.k * g.k;
    const std::size_t cols = g.out_h * g.out_w;

    Tensor4<T> out(in.n, kd.n, g.out_h, g.out_w);
    std::vector<T> col(rows * cols);
    ConstMapMat<T> weights(params.kernel.raw(), kd.n, rows);
    for (std::size_t n = 0; n < in.n; ++n) {
        im2col(input.sample(n), g, col.data());
        MapMat<T> dst(out.sample(n), kd.n, cols);
        dst.noalias() = weights * ConstMapMat<T>(col.data(), rows, cols);
    }
    add_bias(out, params.bias);
    return out;
}

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor4<T>& input, const ConvParams<T>& params,
                             const Tensor4<T>& grad_out, bool want_input) {
    check_params(params, "conv2d_backward");
    const Dims& in = input.dims();
    const Dims& kd = params.kernel.dims();
    if (in.c != kd.c) throw ShapeError("conv2d_backward: channel axis mismatch with kernel");
    const Geometry g = conv_geometry(params, in.c, in.h, in.w, "conv2d_backward");
    require_same_dims(grad_out.dims(), Dims{in.n, kd.n, g.out_h, g.out_w},
                      "conv2d_backward grad_out");
    const std::size_t rows = in.c * g.k * g.k;
    const std::size_t cols = g.out_h * g.out_w;

    ConvGrads<T> grads;
    grads.kernel = Tensor4<T>(kd);
    grads.bias = bias_grad(grad_out);
    if (want_input) grads.input = Tensor4<T>(in);

    std::vector<T> col(rows * cols);
    ConstMapMat<T> weights(params.kernel.raw(), kd.n, rows);
    MapMat<T> gw(grads.kernel.raw(), kd.n, rows);
    for (std::size_t n = 0; n < in.n; ++n) {
        ConstMapMat<T> go(grad_out.sample(n), kd.n, cols);
        im2col(input.sample(n), g, col.data());
        gw.noalias() += go * ConstMapMat<T>(col.data(), rows, cols).transpose();
        if (want_input) {
            MapMat<T>(col.data(), rows, cols).noalias() = weights.transpose() * go;
            col2im(col.data(), g, grads.input.sample(n));
        }
    }
    return grads;
}

template <typename T>
Tensor4<T> deconv2d_forward(const Tensor4<T>& input, const ConvParams<T>& params) {
    check_params(params, "deconv2d_forward");
    const Dims& in = input.dims();
    const Dims& kd = params.kernel.dims();  // (in_c, out_c, k, k)
    if (in.c != kd.n)
        throw ShapeError("deconv2d_forward: channel axis mismatch, input has " +
                         std::to_string(in.c) + " channels, kernel expects " + std::to_string(kd.n));
    if (params.bias.size() != kd.c) throw ShapeError("deconv2d_forward: bias length != out channels");
    const std::size_t k = params.kernel_size();
    const std::size_t out_h = deconv_out_size(in.h, k, params.stride, params.padding);
    const std::size_t out_w = deconv_out_size(in.w, k, params.stride, params.padding);
    // The adjoint convolution maps (out_c, out_h, out_w) back onto (in_c, in.h, in.w).
    const Geometry g{kd.c, out_h, out_w, k, params.stride, params.padding, in.h, in.w};
    if (conv_out_size(out_h, k, params.stride, params.padding) != in.h)
        throw ShapeError("deconv2d_forward: inconsistent stride/padding for input height");
    const std::size_t rows = kd.c * k * k;
    const std::size_t cols = in.h * in.w;

    Tensor4<T> out(in.n, kd.c, out_h, out_w);
    std::vector<T> col(rows * cols);
    ConstMapMat<T> weights(params.kernel.raw(), kd.n, rows);
    for (std::size_t n = 0; n < in.n; ++n) {
        MapMat<T>(col.data(), rows, cols).noalias() =
            weights.transpose() * ConstMapMat<T>(input.sample(n), in.c, cols);
        col2im(col.data(), g, out.sample(n));
    }
    add_bias(out, params.bias);
    return out;
}

template <typename T>
ConvGrads<T> deconv2d_backward(const Tensor4<T>& input, const ConvParams<T>& params,
                               const Tensor4<T>& grad_out, bool want_input) {
    check_params(params, "deconv2d_backward");
    const Dims& in = input.dims();
    const Dims& kd = params.kernel.dims();
    if (in.c != kd.n) throw ShapeError("deconv2d_backward: channel axis mismatch with kernel");
    const std::size_t k = params.kernel_size();
    const std::size_t out_h = deconv_out_size(in.h, k, params.stride, params.padding);
    const std::size_t out_w = deconv_out_size(in.w, k, params.stride, params.padding);
    require_same_dims(grad_out.dims(), Dims{in.n, kd.c, out_h, out_w},
                      "deconv2d_backward grad_out");
    const Geometry g{kd.c, out_h, out_w, k, params.stride, params.padding, in.h, in.w};
    const std::size_t rows = kd.c * k * k;
    const std::size_t cols = in.h * in.w;

    ConvGrads<T> grads;
    grads.kernel = Tensor4<T>(kd);
    grads.bias = bias_grad(grad_out);
    if (want_input) grads.input = Tensor4<T>(in);

    std::vector<T> col(rows * cols);
    ConstMapMat<T> weights(params.kernel.raw(), kd.n, rows);
    MapMat<T> gw(grads.kernel.raw(), kd.n, rows);
    for (std::size_t n = 0; n < in.n; ++n) {
        im2col(grad_out.sample(n), g, col.data());
        ConstMapMat<T> gcol(col.data(), rows, cols);
        gw.noalias() += ConstMapMat<T>(input.sample(n), in.c, cols) * gcol.transpose();
        if (want_input) MapMat<T>(grads.input.sample(n), in.c, cols).noalias() = weights * gcol;
    }
    return grads;
}

template <typename T>
Tensor4<T> relu(const Tensor4<T>& input) {
    Tensor4<T> out = input;
    out.drop_grad();
    relu_inplace(out);
    return out;
}

template <typename T>
void relu_inplace(Tensor4<T>& t) noexcept {
    for (T& v : t.data()) v = v > T(0) ? v : T(0);
}

template <typename T>
Tensor4<T> relu_backward(const Tensor4<T>& x, const Tensor4<T>& grad_out) {
    require_same_dims(x.dims(), grad_out.dims(), "relu_backward");
    Tensor4<T> g = grad_out;
    g.drop_grad();
    relu_backward_inplace(x, g);
    return g;
}

template <typename T>
void relu_backward_inplace(const Tensor4<T>& y, Tensor4<T>& grad) {
    require_same_dims(y.dims(), grad.dims(), "relu_backward");
    auto yd = y.data();
    auto gd = grad.data();
    for (std::size_t i = 0; i < gd.size(); ++i)
        if (!(yd[i] > T(0))) gd[i] = T(0);
}

#define MOIRE_INSTANTIATE_LAYERS(T)                                                              \
    template ConvParams<T> make_conv<T>(std::size_t, std::size_t, std::size_t, std::size_t,      \
                                        std::size_t);                                            \
    template ConvParams<T> make_deconv<T>(std::size_t, std::size_t, std::size_t, std::size_t,    \
                                          std::size_t);                                          \
    template Tensor4<T> conv2d_forward<T>(const Tensor4<T>&, const ConvParams<T>&);              \
    template ConvGrads<T> conv2d_backward<T>(const Tensor4<T>&, const ConvParams<T>&,            \
                                             const Tensor4<T>&, bool);                           \
    template Tensor4<T> deconv2d_forward<T>(const Tensor4<T>&, const ConvParams<T>&);            \
    template ConvGrads<T> deconv2d_backward<T>(const Tensor4<T>&, const ConvParams<T>&,          \
                                               const Tensor4<T>&, bool);                         \
    template Tensor4<T> relu<T>(const Tensor4<T>&);                                              \
    template void relu_inplace<T>(Tensor4<T>&) noexcept;                                         \
    template Tensor4<T> relu_backward<T>(const Tensor4<T>&, const Tensor4<T>&);                  \
    template void relu_backward_inplace<T>(const Tensor4<T>&, Tensor4<T>&);

MOIRE_INSTANTIATE_LAYERS(float)
MOIRE_INSTANTIATE_LAYERS(double)

#undef MOIRE_INSTANTIATE_LAYERS

}  // namespace moire::nn
