#include "moire/metrics.hpp"

#include <cmath>

#include "moire/errors.hpp"

namespace moire::metrics {

double mean_error(const Image& a, const Image& b) {
    require_same_shape(a, b, "mean_error");
    auto x = a.data();
    auto y = b.data();
    if (x.empty()) throw ShapeError("mean_error: empty image");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return s / static_cast<double>(x.size());
}

double psnr_from_mse(double mse) {
    if (mse <= 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double psnr(const Image& a, const Image& b) { return psnr_from_mse(mean_error(a, b)); }

namespace {

// Separable 'valid' Gaussian filtering of one plane.
std::vector<double> filter_valid(std::span<const double> src, std::size_t h, std::size_t w,
                                 const std::vector<double>& g) {
    const std::size_t k = g.size();
    const std::size_t ow = w - k + 1;
    const std::size_t oh = h - k + 1;
    std::vector<double> tmp(h * ow, 0.0);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < ow; ++x) {
            double s = 0.0;
            for (std::size_t i = 0; i < k; ++i) s += g[i] * src[y * w + x + i];
            tmp[y * ow + x] = s;
        }
    std::vector<double> out(oh * ow, 0.0);
    for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t x = 0; x < ow; ++x) {
            double s = 0.0;
            for (std::size_t i = 0; i < k; ++i) s += g[i] * tmp[(y + i) * ow + x];
            out[y * ow + x] = s;
        }
    return out;
}

}  // namespace

double ssim(const Image& a, const Image& b, const SsimOptions& opt) {
    require_same_shape(a, b, "ssim");
    const auto k = static_cast<std::size_t>(opt.window);
    if (a.height() < k || a.width() < k)
        throw ShapeError("ssim: image " + std::to_string(a.height()) + "x" + std::to_string(a.width()) +
                         " smaller than the " + std::to_string(k) + "x" + std::to_string(k) + " window");
    std::vector<double> g(k);
    double norm = 0.0;
    const double centre = (static_cast<double>(k) - 1.0) / 2.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double d = static_cast<double>(i) - centre;
        g[i] = std::exp(-d * d / (2.0 * opt.sigma * opt.sigma));
        norm += g[i];
    }
    for (double& v : g) v /= norm;

    const double c1 = (opt.k1 * opt.dynamic_range) * (opt.k1 * opt.dynamic_range);
    const double c2 = (opt.k2 * opt.dynamic_range) * (opt.k2 * opt.dynamic_range);
    const std::size_t h = a.height(), w = a.width(), n = h * w;

    double total = 0.0;
    for (std::size_t c = 0; c < a.channels(); ++c) {
        auto x = a.plane(c);
        auto y = b.plane(c);
        std::vector<double> xx(n), yy(n), xy(n);
        for (std::size_t i = 0; i < n; ++i) {
            xx[i] = x[i] * x[i];
            yy[i] = y[i] * y[i];
            xy[i] = x[i] * y[i];
        }
        const auto mx = filter_valid(x, h, w, g);
        const auto my = filter_valid(y, h, w, g);
        const auto sxx = filter_valid(xx, h, w, g);
        const auto syy = filter_valid(yy, h, w, g);
        const auto sxy = filter_valid(xy, h, w, g);
        double s = 0.0;
        for (std::size_t i = 0; i < mx.size(); ++i) {
            const double vx = sxx[i] - mx[i] * mx[i];
            const double vy = syy[i] - my[i] * my[i];
            const double cov = sxy[i] - mx[i] * my[i];
            s += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2)) /
                 ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
        }
        total += s / static_cast<double>(mx.size());
    }
    return total / static_cast<double>(a.channels());
}

QualityReport evaluate(const Image& result, const Image& reference) {
    QualityReport r;
    r.mse = mean_error(result, reference);
    r.psnr = psnr_from_mse(r.mse);
    r.ssim = ssim(result, reference);
    return r;
}

QualityReport mean_report(const std::vector<QualityReport>& reports) {
    QualityReport m;
    if (reports.empty()) return m;
    for (const auto& r : reports) {
        m.psnr += r.psnr;
        m.ssim += r.ssim;
        m.mse += r.mse;
    }
    const double n = static_cast<double>(reports.size());
    m.psnr /= n;
    m.ssim /= n;
    m.mse /= n;
    return m;
}

}  // namespace moire::metrics
