#pragma once

#include <vector>

#include "moire/image.hpp"

namespace moire::metrics {

/// Value reported by psnr() when the images are identical.
inline constexpr double kPsnrCap = 99.0;

/// Mean squared error over all pixels and channels.
double mean_error(const Image& a, const Image& b);

/// 10 log10(1 / mse) for [0, 1] images, computed over all channels jointly; kPsnrCap if mse == 0.
double psnr(const Image& a, const Image& b);

/// PSNR corresponding to a given mse (kPsnrCap when mse == 0).
double psnr_from_mse(double mse);

struct SsimOptions {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;
};

/// Mean SSIM with a Gaussian window over the fully-covered region, per channel then averaged.
/// Throws ShapeError if either dimension is smaller than the window.
double ssim(const Image& a, const Image& b, const SsimOptions& opt = {});

struct QualityReport {
    double psnr = 0.0;
    double ssim = 0.0;
    double mse = 0.0;
};

QualityReport evaluate(const Image& result, const Image& reference);

/// Arithmetic means of each field.
QualityReport mean_report(const std::vector<QualityReport>& reports);

}  // namespace moire::metrics
