#include <gtest/gtest.h>

#include <cmath>

#include "moire/errors.hpp"
#include "moire/metrics.hpp"
#include "test_support.hpp"

using namespace moire;
using namespace moire::metrics;
using moire::test::random_image;

namespace {

// Windowed SSIM straight from the definition with an explicit 2-D Gaussian weight table.
double reference_ssim(const Image& a, const Image& b) {
    const int k = 11;
    double w[k][k], norm = 0.0;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            w[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * 1.5 * 1.5));
            norm += w[i][j];
        }
    const double c1 = 1e-4, c2 = 9e-4;
    double total = 0.0;
    for (std::size_t c = 0; c < a.channels(); ++c) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t y0 = 0; y0 + k <= a.height(); ++y0)
            for (std::size_t x0 = 0; x0 + k <= a.width(); ++x0) {
                double mx = 0, my = 0;
                for (int i = 0; i < k; ++i)
                    for (int j = 0; j < k; ++j) {
                        mx += w[i][j] / norm * a.at(c, y0 + i, x0 + j);
                        my += w[i][j] / norm * b.at(c, y0 + i, x0 + j);
                    }
                double vx = 0, vy = 0, cv = 0;
                for (int i = 0; i < k; ++i)
                    for (int j = 0; j < k; ++j) {
                        const double dx = a.at(c, y0 + i, x0 + j) - mx, dy = b.at(c, y0 + i, x0 + j) - my;
                        vx += w[i][j] / norm * dx * dx;
                        vy += w[i][j] / norm * dy * dy;
                        cv += w[i][j] / norm * dx * dy;
                    }
                sum += ((2 * mx * my + c1) * (2 * cv + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
                ++count;
            }
        total += sum / static_cast<double>(count);
    }
    return total / static_cast<double>(a.channels());
}

}  // namespace

TEST(Psnr, IdenticalImagesReportCap) {
    const auto a = random_image(3, 8, 8, 1);
    EXPECT_EQ(psnr(a, a), kPsnrCap);
    EXPECT_EQ(psnr(a, a), 99.0);
}

TEST(Psnr, ConstantOffsetClosedForm) {
    const Image a(3, 16, 16, 0.5), b(3, 16, 16, 0.6);
    EXPECT_NEAR(mean_error(a, b), 0.01, 1e-15);
    EXPECT_NEAR(psnr(a, b), 20.0, 1e-12);
}

TEST(Psnr, MatchesDirectComputation) {
    const auto a = random_image(3, 13, 17, 2), b = random_image(3, 13, 17, 3);
    double sse = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) sse += std::pow(a.data()[i] - b.data()[i], 2);
    EXPECT_NEAR(psnr(a, b), 10.0 * std::log10(1.0 / (sse / a.data().size())), 1e-9);
}

TEST(Psnr, SymmetricShiftInvariantAndMonotone) {
    const auto a = random_image(1, 12, 12, 4, 0.2, 0.6), b = random_image(1, 12, 12, 5, 0.2, 0.6);
    EXPECT_EQ(psnr(a, b), psnr(b, a));
    Image as = a, bs = b;
    for (double& v : as.data()) v += 0.3;
    for (double& v : bs.data()) v += 0.3;
    EXPECT_NEAR(psnr(a, b), psnr(as, bs), 1e-9);
    EXPECT_GT(psnr_from_mse(0.001), psnr_from_mse(0.002));
    EXPECT_THROW(psnr(a, Image(1, 12, 11)), ShapeError);
}

TEST(MeanError, ClosedFormsAndPsnrIdentity) {
    const auto a = random_image(3, 9, 9, 6);
    EXPECT_EQ(mean_error(a, a), 0.0);
    EXPECT_EQ(mean_error(Image(3, 4, 4, 0.0), Image(3, 4, 4, 1.0)), 1.0);
    const auto b = random_image(3, 9, 9, 7);
    EXPECT_NEAR(mean_error(a, b), std::pow(10.0, -psnr(a, b) / 10.0), 1e-15);
}

TEST(Ssim, SelfSimilarityIsOne) {
    const auto a = random_image(3, 24, 20, 8);
    EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
}

TEST(Ssim, MatchesWindowedDefinition) {
    const auto a = random_image(3, 16, 19, 9), b = random_image(3, 16, 19, 10);
    EXPECT_NEAR(ssim(a, b), reference_ssim(a, b), 1e-10);
    Image c = a;
    for (double& v : c.data()) v = 0.8 * v + 0.05;
    EXPECT_NEAR(ssim(a, c), reference_ssim(a, c), 1e-10);
}

TEST(Ssim, SymmetricAndBounded) {
    const auto a = random_image(1, 20, 20, 11), b = random_image(1, 20, 20, 12);
    EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-12);
    EXPECT_LT(ssim(a, b), 1.0);
    EXPECT_GT(ssim(a, b), -1.0);
}

TEST(Ssim, InvertedImageScoresLow) {
    Image a(1, 32, 32);
    for (std::size_t y = 0; y < 32; ++y)
        for (std::size_t x = 0; x < 32; ++x) a.at(0, y, x) = 0.5 + 0.25 * std::sin(0.4 * x) * std::cos(0.3 * y);
    Image inv = a;
    for (double& v : inv.data()) v = 1.0 - v;
    EXPECT_LT(ssim(a, inv), 0.2);
}

TEST(Ssim, RejectsImagesSmallerThanWindow) {
    EXPECT_THROW(ssim(Image(1, 10, 30), Image(1, 10, 30)), ShapeError);
}

TEST(Report, EvaluateAndMean) {
    const Image a(3, 16, 16, 0.5), b(3, 16, 16, 0.6);
    const auto r = evaluate(b, a);
    EXPECT_NEAR(r.psnr, 20.0, 1e-12);
    EXPECT_NEAR(r.mse, 0.01, 1e-15);
    const auto m = mean_report({r, QualityReport{30.0, 0.5, 0.001}});
    EXPECT_NEAR(m.psnr, 25.0, 1e-12);
    EXPECT_NEAR(m.mse, 0.0055, 1e-15);
}
