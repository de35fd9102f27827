#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "moire/adam.hpp"
#include "moire/errors.hpp"

using namespace moire;
using namespace moire::nn;

namespace {

std::vector<ParamRef<double>> refs(Tensor4<double>& a) { return {{"a", &a}}; }

}  // namespace

TEST(Adam, ZeroGradientAndDecayLeavesParametersUnchanged) {
    Tensor4<double> w(1, 1, 2, 2, 0.7);
    w.ensure_grad();
    AdamHyper h;
    h.weight_decay = 0.0;
    AdamState s;
    const auto r = refs(w);
    for (int i = 0; i < 3; ++i) adam_step<double>(r, s, h);
    for (double v : w.data()) EXPECT_EQ(v, 0.7);
    EXPECT_EQ(s.step, 3u);
}

TEST(Adam, ZeroLearningRateLeavesParametersUnchanged) {
    Tensor4<double> w(1, 1, 1, 3, 0.2);
    for (double& g : w.ensure_grad()) g = 1.5;
    AdamHyper h;
    h.lr = 0.0;
    AdamState s;
    adam_step<double>(refs(w), s, h);
    for (double v : w.data()) EXPECT_EQ(v, 0.2);
}

TEST(Adam, ScalarMatchesHandIteratedRecurrence) {
    const double g = 0.37, lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    Tensor4<double> w(1, 1, 1, 1, 1.25);
    w.ensure_grad()[0] = g;
    AdamHyper h{lr, b1, b2, eps, 0.0};
    AdamState s;
    double p = 1.25, m = 0.0, v = 0.0;
    for (int t = 1; t <= 10; ++t) {
        adam_step<double>(refs(w), s, h);
        m = b1 * m + (1 - b1) * g;
        v = b2 * v + (1 - b2) * g * g;
        const double mh = m / (1 - std::pow(b1, t));
        const double vh = v / (1 - std::pow(b2, t));
        p -= lr * mh / (std::sqrt(vh) + eps);
        EXPECT_NEAR(w[0], p, 1e-12) << "step " << t;
    }
}

TEST(Adam, WeightDecayIsCoupledIntoGradient) {
    // Zero data gradient: the effective gradient is d * w, so the first step moves by
    // lr * sign(w) (bias-corrected moments cancel the magnitude).
    const double d = 1e-2, lr = 1e-3;
    Tensor4<double> w(1, 1, 1, 2);
    w[0] = 0.5;
    w[1] = -2.0;
    w.ensure_grad();
    AdamHyper h{lr, 0.9, 0.999, 1e-8, d};
    AdamState s;
    adam_step<double>(refs(w), s, h);
    EXPECT_NEAR(s.m[0][0], 0.1 * d * 0.5, 1e-15);
    EXPECT_NEAR(s.m[0][1], 0.1 * d * -2.0, 1e-15);
    EXPECT_NEAR(w[0], 0.5 - lr * 0.005 / (0.005 + 1e-8), 1e-15);
    EXPECT_NEAR(w[1], -2.0 + lr * 0.02 / (0.02 + 1e-8), 1e-15);
}

TEST(Adam, NonFiniteGradientNamesBlockAndChangesNothing) {
    Tensor4<double> a(1, 1, 1, 2, 1.0), b(1, 1, 1, 2, 2.0);
    a.ensure_grad()[0] = 0.5;
    b.ensure_grad()[1] = std::nan("");
    std::vector<ParamRef<double>> r{{"branch1.out.weight", &a}, {"fusion.out.bias", &b}};
    AdamState s;
    try {
        adam_step<double>(r, s, AdamHyper{});
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("fusion.out.bias"), std::string::npos);
    }
    EXPECT_EQ(a[0], 1.0);
    EXPECT_EQ(b[0], 2.0);
    EXPECT_EQ(s.step, 0u);
}

TEST(Adam, FloatParametersKeepDoubleMoments) {
    Tensor4<float> w(1, 1, 1, 1, 1.0f);
    w.ensure_grad()[0] = 0.25f;
    AdamState s;
    std::vector<ParamRef<float>> r{{"w", &w}};
    adam_step<float>(r, s, AdamHyper{1e-3, 0.9, 0.999, 1e-8, 0.0});
    EXPECT_NEAR(w[0], 1.0f - 1e-3f, 1e-6);
    EXPECT_NEAR(s.m[0][0], 0.025, 1e-12);
}
