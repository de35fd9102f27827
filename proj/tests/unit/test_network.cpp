#include <gtest/gtest.h>

#include <cmath>

#include "moire/errors.hpp"
#include "moire/network.hpp"
#include "test_support.hpp"

using namespace moire;
using namespace moire::nn;
using moire::test::dot;
using moire::test::random_tensor;

namespace {

NetworkConfig tiny_config() {
    NetworkConfig c;
    c.branches = {1, 2};
    c.cascade_depth = 1;
    c.cascade_channels = 4;
    c.base_channels = 4;
    return c;
}

// Checks every parameter gradient of <fused, G> against central differences.
void check_gradients(const NetworkConfig& config, Dims input_dims, double init_std, std::uint64_t seed) {
    auto net = build_network<double>(config, seed, init_std);
    for (auto& p : net.parameters())
        for (double& b : p.tensor->data())
            if (p.name.ends_with(".bias")) b = 0.05;
    const auto x = random_tensor<double>(input_dims, seed + 1, 0.0, 1.0);
    const auto fwd = forward(net, x);
    const auto g = random_tensor<double>(fwd.outputs.fused.dims(), seed + 2);
    net.zero_grad();
    backward(net, fwd, g);
    auto loss = [&] { return dot(infer(net, x).fused, g); };
    const double eps = 1e-5;
    std::size_t checked = 0, nonzero = 0;
    for (auto& p : net.parameters()) {
        auto w = p.tensor->data();
        const auto grad = p.tensor->grad();
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double saved = w[i];
            w[i] = saved + eps;
            const double up = loss();
            w[i] = saved - eps;
            const double down = loss();
            w[i] = saved;
            const double fd = (up - down) / (2 * eps);
            const double scale = std::max({std::abs(fd), std::abs(grad[i]), 1e-3});
            ASSERT_LT(std::abs(fd - grad[i]) / scale, 1e-5) << p.name << "[" << i << "] fd " << fd << " analytic "
                                                             << grad[i];
            ++checked;
            nonzero += grad[i] != 0.0;
        }
    }
    EXPECT_EQ(checked, param_count(config));
    EXPECT_GT(nonzero, checked / 2);
}

}  // namespace

TEST(NetworkConfig, VariantsParseAndRoundTrip) {
    for (Variant v : all_variants()) {
        EXPECT_EQ(parse_variant(variant_name(v)), v);
        const auto c = NetworkConfig::for_variant(v);
        EXPECT_EQ(NetworkConfig::from_kv(c.to_kv()), c);
    }
    EXPECT_EQ(parse_variant("default"), Variant::standard);
    EXPECT_THROW(parse_variant("v_b99"), ConfigError);
}

TEST(NetworkConfig, RejectsMissingBranchOne) {
    NetworkConfig c;
    c.branches = {2, 3};
    EXPECT_THROW(c.validate(), ConfigError);
    EXPECT_THROW(build_network<float>(c, 1), ConfigError);
    c.branches = {1, 6};
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(ParamCount, SingleConvLayer) {
    LayerSpec s{"probe", LayerKind::conv, 3, 32, 3, 1, 1, true};
    EXPECT_EQ(s.parameter_count(), 896u);
}

TEST(ParamCount, PublishedTotals) {
    const double standard = static_cast<double>(param_count(NetworkConfig::for_variant(Variant::standard)));
    const double b15 = static_cast<double>(param_count(NetworkConfig::for_variant(Variant::v_b15)));
    EXPECT_LT(std::abs(standard - 15.44e5) / 15.44e5, 0.02) << standard;
    EXPECT_LT(std::abs(b15 - 7.42e5) / 7.42e5, 0.02) << b15;
}

TEST(ParamCount, EqualsBuiltTotalAndIsSeedInvariant) {
    for (Variant v : all_variants()) {
        const auto c = NetworkConfig::for_variant(v);
        const auto a = build_network<float>(c, 1);
        const auto b = build_network<float>(c, 2);
        EXPECT_EQ(a.parameter_count(), param_count(c)) << variant_name(v);
        EXPECT_EQ(b.parameter_count(), param_count(c)) << variant_name(v);
    }
}

TEST(ParamCount, RemovingABranchDecreasesCount) {
    const NetworkConfig full;
    for (int k = 2; k <= 5; ++k) {
        NetworkConfig c = full;
        std::erase(c.branches, k);
        EXPECT_LT(param_count(c), param_count(full)) << "without branch " << k;
    }
}

TEST(BuildNetwork, LayerWidthsOfDefaultConfig) {
    const auto plan = plan_network(NetworkConfig{});
    ASSERT_EQ(plan.down.size(), 5u);
    EXPECT_EQ(plan.down[0][0].out_c, 32u);
    EXPECT_EQ(plan.down[0][1].out_c, 32u);
    EXPECT_EQ(plan.down[1][0].stride, 2u);
    EXPECT_EQ(plan.down[1][1].out_c, 64u);
    for (int s = 2; s < 5; ++s) {
        EXPECT_EQ(plan.down[s][0].stride, 2u);
        EXPECT_EQ(plan.down[s][0].out_c, 64u);
        EXPECT_EQ(plan.down[s][1].out_c, 64u);
    }
    ASSERT_EQ(plan.branches.size(), 5u);
    for (const auto& b : plan.branches) {
        EXPECT_EQ(b.cascade.size(), 5u);
        EXPECT_EQ(b.upsample.size(), static_cast<std::size_t>(b.index));  // i-1 deconvs + output conv
        EXPECT_EQ(b.upsample.back().out_c, 3u);
        EXPECT_FALSE(b.upsample.back().relu);
        for (std::size_t j = 0; j + 1 < b.upsample.size(); ++j) {
            EXPECT_EQ(b.upsample[j].kind, LayerKind::deconv);
            EXPECT_EQ(b.upsample[j].kernel, 4u);
        }
    }
    EXPECT_TRUE(plan.fusion.empty());
}

TEST(BuildNetwork, BranchOneAndFiveKeepIntermediateDownsampling) {
    const auto plan = plan_network(NetworkConfig::for_variant(Variant::v_b15));
    EXPECT_EQ(plan.down.size(), 5u);
    ASSERT_EQ(plan.branches.size(), 2u);
    EXPECT_EQ(plan.branches[0].index, 1);
    EXPECT_EQ(plan.branches[1].index, 5);
}

TEST(BuildNetwork, SeedControlsValuesNotShapes) {
    const auto c = tiny_config();
    auto a = build_network<double>(c, 1), b = build_network<double>(c, 2), a2 = build_network<double>(c, 1);
    const auto pa = a.parameters(), pb = b.parameters(), pa2 = a2.parameters();
    ASSERT_EQ(pa.size(), pb.size());
    bool differ = false;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        EXPECT_EQ(pa[i].name, pb[i].name);
        EXPECT_EQ(pa[i].tensor->dims(), pb[i].tensor->dims());
        EXPECT_TRUE(std::equal(pa[i].tensor->data().begin(), pa[i].tensor->data().end(),
                               pa2[i].tensor->data().begin()));
        differ |= !std::equal(pa[i].tensor->data().begin(), pa[i].tensor->data().end(),
                              pb[i].tensor->data().begin());
        if (pa[i].name.ends_with(".bias")) {
            for (double v : pa[i].tensor->data()) EXPECT_EQ(v, 0.0);
        }
    }
    EXPECT_TRUE(differ);
}

TEST(BuildNetwork, GaussianInitStatistics) {
    const auto net = build_network<double>(NetworkConfig{}, 3);
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (const auto* l : net.layers())
        for (double v : l->params.kernel.data()) {
            sum += v;
            sq += v * v;
            ++n;
        }
    const double mean = sum / n, sd = std::sqrt(sq / n - mean * mean);
    EXPECT_NEAR(mean, 0.0, 1e-4);
    EXPECT_NEAR(sd, 0.01, 1e-4);
}

TEST(BuildNetwork, IdentityInitStartsAsIdentity) {
    NetworkConfig c;
    c.cascade_channels = 8;
    c.base_channels = 4;
    const auto net = build_network<double>(c, 5, InitScheme::identity);
    const auto x = random_tensor<double>({1, 3, 32, 32}, 6, 0.0, 1.0);
    const auto out = infer(net, x);
    for (std::size_t i = 0; i < x.size(); ++i) ASSERT_NEAR(out.fused[i], x[i], 1e-12);
    EXPECT_EQ(parse_init_scheme(init_scheme_name(InitScheme::identity)), InitScheme::identity);
}

TEST(Forward, ShapeLaws) {
    NetworkConfig c;
    c.cascade_channels = 8;
    c.base_channels = 4;
    const auto net = build_network<float>(c, 1);
    for (std::size_t size : {std::size_t{256}, std::size_t{128}}) {
        const auto x = random_tensor<float>({1, 3, size, size}, 2, 0.0, 1.0);
        const auto r = forward(net, x);
        ASSERT_EQ(r.outputs.maps.size(), 5u);
        for (std::size_t b = 0; b < 5; ++b) {
            const std::size_t expect = size >> b;
            for (const auto& m : r.cache.cascade[b]) {
                EXPECT_EQ(m.dims().h, expect);
                EXPECT_EQ(m.dims().w, expect);
            }
            EXPECT_EQ(r.outputs.maps[b].dims(), x.dims());
        }
        EXPECT_EQ(r.outputs.fused.dims(), x.dims());
    }
}

TEST(Forward, SumFusionIsExactSumOfBranchMaps) {
    NetworkConfig c;
    c.cascade_channels = 8;
    c.base_channels = 4;
    const auto net = build_network<float>(c, 7, 0.2);
    const auto x = random_tensor<float>({2, 3, 32, 48}, 8, 0.0, 1.0);
    const auto out = infer(net, x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        float s = 0.0f;
        for (const auto& m : out.maps) s += m[i];
        ASSERT_EQ(out.fused[i], s);
    }
}

TEST(Forward, ZeroNetworkGivesZeroOutput) {
    const auto net = build_network<double>(tiny_config(), 1, 0.0);
    const auto out = infer(net, random_tensor<double>({1, 3, 8, 8}, 2, 0.0, 1.0));
    for (double v : out.fused.data()) EXPECT_EQ(v, 0.0);
}

TEST(Forward, IndivisibleInputThrowsWithDivisor) {
    const auto net = build_network<float>(NetworkConfig{}, 1);
    try {
        (void)infer(net, Tensor4<float>(1, 3, 40, 36));
        FAIL() << "expected ShapeError";
    } catch (const ShapeError& e) {
        EXPECT_NE(std::string(e.what()).find("16"), std::string::npos) << e.what();
    }
    EXPECT_THROW((void)infer(net, Tensor4<float>(1, 1, 32, 32)), ShapeError);
}

TEST(Forward, GrayscaleKeepsShapeLaws) {
    NetworkConfig c;
    c.input_channels = 1;
    c.cascade_channels = 8;
    c.base_channels = 4;
    const auto net = build_network<float>(c, 1);
    const auto r = forward(net, random_tensor<float>({1, 1, 64, 64}, 3, 0.0, 1.0));
    EXPECT_EQ(r.outputs.fused.dims(), (Dims{1, 1, 64, 64}));
    for (std::size_t b = 0; b < 5; ++b) EXPECT_EQ(r.cache.cascade[b][0].dims().h, std::size_t{64} >> b);
}

TEST(Backward, ZeroUpstreamGivesZeroGradients) {
    auto net = build_network<double>(tiny_config(), 1, 0.3);
    const auto x = random_tensor<double>({1, 3, 8, 8}, 2, 0.0, 1.0);
    const auto r = forward(net, x);
    net.zero_grad();
    backward(net, r, Tensor4<double>(r.outputs.fused.dims()));
    for (auto& p : net.parameters())
        for (double g : p.tensor->grad()) EXPECT_EQ(g, 0.0);
}

TEST(Backward, ShapeMismatchThrows) {
    auto net = build_network<double>(tiny_config(), 1);
    const auto r = forward(net, random_tensor<double>({1, 3, 8, 8}, 2));
    EXPECT_THROW(backward(net, r, Tensor4<double>(1, 3, 8, 4)), ShapeError);
}

TEST(Backward, TinyNetworkMatchesFiniteDifferences) { check_gradients(tiny_config(), {1, 3, 8, 8}, 0.3, 11); }

TEST(Backward, ConcatenateFusionMatchesFiniteDifferences) {
    auto c = tiny_config();
    c.fusion = Fusion::concatenate;
    check_gradients(c, {1, 3, 8, 8}, 0.3, 12);
}

TEST(Backward, InBranchSkipMatchesFiniteDifferences) {
    auto c = tiny_config();
    c.skip_in_branch = true;
    check_gradients(c, {1, 3, 8, 8}, 0.3, 13);
}

TEST(Backward, SparseBranchSetMatchesFiniteDifferences) {
    NetworkConfig c;
    c.branches = {1, 3};
    c.cascade_depth = 2;
    c.cascade_channels = 3;
    c.base_channels = 2;
    c.input_channels = 1;
    check_gradients(c, {2, 1, 8, 8}, 0.4, 14);
}

TEST(Backward, GradientsAccumulateAcrossCalls) {
    auto net = build_network<double>(tiny_config(), 1, 0.3);
    const auto x = random_tensor<double>({1, 3, 8, 8}, 2, 0.0, 1.0);
    const auto r = forward(net, x);
    const auto g = random_tensor<double>(r.outputs.fused.dims(), 3);
    net.zero_grad();
    backward(net, r, g);
    std::vector<double> once;
    for (auto& p : net.parameters()) once.insert(once.end(), p.tensor->grad().begin(), p.tensor->grad().end());
    backward(net, r, g);
    std::size_t i = 0;
    for (auto& p : net.parameters())
        for (double v : p.tensor->grad()) EXPECT_NEAR(v, 2.0 * once[i++], 1e-12);
}

TEST(NetworkCast, FloatCopyMatchesDoubleForward) {
    const auto d = build_network<double>(tiny_config(), 4, 0.3);
    const auto f = network_cast<float>(d);
    const auto x = random_tensor<double>({1, 3, 8, 8}, 5, 0.0, 1.0);
    const auto yd = infer(d, x).fused;
    const auto yf = infer(f, tensor_cast<float>(x)).fused;
    for (std::size_t i = 0; i < yd.size(); ++i) EXPECT_NEAR(yf[i], yd[i], 1e-5);
}
