#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "moire/checkpoint.hpp"
#include "moire/errors.hpp"
#include "moire/metrics.hpp"
#include "moire/trainer.hpp"
#include "test_support.hpp"

using namespace moire;
using namespace moire::train;
using moire::test::random_image;
using moire::test::random_tensor;

namespace {

nn::NetworkConfig tiny_net() {
    nn::NetworkConfig c;
    c.branches = {1, 2};
    c.cascade_depth = 1;
    c.cascade_channels = 4;
    c.base_channels = 4;
    return c;
}

DatasetPair make_pair(const std::string& id, std::size_t size, std::uint64_t seed) {
    DatasetPair p;
    p.id = id;
    p.reference = random_image(3, size, size, seed);
    p.contaminated = p.reference;
    for (std::size_t i = 0; i < p.contaminated.data().size(); ++i)
        p.contaminated.data()[i] = std::clamp(p.contaminated.data()[i] + 0.1 * std::sin(0.7 * static_cast<double>(i)), 0.0, 1.0);
    return p;
}

TrainConfig small_train(std::size_t patch) {
    TrainConfig c;
    c.patch_size = patch;
    c.batch_size = 2;
    c.lr = 1e-3;
    c.max_epochs = 3;
    c.seed = 5;
    return c;
}

}  // namespace

TEST(PatchLoss, IdenticalGivesZero) {
    const auto t = random_tensor<double>({2, 3, 4, 4}, 1);
    const auto l = l2_patch_loss(t, t);
    EXPECT_EQ(l.loss, 0.0);
    for (double g : l.grad.data()) EXPECT_EQ(g, 0.0);
}

TEST(PatchLoss, ScalarClosedForm) {
    nn::Tensor4<double> s(1, 1, 1, 1, 0.6), t(1, 1, 1, 1, 0.1);
    const auto l = l2_patch_loss(s, t);
    EXPECT_NEAR(l.loss, 0.25, 1e-15);
    EXPECT_NEAR(l.grad[0], 1.0, 1e-15);
}

TEST(PatchLoss, NormalizesByBatchOrPixels) {
    nn::Tensor4<double> s(4, 3, 2, 2, 1.0), t(4, 3, 2, 2, 0.0);
    EXPECT_DOUBLE_EQ(l2_patch_loss(s, t).loss, 12.0);
    EXPECT_DOUBLE_EQ(l2_patch_loss(s, t, true).loss, 1.0);
    EXPECT_THROW(l2_patch_loss(s, nn::Tensor4<double>(4, 3, 2, 3)), ShapeError);
}

TEST(PatchLoss, GradientMatchesFiniteDifferences) {
    auto s = random_tensor<double>({2, 3, 5, 5}, 2);
    const auto t = random_tensor<double>({2, 3, 5, 5}, 3);
    const auto l = l2_patch_loss(s, t);
    const double eps = 1e-6;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double saved = s[i];
        s[i] = saved + eps;
        const double up = l2_patch_loss(s, t).loss;
        s[i] = saved - eps;
        const double down = l2_patch_loss(s, t).loss;
        s[i] = saved;
        EXPECT_NEAR((up - down) / (2 * eps), l.grad[i], 1e-8);
    }
}

TEST(PatchLoss, InvariantUnderBatchPermutation) {
    const auto s = random_tensor<double>({4, 3, 6, 6}, 4);
    const auto t = random_tensor<double>({4, 3, 6, 6}, 5);
    nn::Tensor4<double> sp(s.dims()), tp(t.dims());
    const std::size_t order[] = {2, 0, 3, 1};
    const std::size_t per = 3 * 36;
    for (std::size_t n = 0; n < 4; ++n)
        for (std::size_t i = 0; i < per; ++i) {
            sp[n * per + i] = s[order[n] * per + i];
            tp[n * per + i] = t[order[n] * per + i];
        }
    EXPECT_NEAR(l2_patch_loss(s, t).loss, l2_patch_loss(sp, tp).loss, 1e-10);
}

TEST(SamplePatches, FullImageWhenExactlyPatchSized) {
    const auto pair = make_pair("a", 16, 1);
    std::mt19937_64 rng(3);
    const auto p = sample_patches(pair, 16, rng);
    ASSERT_TRUE(p);
    EXPECT_EQ(p->input, pair.contaminated);
    EXPECT_EQ(p->target, pair.reference);
}

TEST(SamplePatches, ReproducibleUnderSeed) {
    const auto pair = make_pair("a", 40, 2);
    std::mt19937_64 a(11), b(11);
    for (int i = 0; i < 5; ++i) {
        const auto pa = sample_patches(pair, 16, a), pb = sample_patches(pair, 16, b);
        EXPECT_EQ(pa->input, pb->input);
        EXPECT_EQ(pa->target, pb->target);
    }
}

TEST(SamplePatches, CropPreservesCorrespondence) {
    const auto pair = make_pair("a", 48, 3);
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        std::mt19937_64 probe = rng;
        const auto p = sample_patches(pair, 16, rng);
        const auto x0 = std::uniform_int_distribution<std::size_t>(0, 32)(probe);
        const auto y0 = std::uniform_int_distribution<std::size_t>(0, 32)(probe);
        double sse = 0.0;
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t y = y0; y < y0 + 16; ++y)
                for (std::size_t x = x0; x < x0 + 16; ++x) {
                    const double d = pair.contaminated.at(c, y, x) - pair.reference.at(c, y, x);
                    sse += d * d;
                }
        EXPECT_NEAR(metrics::psnr(p->input, p->target), metrics::psnr_from_mse(sse / (3 * 256)), 1e-9);
    }
}

TEST(SamplePatches, SkipsSmallPairsWithWarning) {
    const auto pair = make_pair("tiny", 8, 5);
    std::mt19937_64 rng(1);
    std::ostringstream warn;
    EXPECT_FALSE(sample_patches(pair, 16, rng, &warn));
    EXPECT_NE(warn.str().find("tiny"), std::string::npos);
}

TEST(PlateauSchedule, DecaysByFactorAfterPatience) {
    PlateauSchedule s(1e-4, 10.0, 3);
    EXPECT_FALSE(s.observe(1.0));
    EXPECT_FALSE(s.observe(1.0));
    EXPECT_FALSE(s.observe(1.0));
    EXPECT_TRUE(s.observe(1.0));
    EXPECT_DOUBLE_EQ(s.lr(), 1e-5);
    EXPECT_FALSE(s.observe(0.5));
    EXPECT_EQ(s.stale_epochs(), 0u);
}

TEST(TrainConfig, ValidateAndRoundTrip) {
    TrainConfig c;
    EXPECT_NO_THROW(c.validate(nn::NetworkConfig{}));
    c.patch_size = 100;
    EXPECT_THROW(c.validate(nn::NetworkConfig{}), ConfigError);
    c.patch_size = 64;
    c.batch_size = 0;
    EXPECT_THROW(c.validate(nn::NetworkConfig{}), ConfigError);
    c.batch_size = 3;
    c.lr = 2.5e-4;
    c.per_pixel_loss = true;
    const auto back = TrainConfig::from_kv(c.to_kv());
    EXPECT_EQ(back.to_kv(), c.to_kv());
}

TEST(TrainStep, ZeroLearningRateLeavesParametersUnchanged) {
    auto net = nn::build_network<double>(tiny_net(), 1, 0.2);
    const auto before = net;
    nn::AdamState state;
    nn::AdamHyper h;
    h.lr = 0.0;
    const auto x = random_tensor<double>({2, 3, 8, 8}, 2, 0.0, 1.0);
    const auto y = random_tensor<double>({2, 3, 8, 8}, 3, 0.0, 1.0);
    EXPECT_GT(train_step(net, state, h, x, y), 0.0);
    auto pa = net.parameters();
    auto pb = const_cast<nn::Network<double>&>(before).parameters();
    for (std::size_t i = 0; i < pa.size(); ++i)
        EXPECT_TRUE(std::equal(pa[i].tensor->data().begin(), pa[i].tensor->data().end(), pb[i].tensor->data().begin()));
}

TEST(Train, OverfitsSinglePair) {
    const DatasetPair pair = make_pair("only", 16, 7);
    const std::vector<DatasetPair> set{pair};
    TrainConfig c = small_train(16);
    c.batch_size = 1;
    c.max_epochs = 200;
    c.plateau_patience = 1000;
    auto net = nn::build_network<double>(tiny_net(), 3, nn::InitScheme::fan_in);
    const auto r = train<double>(net, set, {}, c);
    ASSERT_EQ(r.history.size(), 200u);
    EXPECT_EQ(r.steps, 200u);
    EXPECT_LT(r.history.back().train_loss, 0.5 * r.history.front().train_loss);
}

TEST(Train, FrozenValidationDecaysLearningRate) {
    const std::vector<DatasetPair> tr{make_pair("t1", 16, 1), make_pair("t2", 16, 2)};
    const std::vector<DatasetPair> va{make_pair("v1", 16, 3)};
    TrainConfig c = small_train(16);
    c.max_epochs = 9;
    c.lr = 1e-4;
    TrainHooks hooks;
    hooks.validation_override = [](std::size_t, double) { return 1.0; };
    const auto r = train<float>(nn::build_network<float>(tiny_net(), 1), tr, va, c, hooks);
    ASSERT_EQ(r.history.size(), 9u);
    for (std::size_t e = 0; e < 4; ++e) EXPECT_DOUBLE_EQ(r.history[e].lr, 1e-4) << e;
    for (std::size_t e = 4; e < 7; ++e) EXPECT_DOUBLE_EQ(r.history[e].lr, 1e-5) << e;
    for (std::size_t e = 7; e < 9; ++e) EXPECT_DOUBLE_EQ(r.history[e].lr, 1e-6) << e;
    EXPECT_EQ(r.best_epoch, 1u);
}

TEST(Train, StopsBelowMinimumLearningRate) {
    const std::vector<DatasetPair> tr{make_pair("t1", 16, 1)};
    TrainConfig c = small_train(16);
    c.lr = 5e-7;
    c.plateau_patience = 1;
    c.max_epochs = 50;
    TrainHooks hooks;
    hooks.validation_override = [](std::size_t, double) { return 1.0; };
    const auto r = train<float>(nn::build_network<float>(tiny_net(), 1), tr, {}, c, hooks);
    EXPECT_EQ(r.history.size(), 2u);
    EXPECT_EQ(r.stop_reason, "learning rate below minimum");
}

TEST(Train, DeterministicUnderFixedSeed) {
    const std::vector<DatasetPair> tr{make_pair("t1", 24, 1), make_pair("t2", 24, 2), make_pair("t3", 24, 3)};
    const std::vector<DatasetPair> va{make_pair("v1", 24, 4)};
    const TrainConfig c = small_train(16);
    const auto net = nn::build_network<float>(tiny_net(), 9, nn::InitScheme::fan_in);
    const auto a = train<float>(net, tr, va, c), b = train<float>(net, tr, va, c);
    ASSERT_EQ(a.history.size(), b.history.size());
    for (std::size_t e = 0; e < a.history.size(); ++e) EXPECT_EQ(a.history[e].train_loss, b.history[e].train_loss);
    std::stringstream sa, sb;
    nn::save_checkpoint(a.best, sa);
    nn::save_checkpoint(b.best, sb);
    EXPECT_EQ(sa.str(), sb.str());
}

TEST(Train, RejectsEmptyOrOverlappingSets) {
    const std::vector<DatasetPair> tr{make_pair("same", 16, 1)};
    const TrainConfig c = small_train(16);
    const auto net = nn::build_network<float>(tiny_net(), 1);
    EXPECT_THROW(train<float>(net, {}, {}, c), DataError);
    EXPECT_THROW(train<float>(net, tr, tr, c), DataError);
}

TEST(Train, DivergenceDumpsLastGoodCheckpoint) {
    std::vector<DatasetPair> tr{make_pair("t1", 16, 1)};
    tr[0].contaminated.data()[5] = std::numeric_limits<double>::quiet_NaN();
    const auto dir = moire::test::scratch_dir("divergence");
    TrainHooks hooks;
    hooks.checkpoint = dir / "model.ckpt";
    const auto net = nn::build_network<float>(tiny_net(), 1);
    EXPECT_THROW(train<float>(net, tr, {}, small_train(16), hooks), NumericalError);
    ASSERT_TRUE(std::filesystem::exists(dir / "model.ckpt.last_good"));
    const auto ck = nn::load_checkpoint<float>(dir / "model.ckpt.last_good");
    EXPECT_EQ(ck.meta.at("status"), "last_good");
}

TEST(Train, WritesBestCheckpointAndLog) {
    const std::vector<DatasetPair> tr{make_pair("t1", 16, 1), make_pair("t2", 16, 2)};
    const std::vector<DatasetPair> va{make_pair("v1", 16, 3)};
    const auto dir = moire::test::scratch_dir("train_outputs");
    std::ostringstream log;
    TrainHooks hooks;
    hooks.checkpoint = dir / "model.ckpt";
    hooks.log = &log;
    std::size_t calls = 0;
    hooks.on_epoch = [&](const LossReport& r) {
        ++calls;
        EXPECT_TRUE(std::isfinite(r.train_loss));
        EXPECT_GE(r.val_loss, 0.0);
    };
    const auto r = train<float>(nn::build_network<float>(tiny_net(), 1), tr, va, small_train(16), hooks);
    EXPECT_EQ(calls, 3u);
    EXPECT_NE(log.str().find("epoch=3 "), std::string::npos);
    const auto ck = nn::load_checkpoint<float>(dir / "model.ckpt");
    EXPECT_EQ(ck.meta.at("epoch"), std::to_string(r.best_epoch));
}
