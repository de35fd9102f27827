#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "moire/errors.hpp"
#include "moire/tensor.hpp"

using namespace moire;
using namespace moire::nn;

TEST(Tensor, SizeMatchesDims) {
    Tensor4<float> t(2, 3, 4, 5);
    EXPECT_EQ(t.size(), 120u);
    EXPECT_EQ(t.dims().plane(), 20u);
    EXPECT_FALSE(t.has_grad());
    t.ensure_grad();
    EXPECT_EQ(t.grad().size(), t.size());
}

TEST(Tensor, RowMajorIndexing) {
    Tensor4<double> t(2, 3, 4, 5);
    t(1, 2, 3, 4) = 7.0;
    EXPECT_EQ(t.index(1, 2, 3, 4), 119u);
    EXPECT_EQ(t[119], 7.0);
    EXPECT_EQ(t.plane(1, 2)[19], 7.0);
}

TEST(Tensor, RequireSameDimsNamesAxis) {
    try {
        require_same_dims({1, 3, 8, 8}, {1, 3, 8, 9}, "probe");
        FAIL() << "expected ShapeError";
    } catch (const ShapeError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("probe"), std::string::npos);
        EXPECT_NE(msg.find("width"), std::string::npos) << msg;
    }
    EXPECT_NO_THROW(require_same_dims({1, 2, 3, 4}, {1, 2, 3, 4}, "ok"));
}

TEST(Tensor, AllFiniteDetectsNanInDataAndGrad) {
    Tensor4<float> t(1, 1, 2, 2, 1.0f);
    EXPECT_TRUE(t.all_finite());
    t.ensure_grad()[3] = std::numeric_limits<float>::infinity();
    EXPECT_FALSE(t.all_finite());
    t.zero_grad();
    t[0] = std::nanf("");
    EXPECT_FALSE(t.all_finite());
}

TEST(Tensor, CastPreservesValues) {
    Tensor4<double> d(1, 2, 2, 2);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = 0.25 * static_cast<double>(i);
    const auto f = tensor_cast<float>(d);
    EXPECT_EQ(f.dims(), d.dims());
    for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(static_cast<double>(f[i]), d[i]);
}
