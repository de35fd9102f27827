#include <gtest/gtest.h>

#include <sstream>

#include "moire/config.hpp"
#include "moire/errors.hpp"

using namespace moire;

TEST(KeyValues, ParsesCommentsAndWhitespace) {
    std::istringstream in("# comment\n\n  lr = 0.001 \nnet.branches=1,5\n");
    const auto kv = parse_key_values(in);
    EXPECT_EQ(kv.size(), 2u);
    EXPECT_EQ(kv.at("lr"), "0.001");
    EXPECT_EQ(with_prefix(kv, "net.").at("branches"), "1,5");
}

TEST(KeyValues, RejectsMalformedLines) {
    std::istringstream no_eq("lr 0.1\n");
    EXPECT_THROW(parse_key_values(no_eq, "cfg"), ConfigError);
    std::istringstream dup("a=1\na=2\n");
    EXPECT_THROW(parse_key_values(dup), ConfigError);
}

TEST(KeyValues, TypedLookups) {
    const KeyValues kv{{"x", "2.5"}, {"n", "12"}, {"b", "yes"}, {"bad", "1.5x"}};
    EXPECT_EQ(kv_double(kv, "x", 0.0), 2.5);
    EXPECT_EQ(kv_size(kv, "n", 0), 12u);
    EXPECT_TRUE(kv_bool(kv, "b", false));
    EXPECT_EQ(kv_double(kv, "missing", 4.0), 4.0);
    EXPECT_THROW(kv_double(kv, "bad", 0.0), ConfigError);
    EXPECT_THROW(kv_size(kv, "x", 0), ConfigError);
    EXPECT_THROW(kv_bool(kv, "n", false), ConfigError);
}

TEST(KeyValues, WriteThenParseRoundTrips) {
    const KeyValues kv{{"a", "1"}, {"lr", format_double(1e-4)}};
    std::stringstream s;
    write_key_values(s, kv);
    EXPECT_EQ(parse_key_values(s), kv);
    EXPECT_EQ(std::stod(format_double(0.1)), 0.1);
}
