#include <gtest/gtest.h>

#include <fstream>

#include "moire/errors.hpp"
#include "moire/image_io.hpp"
#include "test_support.hpp"

using namespace moire;
using moire::test::random_image;

TEST(Image, CropAndPadReplicate) {
    const auto a = random_image(2, 5, 7, 1);
    const auto c = crop(a, 2, 1, 3, 4);
    EXPECT_EQ(c.at(1, 0, 0), a.at(1, 1, 2));
    EXPECT_EQ(c.at(0, 3, 2), a.at(0, 4, 4));
    EXPECT_THROW(crop(a, 5, 0, 3, 1), ShapeError);
    const auto p = pad_replicate(a, 8, 9);
    EXPECT_EQ(p.height(), 8u);
    EXPECT_EQ(p.width(), 9u);
    EXPECT_EQ(p.at(1, 7, 8), a.at(1, 4, 6));
    EXPECT_EQ(p.at(0, 2, 8), a.at(0, 2, 6));
    EXPECT_EQ(crop(p, 0, 0, 7, 5), a);
}

TEST(Image, ChannelConversion) {
    const auto g = random_image(1, 3, 3, 2);
    const auto rgb = convert_channels(g, 3);
    EXPECT_EQ(rgb.channels(), 3u);
    EXPECT_EQ(rgb.at(2, 1, 1), g.at(0, 1, 1));
    const auto back = convert_channels(rgb, 1);
    for (std::size_t i = 0; i < g.data().size(); ++i) EXPECT_NEAR(back.data()[i], g.data()[i], 1e-15);
    EXPECT_THROW(convert_channels(random_image(2, 2, 2, 3), 3), ShapeError);
}

TEST(Image, TensorBridge) {
    const auto a = random_image(3, 4, 5, 3), b = random_image(3, 4, 5, 4);
    const std::vector<Image> imgs{a, b};
    const auto t = to_batch<double>(imgs);
    EXPECT_EQ(t.dims(), (nn::Dims{2, 3, 4, 5}));
    EXPECT_EQ(from_tensor(t, 1), b);
    EXPECT_EQ(from_tensor(to_tensor<double>(a)), a);
    const std::vector<Image> mixed{a, random_image(3, 4, 6, 5)};
    EXPECT_THROW(to_batch<double>(mixed), ShapeError);
}

TEST(ImageIo, PngAndPnmRoundTripQuantized) {
    const auto dir = moire::test::scratch_dir("image_io");
    const auto rgb = random_image(3, 6, 9, 5), grey = random_image(1, 7, 4, 6);
    for (const char* name : {"a.png", "a.ppm"}) {
        io::write_image(rgb, dir / name);
        const auto back = io::read_image(dir / name);
        EXPECT_EQ(back, io::quantize8(rgb)) << name;
    }
    for (const char* name : {"g.png", "g.pgm"}) {
        io::write_image(grey, dir / name);
        const auto back = io::read_image(dir / name);
        EXPECT_EQ(back.channels(), 1u);
        EXPECT_EQ(back, io::quantize8(grey)) << name;
    }
    for (double v : io::quantize8(rgb).data()) EXPECT_NEAR(v * 255.0, std::round(v * 255.0), 1e-9);
}

TEST(ImageIo, AsciiPnm) {
    const auto dir = moire::test::scratch_dir("image_ascii");
    std::ofstream(dir / "a.ppm") << "P3\n# comment\n2 1\n255\n255 0 0  0 0 255\n";
    const auto img = io::read_image(dir / "a.ppm");
    EXPECT_EQ(img.channels(), 3u);
    EXPECT_EQ(img.at(0, 0, 0), 1.0);
    EXPECT_EQ(img.at(2, 0, 1), 1.0);
    EXPECT_EQ(img.at(1, 0, 1), 0.0);
}

TEST(ImageIo, ErrorsAreDataErrors) {
    const auto dir = moire::test::scratch_dir("image_err");
    EXPECT_THROW(io::read_image(dir / "missing.png"), DataError);
    std::ofstream(dir / "junk.png") << "not an image";
    EXPECT_THROW(io::read_image(dir / "junk.png"), DataError);
    EXPECT_THROW(io::write_image(Image(3, 2, 2), dir / "x.bmp"), DataError);
}
