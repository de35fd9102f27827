#include "moire/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "moire/errors.hpp"

namespace moire::io {
namespace {

std::string lower_ext(const std::filesystem::path& p) {
    std::string ext = p.extension().string();
    std::ranges::transform(ext, ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

std::uint8_t to_byte(double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

Image from_interleaved(const std::vector<std::uint8_t>& px, std::size_t channels, std::size_t h,
                       std::size_t w, double maxval = 255.0) {
    Image img(channels, h, w);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t c = 0; c < channels; ++c)
                img.at(c, y, x) = px[(y * w + x) * channels + c] / maxval;
    return img;
}

std::vector<std::uint8_t> to_interleaved(const Image& img) {
    std::vector<std::uint8_t> px(img.data().size());
    const std::size_t ch = img.channels();
    for (std::size_t y = 0; y < img.height(); ++y)
        for (std::size_t x = 0; x < img.width(); ++x)
            for (std::size_t c = 0; c < ch; ++c)
                px[(y * img.width() + x) * ch + c] = to_byte(img.at(c, y, x));
    return px;
}

Image read_png(const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str()))
        throw DataError("cannot read PNG '" + path.string() + "': " + image.message);
    const bool grey = (image.format & PNG_FORMAT_FLAG_COLOR) == 0;
    image.format = grey ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    std::vector<std::uint8_t> px(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, px.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw DataError("cannot decode PNG '" + path.string() + "': " + msg);
    }
    return from_interleaved(px, grey ? 1 : 3, image.height, image.width);
}

void write_png(const Image& img, const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = img.channels() == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    const auto px = to_interleaved(img);
    if (!png_image_write_to_file(&image, path.c_str(), 0, px.data(), 0, nullptr))
        throw DataError("cannot write PNG '" + path.string() + "': " + image.message);
}

// Reads the next whitespace-separated header token, skipping '#' comments.
std::string pnm_token(std::istream& in) {
    std::string tok;
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {}
            continue;
        }
        if (std::isspace(ch)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(ch));
    }
    return tok;
}

Image read_pnm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    const std::string magic = pnm_token(in);
    if (magic != "P2" && magic != "P3" && magic != "P5" && magic != "P6")
        throw DataError("'" + path.string() + "' is not a PGM/PPM file");
    std::size_t w = 0, h = 0, maxval = 0;
    try {
        w = std::stoul(pnm_token(in));
        h = std::stoul(pnm_token(in));
        maxval = std::stoul(pnm_token(in));
    } catch (const std::exception&) {
        throw DataError("malformed PNM header in '" + path.string() + "'");
    }
    if (maxval == 0 || maxval > 255)
        throw DataError("'" + path.string() + "': only 8-bit PNM is supported");
    const std::size_t channels = (magic == "P3" || magic == "P6") ? 3 : 1;
    std::vector<std::uint8_t> px(w * h * channels);
    if (magic == "P5" || magic == "P6") {
        in.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size()));
        if (static_cast<std::size_t>(in.gcount()) != px.size())
            throw DataError("truncated PNM data in '" + path.string() + "'");
    } else {
        for (auto& v : px) {
            const std::string tok = pnm_token(in);
            if (tok.empty()) throw DataError("truncated PNM data in '" + path.string() + "'");
            v = static_cast<std::uint8_t>(std::stoul(tok));
        }
    }
    return from_interleaved(px, channels, h, w, static_cast<double>(maxval));
}

void write_pnm(const Image& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    out << (img.channels() == 1 ? "P5" : "P6") << '\n'
        << img.width() << ' ' << img.height() << "\n255\n";
    const auto px = to_interleaved(img);
    out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
    const std::string ext = lower_ext(path);
    if (ext == ".png") return read_png(path);
    if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") return read_pnm(path);
    throw DataError("unsupported image extension '" + ext + "' for '" + path.string() + "'");
}

void write_image(const Image& img, const std::filesystem::path& path) {
    if (img.channels() != 1 && img.channels() != 3)
        throw ShapeError("write_image: only 1- or 3-channel images can be written");
    const std::string ext = lower_ext(path);
    if (ext == ".png") write_png(img, path);
    else if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") {
        if (ext == ".pgm" && img.channels() != 1) write_pnm(luminance(img), path);
        else if (ext == ".ppm" && img.channels() != 3) write_pnm(convert_channels(img, 3), path);
        else write_pnm(img, path);
    } else {
        throw DataError("unsupported image extension '" + ext + "' for '" + path.string() + "'");
    }
}

Image quantize8(const Image& img) {
    Image out = img;
    for (double& v : out.data()) v = to_byte(v) / 255.0;
    return out;
}

}  // namespace moire::io
