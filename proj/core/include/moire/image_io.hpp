#pragma once

#include <filesystem>

#include "moire/image.hpp"

namespace moire::io {

/// Reads 8-bit PNG (grey, grey+alpha, RGB, RGBA) or PPM/PGM (P2, P3, P5, P6) into [0, 1].
/// Alpha is discarded; greyscale stays single-channel. Throws DataError.
Image read_image(const std::filesystem::path& path);

/// Writes an 8-bit PNG, binary PPM (.ppm) or PGM (.pgm) depending on the extension.
/// Values are clamped to [0, 1] and rounded to the nearest of 256 levels.
void write_image(const Image& img, const std::filesystem::path& path);

/// The 8-bit quantisation applied by write_image, returned as an image.
Image quantize8(const Image& img);

}  // namespace moire::io
