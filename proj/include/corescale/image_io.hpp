#pragma once

#include <filesystem>

#include "corescale/image.hpp"

namespace corescale {

/// Reads a PGM (P2/P5) or single-channel 8/16-bit PNG and scales samples to
/// [0, 1] by the format maximum. The source_tag is set to the path.
GrayImage load_image(const std::filesystem::path& path);

/// Writes img as PGM (P5) or PNG, chosen by extension. Pixels are clamped to
/// [0, 1] and quantized round-half-up to 2^bit_depth - 1 levels.
void save_image(const GrayImage& img, const std::filesystem::path& path, int bit_depth = 8);

/// Quantized sample value for one pixel, as save_image stores it.
unsigned quantize_sample(double value, unsigned max_level) noexcept;

}  // namespace corescale
