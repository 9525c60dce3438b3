#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace corescale {

/// Axis-aligned pixel rectangle. Applied to an image it must satisfy
/// x0 + w <= width and y0 + h <= height.
struct Rect {
    std::size_t x0 = 0;
    std::size_t y0 = 0;
    std::size_t w = 1;
    std::size_t h = 1;

    bool operator==(const Rect&) const = default;
};

/// Single-channel raster of finite doubles in row-major order.
///
/// Values are conventionally in [0, 1] as loaded from disk, but any finite
/// value is allowed (z-scored images are signed). The pixel buffer is fixed at
/// construction; operations return new images.
class GrayImage {
public:
    GrayImage(std::size_t width, std::size_t height, std::vector<double> pixels);
    /// Constant image.
    GrayImage(std::size_t width, std::size_t height, double value = 0.0);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return pixels_.size(); }

    double at(std::size_t x, std::size_t y) const noexcept { return pixels_[y * width_ + x]; }
    std::span<const double> pixels() const noexcept { return pixels_; }
    std::span<const double> row(std::size_t y) const noexcept {
        return std::span<const double>(pixels_).subspan(y * width_, width_);
    }

    /// Physical length per pixel in nanometres, when known.
    const std::optional<double>& pixel_pitch() const noexcept { return pixel_pitch_; }
    const std::string& source_tag() const noexcept { return source_tag_; }

    GrayImage& set_pixel_pitch(std::optional<double> pitch);
    GrayImage& set_source_tag(std::string tag);

    /// Pixel-exact equality; metadata is ignored.
    bool same_pixels(const GrayImage& other) const noexcept;

private:
    std::size_t width_;
    std::size_t height_;
    std::vector<double> pixels_;
    std::optional<double> pixel_pitch_;
    std::string source_tag_;
};

/// Sub-image at r. Throws Error("bounds") when r does not fit.
GrayImage crop(const GrayImage& img, const Rect& r);

double min_value(const GrayImage& img);
double max_value(const GrayImage& img);

}  // namespace corescale
