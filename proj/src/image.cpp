#include "corescale/image.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "corescale/error.hpp"

namespace corescale {

GrayImage::GrayImage(std::size_t width, std::size_t height, std::vector<double> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width_ == 0 || height_ == 0) {
        throw Error("dims", "image dimensions must be at least 1x1");
    }
    if (pixels_.size() != width_ * height_) {
        throw Error("dims", "pixel count " + std::to_string(pixels_.size()) + " does not match " +
                                std::to_string(width_) + "x" + std::to_string(height_));
    }
    if (!std::all_of(pixels_.begin(), pixels_.end(), [](double v) { return std::isfinite(v); })) {
        throw Error("nonfinite", "image contains NaN or infinite pixels");
    }
}

GrayImage::GrayImage(std::size_t width, std::size_t height, double value)
    : GrayImage(width, height, std::vector<double>(width * height, value)) {}

GrayImage& GrayImage::set_pixel_pitch(std::optional<double> pitch) {
    pixel_pitch_ = pitch;
    return *this;
}

GrayImage& GrayImage::set_source_tag(std::string tag) {
    source_tag_ = std::move(tag);
    return *this;
}

bool GrayImage::same_pixels(const GrayImage& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && pixels_ == other.pixels_;
}

GrayImage crop(const GrayImage& img, const Rect& r) {
    if (r.w == 0 || r.h == 0 || r.x0 + r.w > img.width() || r.y0 + r.h > img.height()) {
        throw Error("bounds", "crop rect (" + std::to_string(r.x0) + "," + std::to_string(r.y0) +
                                  "," + std::to_string(r.w) + "," + std::to_string(r.h) +
                                  ") exceeds image " + std::to_string(img.width()) + "x" +
                                  std::to_string(img.height()));
    }
    std::vector<double> out;
    out.reserve(r.w * r.h);
    for (std::size_t y = 0; y < r.h; ++y) {
        auto src = img.row(r.y0 + y).subspan(r.x0, r.w);
        out.insert(out.end(), src.begin(), src.end());
    }
    GrayImage result(r.w, r.h, std::move(out));
    result.set_pixel_pitch(img.pixel_pitch());
    result.set_source_tag(img.source_tag());
    return result;
}

double min_value(const GrayImage& img) {
    auto px = img.pixels();
    return *std::min_element(px.begin(), px.end());
}

double max_value(const GrayImage& img) {
    auto px = img.pixels();
    return *std::max_element(px.begin(), px.end());
}

}  // namespace corescale
