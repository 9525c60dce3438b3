#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "corescale/image.hpp"
#include "corescale/resample.hpp"

namespace corescale {

/// Correlation score for every placement of a template inside a search image.
/// Placements whose denominator vanishes are marked invalid and hold 0.
struct NccMap {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> values;
    std::vector<std::uint8_t> valid;

    double at(std::size_t x, std::size_t y) const noexcept { return values[y * width + x]; }
    bool is_valid(std::size_t x, std::size_t y) const noexcept { return valid[y * width + x] != 0; }
};

/// Normalized cross-correlation at every offset,
///   sum T(x',y') I(x+x',y+y') / sqrt(sum T^2 * sum I^2),
/// or, with zero_mean, the same with both windows mean-subtracted.
/// Throws Error("zero_template_energy") for a template with no energy.
NccMap ncc_map(const GrayImage& tmpl, const GrayImage& search, bool zero_mean = false);

struct PeakLocation {
    std::size_t x = 0;
    std::size_t y = 0;
    double score = 0.0;
    bool found = false;
};

/// Highest valid entry; ties go to the first in raster order.
PeakLocation find_peak(const NccMap& map);

struct PairAlignment {
    std::size_t offset_x = 0;
    std::size_t offset_y = 0;
    double score = 0.0;
    Rect hr_rect;
    Rect lr_rect;
    std::size_t factor = 1;
};

struct PairingOptions {
    /// Side fraction of the coarsened image used as a central template; 1 uses
    /// the whole coarsened image.
    double template_fraction = 1.0;
    double score_floor = 0.5;
    bool zero_mean = false;
};

/// Coarsens hr to the LR pitch, locates the central template inside lr and
/// returns matching rectangles in both images. Throws Error("pairing_failed")
/// when the peak score is below the floor.
PairAlignment pair_images(const GrayImage& hr, const GrayImage& lr, std::size_t factor,
                          const ResampleMethod& method, const PairingOptions& options = {});

namespace serial {
NccMap ncc_map(const GrayImage& tmpl, const GrayImage& search, bool zero_mean = false);
}

}  // namespace corescale
