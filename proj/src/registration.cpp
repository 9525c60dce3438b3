#include "corescale/registration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "corescale/error.hpp"

namespace corescale {
namespace {

struct Template {
    std::vector<double> values;  // mean-subtracted when zero_mean
    double energy = 0.0;
};

Template prepare_template(const GrayImage& tmpl, const GrayImage& search, bool zero_mean) {
    if (tmpl.width() > search.width() || tmpl.height() > search.height()) {
        throw Error("template_too_large", "template " + std::to_string(tmpl.width()) + "x" +
                                              std::to_string(tmpl.height()) + " larger than search image " +
                                              std::to_string(search.width()) + "x" +
                                              std::to_string(search.height()));
    }
    Template t;
    t.values.assign(tmpl.pixels().begin(), tmpl.pixels().end());
    const double raw_energy = std::inner_product(t.values.begin(), t.values.end(), t.values.begin(), 0.0);
    if (zero_mean) {
        const double mean = std::accumulate(t.values.begin(), t.values.end(), 0.0) / static_cast<double>(t.values.size());
        for (auto& v : t.values) v -= mean;
    }
    t.energy = std::inner_product(t.values.begin(), t.values.end(), t.values.begin(), 0.0);
    if (t.energy == 0.0 || (zero_mean && t.energy <= 1e-14 * raw_energy)) {
        throw Error("zero_template_energy", "zero template energy");
    }
    return t;
}

// One placement. Sums run in raster order over the template so the result
// does not depend on how placements are distributed across threads.
void score_offset(const Template& t, std::size_t tw, std::size_t th, const GrayImage& search,
                  std::size_t ox, std::size_t oy, bool zero_mean, double& value, std::uint8_t& valid) {
    double mean = 0.0;
    if (zero_mean) {
        for (std::size_t y = 0; y < th; ++y) {
            auto row = search.row(oy + y);
            for (std::size_t x = 0; x < tw; ++x) mean += row[ox + x];
        }
        mean /= static_cast<double>(tw * th);
    }
    double num = 0.0, energy = 0.0, raw_energy = 0.0;
    for (std::size_t y = 0; y < th; ++y) {
        auto row = search.row(oy + y);
        const double* tr = t.values.data() + y * tw;
        for (std::size_t x = 0; x < tw; ++x) {
            const double s = row[ox + x];
            const double c = s - mean;
            num += tr[x] * c;
            energy += c * c;
            raw_energy += s * s;
        }
    }
    if (energy == 0.0 || (zero_mean && energy <= 1e-14 * raw_energy)) {
        value = 0.0;
        valid = 0;
        return;
    }
    value = std::clamp(num / std::sqrt(t.energy * energy), -1.0, 1.0);
    valid = 1;
}

NccMap allocate(const GrayImage& tmpl, const GrayImage& search) {
    NccMap map;
    map.width = search.width() - tmpl.width() + 1;
    map.height = search.height() - tmpl.height() + 1;
    map.values.assign(map.width * map.height, 0.0);
    map.valid.assign(map.width * map.height, 0);
    return map;
}

}  // namespace

NccMap ncc_map(const GrayImage& tmpl, const GrayImage& search, bool zero_mean) {
    const Template t = prepare_template(tmpl, search, zero_mean);
    NccMap map = allocate(tmpl, search);
    const auto total = static_cast<std::ptrdiff_t>(map.width * map.height);
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t k = 0; k < total; ++k) {
        const auto ox = static_cast<std::size_t>(k) % map.width;
        const auto oy = static_cast<std::size_t>(k) / map.width;
        score_offset(t, tmpl.width(), tmpl.height(), search, ox, oy, zero_mean, map.values[k], map.valid[k]);
    }
    return map;
}

PeakLocation find_peak(const NccMap& map) {
    PeakLocation best;
    for (std::size_t y = 0; y < map.height; ++y) {
        for (std::size_t x = 0; x < map.width; ++x) {
            if (!map.is_valid(x, y)) continue;
            const double v = map.at(x, y);
            if (!best.found || v > best.score) best = {x, y, v, true};
        }
    }
    return best;
}

PairAlignment pair_images(const GrayImage& hr, const GrayImage& lr, std::size_t factor,
                          const ResampleMethod& method, const PairingOptions& options) {
    if (factor == 0) throw Error("factor", "pairing factor must be at least 1");
    if (!(options.template_fraction > 0.0 && options.template_fraction <= 1.0)) {
        throw Error("config", "template fraction must be in (0, 1]");
    }
    const GrayImage coarse = coarsen(hr, factor, method);
    Rect sub{0, 0, coarse.width(), coarse.height()};
    if (options.template_fraction < 1.0) {
        sub.w = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(coarse.width() * options.template_fraction)));
        sub.h = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(coarse.height() * options.template_fraction)));
        sub.x0 = (coarse.width() - sub.w) / 2;
        sub.y0 = (coarse.height() - sub.h) / 2;
    }
    const GrayImage tmpl = crop(coarse, sub);
    const NccMap map = ncc_map(tmpl, lr, options.zero_mean);
    const PeakLocation peak = find_peak(map);
    if (!peak.found) throw Error("pairing_failed", "pairing failed: no valid correlation placement");
    if (peak.score < options.score_floor) {
        throw Error("pairing_failed", "pairing failed: best score " + std::to_string(peak.score) +
                                          " below floor " + std::to_string(options.score_floor));
    }
    PairAlignment a;
    a.offset_x = peak.x;
    a.offset_y = peak.y;
    a.score = peak.score;
    a.factor = factor;
    a.lr_rect = Rect{peak.x, peak.y, sub.w, sub.h};
    a.hr_rect = Rect{sub.x0 * factor, sub.y0 * factor, sub.w * factor, sub.h * factor};
    return a;
}

namespace serial {

NccMap ncc_map(const GrayImage& tmpl, const GrayImage& search, bool zero_mean) {
    const Template t = prepare_template(tmpl, search, zero_mean);
    NccMap map = allocate(tmpl, search);
    for (std::size_t oy = 0; oy < map.height; ++oy) {
        for (std::size_t ox = 0; ox < map.width; ++ox) {
            const std::size_t k = oy * map.width + ox;
            score_offset(t, tmpl.width(), tmpl.height(), search, ox, oy, zero_mean, map.values[k], map.valid[k]);
        }
    }
    return map;
}

}  // namespace serial
}  // namespace corescale
