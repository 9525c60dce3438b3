#include "corescale/resample.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "corescale/error.hpp"

namespace corescale {
namespace {

// sin(pi x) / (pi x), exactly zero at nonzero integers so that scale-1
// resizes stay bit-exact.
double sinc(double x) noexcept {
    if (x == 0.0) return 1.0;
    if (x == std::trunc(x)) return 0.0;
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

double bicubic(double t, double a) noexcept {
    const double at = std::abs(t);
    if (at <= 1.0) return ((a + 2.0) * at - (a + 3.0)) * at * at + 1.0;
    if (at <= 2.0) return ((a * at - 5.0 * a) * at + 8.0 * a) * at - 4.0 * a;
    return 0.0;
}

double lanczos(double t, double lobes) noexcept {
    if (std::abs(t) >= lobes) return 0.0;
    return sinc(t) * sinc(t / lobes);
}

std::size_t clamp_index(long long i, std::size_t size) noexcept {
    if (i < 0) return 0;
    if (i >= static_cast<long long>(size)) return size - 1;
    return static_cast<std::size_t>(i);
}

GrayImage with_scaled_pitch(GrayImage img, const GrayImage& src, double multiplier) {
    if (src.pixel_pitch()) img.set_pixel_pitch(*src.pixel_pitch() * multiplier);
    img.set_source_tag(src.source_tag());
    return img;
}

void check_spec(const ResampleSpec& spec) {
    if (spec.out_width == 0 || spec.out_height == 0) {
        throw Error("degenerate", "resize output dimensions must be at least 1x1");
    }
}

}  // namespace

std::vector<ResampleMethod> all_methods() {
    std::vector<ResampleMethod> out;
    for (auto k : kAllMethodKinds) out.push_back(ResampleMethod{k});
    return out;
}

std::string_view method_name(MethodKind kind) noexcept {
    switch (kind) {
        case MethodKind::nearest: return "nearest";
        case MethodKind::box: return "box";
        case MethodKind::bilinear: return "bilinear";
        case MethodKind::bicubic: return "bicubic";
        case MethodKind::lanczos2: return "lanczos2";
        case MethodKind::lanczos3: return "lanczos3";
    }
    return "unknown";
}

ResampleMethod parse_method(std::string_view name) {
    for (auto k : kAllMethodKinds) {
        if (method_name(k) == name) return ResampleMethod{k};
    }
    throw Error("method", "unknown resampling method '" + std::string(name) + "'");
}

std::vector<ResampleMethod> parse_method_list(std::string_view list) {
    if (list == "all") return all_methods();
    std::vector<ResampleMethod> out;
    while (!list.empty()) {
        const auto comma = list.find(',');
        const std::string_view token = list.substr(0, comma);
        list = comma == std::string_view::npos ? std::string_view{} : list.substr(comma + 1);
        if (token.empty()) continue;
        auto m = parse_method(token);
        if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    if (out.empty()) throw Error("method", "empty method list");
    return out;
}

double support_radius(const ResampleMethod& m) noexcept {
    switch (m.kind) {
        case MethodKind::nearest:
        case MethodKind::box: return 0.5;
        case MethodKind::bilinear: return 1.0;
        case MethodKind::bicubic:
        case MethodKind::lanczos2: return 2.0;
        case MethodKind::lanczos3: return 3.0;
    }
    return 0.0;
}

double kernel_weight(const ResampleMethod& m, double t) noexcept {
    switch (m.kind) {
        case MethodKind::nearest:
        case MethodKind::box: return (t >= -0.5 && t < 0.5) ? 1.0 : 0.0;
        case MethodKind::bilinear: return std::max(0.0, 1.0 - std::abs(t));
        case MethodKind::bicubic: return bicubic(t, m.bicubic_a);
        case MethodKind::lanczos2: return lanczos(t, 2.0);
        case MethodKind::lanczos3: return lanczos(t, 3.0);
    }
    return 0.0;
}

double source_coordinate(std::size_t j, std::size_t in_size, std::size_t out_size) noexcept {
    return (static_cast<double>(j) + 0.5) * static_cast<double>(in_size) / static_cast<double>(out_size) - 0.5;
}

AxisWeights axis_weights(const ResampleMethod& m, std::size_t in_size, std::size_t out_size, bool antialias) {
    AxisWeights aw;
    aw.begin.reserve(out_size + 1);
    aw.begin.push_back(0);

    if (m.kind == MethodKind::nearest) {
        for (std::size_t j = 0; j < out_size; ++j) {
            const double u = source_coordinate(j, in_size, out_size);
            aw.index.push_back(clamp_index(static_cast<long long>(std::floor(u + 0.5)), in_size));
            aw.weight.push_back(1.0);
            aw.begin.push_back(aw.index.size());
        }
        return aw;
    }

    const double scale = static_cast<double>(out_size) / static_cast<double>(in_size);
    const double stretch = (antialias && scale < 1.0) ? scale : 1.0;
    const double radius = support_radius(m) / stretch;

    for (std::size_t j = 0; j < out_size; ++j) {
        const double u = source_coordinate(j, in_size, out_size);
        const auto lo = static_cast<long long>(std::ceil(u - radius));
        const auto hi = static_cast<long long>(std::floor(u + radius));
        const std::size_t first = aw.index.size();
        double total = 0.0;
        for (long long i = lo; i <= hi; ++i) {
            const double w = kernel_weight(m, (u - static_cast<double>(i)) * stretch);
            if (w == 0.0) continue;
            const std::size_t idx = clamp_index(i, in_size);
            if (aw.index.size() > first && aw.index.back() == idx) {
                aw.weight.back() += w;
            } else {
                aw.index.push_back(idx);
                aw.weight.push_back(w);
            }
            total += w;
        }
        if (aw.index.size() == first || total == 0.0) {
            throw Error("degenerate", "resampling kernel has zero total weight");
        }
        for (std::size_t k = first; k < aw.weight.size(); ++k) aw.weight[k] /= total;
        aw.begin.push_back(aw.index.size());
    }
    return aw;
}

GrayImage resize(const GrayImage& img, const ResampleSpec& spec) {
    check_spec(spec);
    const std::size_t in_w = img.width(), in_h = img.height();
    const std::size_t out_w = spec.out_width, out_h = spec.out_height;
    const AxisWeights wx = axis_weights(spec.method, in_w, out_w, spec.antialias);
    const AxisWeights wy = axis_weights(spec.method, in_h, out_h, spec.antialias);
    const double* src = img.pixels().data();

    std::vector<double> tmp(out_w * in_h);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t y = 0; y < static_cast<std::ptrdiff_t>(in_h); ++y) {
        const double* in_row = src + y * in_w;
        double* out_row = tmp.data() + y * out_w;
        for (std::size_t j = 0; j < out_w; ++j) {
            double acc = 0.0;
            for (std::size_t k = wx.begin[j]; k < wx.begin[j + 1]; ++k) acc += wx.weight[k] * in_row[wx.index[k]];
            out_row[j] = acc;
        }
    }

    std::vector<double> out(out_w * out_h);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(out_h); ++j) {
        double* out_row = out.data() + j * out_w;
        std::fill(out_row, out_row + out_w, 0.0);
        for (std::size_t k = wy.begin[j]; k < wy.begin[j + 1]; ++k) {
            const double w = wy.weight[k];
            const double* tmp_row = tmp.data() + wy.index[k] * out_w;
            for (std::size_t x = 0; x < out_w; ++x) out_row[x] += w * tmp_row[x];
        }
    }

    GrayImage result(out_w, out_h, std::move(out));
    result.set_pixel_pitch(img.pixel_pitch());
    result.set_source_tag(img.source_tag());
    return result;
}

GrayImage coarsen(const GrayImage& img, std::size_t factor, const ResampleMethod& m) {
    if (factor == 0) throw Error("factor", "coarsening factor must be at least 1");
    const std::size_t w = img.width() / factor, h = img.height() / factor;
    if (w == 0 || h == 0) {
        throw Error("degenerate", "coarsening " + std::to_string(img.width()) + "x" +
                                      std::to_string(img.height()) + " by " + std::to_string(factor) +
                                      " leaves an empty image");
    }
    return with_scaled_pitch(resize(img, {m, w, h, true}), img, static_cast<double>(factor));
}

GrayImage refine(const GrayImage& img, std::size_t factor, const ResampleMethod& m) {
    if (factor == 0) throw Error("factor", "refinement factor must be at least 1");
    return with_scaled_pitch(resize(img, {m, img.width() * factor, img.height() * factor, true}), img,
                             1.0 / static_cast<double>(factor));
}

namespace serial {

GrayImage resize(const GrayImage& img, const ResampleSpec& spec) {
    check_spec(spec);
    const std::size_t in_w = img.width(), in_h = img.height();
    const std::size_t out_w = spec.out_width, out_h = spec.out_height;
    const AxisWeights wx = axis_weights(spec.method, in_w, out_w, spec.antialias);
    const AxisWeights wy = axis_weights(spec.method, in_h, out_h, spec.antialias);

    std::vector<double> tmp(out_w * in_h);
    for (std::size_t y = 0; y < in_h; ++y) {
        for (std::size_t j = 0; j < out_w; ++j) {
            double acc = 0.0;
            for (std::size_t k = wx.begin[j]; k < wx.begin[j + 1]; ++k) acc += wx.weight[k] * img.at(wx.index[k], y);
            tmp[y * out_w + j] = acc;
        }
    }
    std::vector<double> out(out_w * out_h);
    for (std::size_t j = 0; j < out_h; ++j) {
        for (std::size_t x = 0; x < out_w; ++x) {
            double acc = 0.0;
            for (std::size_t k = wy.begin[j]; k < wy.begin[j + 1]; ++k) acc += wy.weight[k] * tmp[wy.index[k] * out_w + x];
            out[j * out_w + x] = acc;
        }
    }
    GrayImage result(out_w, out_h, std::move(out));
    result.set_pixel_pitch(img.pixel_pitch());
    result.set_source_tag(img.source_tag());
    return result;
}

}  // namespace serial
}  // namespace corescale
