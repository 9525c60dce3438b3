#pragma once
// Brute-force reference implementations used only by the tests. Each one is
// written from the defining formula without sharing code with the library.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "corescale/image.hpp"
#include "corescale/resample.hpp"

namespace oracle {

using corescale::GrayImage;
using corescale::MethodKind;

inline double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline GrayImage random_image(std::size_t w, std::size_t h, std::mt19937_64& rng) {
    std::vector<double> px(w * h);
    for (auto& v : px) v = uniform(rng);
    return GrayImage(w, h, std::move(px));
}

inline double sinc(double x) {
    if (x == 0.0) return 1.0;
    return std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
}

// Kernel values written out term by term.
inline double kernel(MethodKind kind, double t, double a = -0.5) {
    const double x = std::fabs(t);
    switch (kind) {
        case MethodKind::nearest:
        case MethodKind::box: return (-0.5 <= t && t < 0.5) ? 1.0 : 0.0;
        case MethodKind::bilinear: return x < 1.0 ? 1.0 - x : 0.0;
        case MethodKind::bicubic:
            if (x <= 1.0) return (a + 2.0) * x * x * x - (a + 3.0) * x * x + 1.0;
            if (x < 2.0) return a * x * x * x - 5.0 * a * x * x + 8.0 * a * x - 4.0 * a;
            return 0.0;
        case MethodKind::lanczos2: return x < 2.0 ? sinc(t) * sinc(t / 2.0) : 0.0;
        case MethodKind::lanczos3: return x < 3.0 ? sinc(t) * sinc(t / 3.0) : 0.0;
    }
    return 0.0;
}

inline double radius(MethodKind kind) {
    switch (kind) {
        case MethodKind::nearest:
        case MethodKind::box: return 0.5;
        case MethodKind::bilinear: return 1.0;
        case MethodKind::bicubic:
        case MethodKind::lanczos2: return 2.0;
        case MethodKind::lanczos3: return 3.0;
    }
    return 0.0;
}

// Dense out x in matrix of normalized 1-D weights. Every integer source
// position near u contributes to its edge-clamped index.
inline std::vector<std::vector<double>> axis_matrix(MethodKind kind, std::size_t in, std::size_t out, bool aa) {
    std::vector<std::vector<double>> m(out, std::vector<double>(in, 0.0));
    const double s = static_cast<double>(out) / static_cast<double>(in);
    const double stretch = (aa && s < 1.0 && kind != MethodKind::nearest) ? s : 1.0;
    auto clamp = [&](long long p) {
        return static_cast<std::size_t>(std::min<long long>(std::max<long long>(p, 0), static_cast<long long>(in) - 1));
    };
    for (std::size_t j = 0; j < out; ++j) {
        const double u = (static_cast<double>(j) + 0.5) * static_cast<double>(in) / static_cast<double>(out) - 0.5;
        if (kind == MethodKind::nearest) {
            m[j][clamp(static_cast<long long>(std::floor(u + 0.5)))] = 1.0;
            continue;
        }
        const double r = radius(kind) / stretch;
        double total = 0.0;
        for (long long p = static_cast<long long>(std::floor(u - r)) - 2; p <= static_cast<long long>(std::ceil(u + r)) + 2;
             ++p) {
            const double w = kernel(kind, (u - static_cast<double>(p)) * stretch);
            m[j][clamp(p)] += w;
            total += w;
        }
        for (auto& w : m[j]) w /= total;
    }
    return m;
}

// Full 2-D tensor-product weighted sum per output pixel.
inline GrayImage resize2d(const GrayImage& img, MethodKind kind, std::size_t ow, std::size_t oh, bool aa = true) {
    const auto mx = axis_matrix(kind, img.width(), ow, aa);
    const auto my = axis_matrix(kind, img.height(), oh, aa);
    std::vector<double> out(ow * oh, 0.0);
    for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (std::size_t k = 0; k < img.height(); ++k) {
                for (std::size_t i = 0; i < img.width(); ++i) acc += my[y][k] * mx[x][i] * img.at(i, k);
            }
            out[y * ow + x] = acc;
        }
    }
    return GrayImage(ow, oh, std::move(out));
}

inline double mse(const GrayImage& a, const GrayImage& b) {
    double acc = 0.0;
    for (std::size_t y = 0; y < a.height(); ++y) {
        for (std::size_t x = 0; x < a.width(); ++x) {
            const double d = a.at(x, y) - b.at(x, y);
            acc += d * d;
        }
    }
    return acc / static_cast<double>(a.width() * a.height());
}

inline double psnr(const GrayImage& a, const GrayImage& b, double max_i) {
    return 10.0 * std::log10(max_i * max_i / mse(a, b));
}

// SSIM of one window given per-pixel weights that sum to one.
inline double ssim_window(const GrayImage& a, const GrayImage& b, std::size_t x0, std::size_t y0, std::size_t n,
                          const std::vector<double>& w2, double L) {
    const double c1 = (0.01 * L) * (0.01 * L), c2 = (0.03 * L) * (0.03 * L);
    double mx = 0.0, my = 0.0;
    for (std::size_t dy = 0; dy < n; ++dy) {
        for (std::size_t dx = 0; dx < n; ++dx) {
            mx += w2[dy * n + dx] * a.at(x0 + dx, y0 + dy);
            my += w2[dy * n + dx] * b.at(x0 + dx, y0 + dy);
        }
    }
    double vx = 0.0, vy = 0.0, cxy = 0.0;
    for (std::size_t dy = 0; dy < n; ++dy) {
        for (std::size_t dx = 0; dx < n; ++dx) {
            const double p = a.at(x0 + dx, y0 + dy) - mx, q = b.at(x0 + dx, y0 + dy) - my;
            vx += w2[dy * n + dx] * p * p;
            vy += w2[dy * n + dx] * q * q;
            cxy += w2[dy * n + dx] * p * q;
        }
    }
    return (2 * mx * my + c1) * (2 * cxy + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
}

inline double ssim_global(const GrayImage& a, const GrayImage& b, double L) {
    const double c1 = (0.01 * L) * (0.01 * L), c2 = (0.03 * L) * (0.03 * L);
    const double n = static_cast<double>(a.width() * a.height());
    double mx = 0.0, my = 0.0;
    for (std::size_t y = 0; y < a.height(); ++y) {
        for (std::size_t x = 0; x < a.width(); ++x) {
            mx += a.at(x, y);
            my += b.at(x, y);
        }
    }
    mx /= n;
    my /= n;
    double vx = 0.0, vy = 0.0, cxy = 0.0;
    for (std::size_t y = 0; y < a.height(); ++y) {
        for (std::size_t x = 0; x < a.width(); ++x) {
            const double p = a.at(x, y) - mx, q = b.at(x, y) - my;
            vx += p * p;
            vy += q * q;
            cxy += p * q;
        }
    }
    vx /= n;
    vy /= n;
    cxy /= n;
    return (2 * mx * my + c1) * (2 * cxy + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
}

// Mean SSIM over every fully contained size x size Gaussian window.
inline double ssim_gaussian(const GrayImage& a, const GrayImage& b, double L, std::size_t size = 11, double sigma = 1.5) {
    std::vector<double> w2(size * size);
    const double c = 0.5 * static_cast<double>(size - 1);
    double total = 0.0;
    for (std::size_t dy = 0; dy < size; ++dy) {
        for (std::size_t dx = 0; dx < size; ++dx) {
            const double ex = static_cast<double>(dx) - c, ey = static_cast<double>(dy) - c;
            w2[dy * size + dx] = std::exp(-(ex * ex + ey * ey) / (2.0 * sigma * sigma));
            total += w2[dy * size + dx];
        }
    }
    for (auto& w : w2) w /= total;
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t y0 = 0; y0 + size <= a.height(); ++y0) {
        for (std::size_t x0 = 0; x0 + size <= a.width(); ++x0) {
            acc += ssim_window(a, b, x0, y0, size, w2, L);
            ++count;
        }
    }
    return acc / static_cast<double>(count);
}

// Correlation score at one placement, directly from the defining sums.
inline double ncc_at(const GrayImage& t, const GrayImage& s, std::size_t ox, std::size_t oy, bool zero_mean = false) {
    const double n = static_cast<double>(t.width() * t.height());
    double mt = 0.0, ms = 0.0;
    if (zero_mean) {
        for (std::size_t y = 0; y < t.height(); ++y) {
            for (std::size_t x = 0; x < t.width(); ++x) {
                mt += t.at(x, y);
                ms += s.at(ox + x, oy + y);
            }
        }
        mt /= n;
        ms /= n;
    }
    double num = 0.0, et = 0.0, es = 0.0;
    for (std::size_t y = 0; y < t.height(); ++y) {
        for (std::size_t x = 0; x < t.width(); ++x) {
            const double p = t.at(x, y) - mt, q = s.at(ox + x, oy + y) - ms;
            num += p * q;
            et += p * p;
            es += q * q;
        }
    }
    return num / std::sqrt(et * es);
}

inline GrayImage scaled(const GrayImage& img, double c, double offset = 0.0) {
    std::vector<double> px(img.pixels().begin(), img.pixels().end());
    for (auto& v : px) v = c * v + offset;
    return GrayImage(img.width(), img.height(), std::move(px));
}

inline double max_abs_diff(const GrayImage& a, const GrayImage& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a.pixels()[i] - b.pixels()[i]));
    return m;
}

}  // namespace oracle
