#include "corescale/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "corescale/error.hpp"

namespace corescale {
namespace {

void require_same_dims(const GrayImage& a, const GrayImage& b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw Error("dim_mismatch", "image dimensions differ: " + std::to_string(a.width()) + "x" +
                                        std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                                        "x" + std::to_string(b.height()));
    }
}

// Row partial sums are reduced in row order, so the total is independent of
// thread count.
double ordered_sum(const std::vector<double>& partials) {
    double total = 0.0;
    for (double v : partials) total += v;
    return total;
}

double row_sq_diff(const GrayImage& a, const GrayImage& b, std::size_t y) {
    auto ra = a.row(y), rb = b.row(y);
    double acc = 0.0;
    for (std::size_t x = 0; x < ra.size(); ++x) {
        const double d = ra[x] - rb[x];
        acc += d * d;
    }
    return acc;
}

double ssim_global(const GrayImage& a, const GrayImage& b, const SsimParams& p) {
    const double n = static_cast<double>(a.size());
    auto pa = a.pixels(), pb = b.pixels();
    const double mx = std::accumulate(pa.begin(), pa.end(), 0.0) / n;
    const double my = std::accumulate(pb.begin(), pb.end(), 0.0) / n;
    double vx = 0.0, vy = 0.0, cxy = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        const double dx = pa[i] - mx, dy = pb[i] - my;
        vx += dx * dx;
        vy += dy * dy;
        cxy += dx * dy;
    }
    vx /= n;
    vy /= n;
    cxy /= n;
    const double c1 = p.c1(), c2 = p.c2();
    return ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
}

struct LocalMoments {
    std::size_t width = 0, height = 0;
    std::vector<double> mx, my, xx, yy, xy;
};

void check_window(const GrayImage& a, const SsimParams& p) {
    if (p.window_size == 0) throw Error("config", "SSIM window size must be positive");
    if (a.width() < p.window_size || a.height() < p.window_size) {
        throw Error("too_small", "image " + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                                     " smaller than the " + std::to_string(p.window_size) + "x" +
                                     std::to_string(p.window_size) + " SSIM window");
    }
}

// Horizontal then vertical valid-region Gaussian filtering of the five
// moment fields, one output row per iteration.
template <bool Parallel>
LocalMoments local_moments(const GrayImage& a, const GrayImage& b, const std::vector<double>& g) {
    const std::size_t n = g.size();
    const std::size_t w = a.width(), h = a.height();
    const std::size_t ow = w - n + 1, oh = h - n + 1;
    std::vector<double> hx(ow * h), hy(ow * h), hxx(ow * h), hyy(ow * h), hxy(ow * h);

    auto horizontal = [&](std::size_t y) {
        auto ra = a.row(y), rb = b.row(y);
        for (std::size_t x = 0; x < ow; ++x) {
            double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
            for (std::size_t k = 0; k < n; ++k) {
                const double va = ra[x + k], vb = rb[x + k], gk = g[k];
                sx += gk * va;
                sy += gk * vb;
                sxx += gk * va * va;
                syy += gk * vb * vb;
                sxy += gk * va * vb;
            }
            const std::size_t i = y * ow + x;
            hx[i] = sx;
            hy[i] = sy;
            hxx[i] = sxx;
            hyy[i] = syy;
            hxy[i] = sxy;
        }
    };

    LocalMoments m;
    m.width = ow;
    m.height = oh;
    m.mx.assign(ow * oh, 0.0);
    m.my.assign(ow * oh, 0.0);
    m.xx.assign(ow * oh, 0.0);
    m.yy.assign(ow * oh, 0.0);
    m.xy.assign(ow * oh, 0.0);

    auto vertical = [&](std::size_t y) {
        for (std::size_t x = 0; x < ow; ++x) {
            double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
            for (std::size_t k = 0; k < n; ++k) {
                const std::size_t i = (y + k) * ow + x;
                const double gk = g[k];
                sx += gk * hx[i];
                sy += gk * hy[i];
                sxx += gk * hxx[i];
                syy += gk * hyy[i];
                sxy += gk * hxy[i];
            }
            const std::size_t o = y * ow + x;
            m.mx[o] = sx;
            m.my[o] = sy;
            m.xx[o] = sxx;
            m.yy[o] = syy;
            m.xy[o] = sxy;
        }
    };

    if constexpr (Parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t y = 0; y < static_cast<std::ptrdiff_t>(h); ++y) horizontal(static_cast<std::size_t>(y));
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t y = 0; y < static_cast<std::ptrdiff_t>(oh); ++y) vertical(static_cast<std::size_t>(y));
    } else {
        for (std::size_t y = 0; y < h; ++y) horizontal(y);
        for (std::size_t y = 0; y < oh; ++y) vertical(y);
    }
    return m;
}

template <bool Parallel>
double ssim_gaussian(const GrayImage& a, const GrayImage& b, const SsimParams& p) {
    check_window(a, p);
    const auto g = gaussian_taps(p.window_size, p.sigma);
    const LocalMoments m = local_moments<Parallel>(a, b, g);
    const double c1 = p.c1(), c2 = p.c2();
    std::vector<double> partial(m.height, 0.0);

    auto row = [&](std::size_t y) {
        double acc = 0.0;
        for (std::size_t x = 0; x < m.width; ++x) {
            const std::size_t i = y * m.width + x;
            const double mx = m.mx[i], my = m.my[i];
            const double vx = m.xx[i] - mx * mx;
            const double vy = m.yy[i] - my * my;
            const double cxy = m.xy[i] - mx * my;
            acc += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
        }
        partial[y] = acc;
    };
    if constexpr (Parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t y = 0; y < static_cast<std::ptrdiff_t>(m.height); ++y) row(static_cast<std::size_t>(y));
    } else {
        for (std::size_t y = 0; y < m.height; ++y) row(y);
    }
    return ordered_sum(partial) / static_cast<double>(m.width * m.height);
}

double ssim_checked(const GrayImage& a, const GrayImage& b, const SsimParams& p, bool parallel) {
    require_same_dims(a, b);
    if (!(p.dynamic_range > 0.0)) throw Error("config", "SSIM dynamic range must be positive");
    if (p.window == SsimWindow::global) return ssim_global(a, b, p);
    return parallel ? ssim_gaussian<true>(a, b, p) : ssim_gaussian<false>(a, b, p);
}

}  // namespace

GrayImage BinaryImage::to_gray() const {
    std::vector<double> px(bits.begin(), bits.end());
    return GrayImage(width, height, std::move(px));
}

double BinaryImage::fraction_set() const {
    const auto set = std::count(bits.begin(), bits.end(), std::uint8_t{1});
    return static_cast<double>(set) / static_cast<double>(bits.size());
}

double MaxIPolicy::resolve(const GrayImage& reference) const {
    if (kind == Kind::fixed) {
        if (!(value > 0.0)) throw Error("config", "max_i must be positive");
        return value;
    }
    const double range = max_value(reference) - min_value(reference);
    if (!(range > 0.0)) throw Error("degenerate", "reference image has zero peak-to-peak range");
    return range;
}

std::string MaxIPolicy::describe() const {
    if (kind == Kind::reference_range) return "reference_range";
    std::ostringstream os;
    os << "fixed:" << value;
    return os.str();
}

GrayImage zscore(const GrayImage& img) {
    if (img.size() < 2) throw Error("degenerate", "z-score needs at least two pixels");
    auto px = img.pixels();
    const auto [lo, hi] = std::minmax_element(px.begin(), px.end());
    if (*lo == *hi) throw Error("degenerate", "degenerate zero variance");
    const double n = static_cast<double>(px.size());
    const double mean = std::accumulate(px.begin(), px.end(), 0.0) / n;
    double var = 0.0;
    for (double v : px) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / n);
    if (!(sd > 0.0)) throw Error("degenerate", "degenerate zero variance");
    std::vector<double> out(px.size());
    for (std::size_t i = 0; i < px.size(); ++i) out[i] = (px[i] - mean) / sd;
    GrayImage z(img.width(), img.height(), std::move(out));
    z.set_pixel_pitch(img.pixel_pitch());
    z.set_source_tag(img.source_tag());
    return z;
}

BinaryImage binarize(const GrayImage& img, double tau) {
    BinaryImage b;
    b.width = img.width();
    b.height = img.height();
    b.threshold_used = tau;
    b.bits.reserve(img.size());
    for (double v : img.pixels()) b.bits.push_back(v >= tau ? 1 : 0);
    return b;
}

double mse(const GrayImage& a, const GrayImage& b) {
    require_same_dims(a, b);
    std::vector<double> partial(a.height());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t y = 0; y < static_cast<std::ptrdiff_t>(a.height()); ++y) {
        partial[y] = row_sq_diff(a, b, static_cast<std::size_t>(y));
    }
    return ordered_sum(partial) / static_cast<double>(a.size());
}

double psnr(const GrayImage& a, const GrayImage& b, double max_i) {
    if (!(max_i > 0.0)) throw Error("config", "max_i must be positive");
    const double e = mse(a, b);
    if (e == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(max_i * max_i / e);
}

double ssim(const GrayImage& a, const GrayImage& b, const SsimParams& p) { return ssim_checked(a, b, p, true); }

QualityMetrics compute_metrics(const GrayImage& candidate, const GrayImage& reference, const MaxIPolicy& policy,
                               SsimParams ssim_params) {
    require_same_dims(candidate, reference);
    const double max_i = policy.resolve(reference);
    ssim_params.dynamic_range = max_i;
    QualityMetrics q;
    q.mse = mse(candidate, reference);
    q.psnr_db = q.mse == 0.0 ? std::numeric_limits<double>::infinity() : 10.0 * std::log10(max_i * max_i / q.mse);
    q.ssim = ssim(candidate, reference, ssim_params);
    return q;
}

double increase_ratio(double pre_val, double post_val) {
    if (pre_val == 0.0) throw Error("degenerate", "increase ratio undefined for a zero baseline");
    return 100.0 * (post_val - pre_val) / pre_val;
}

std::vector<double> gaussian_taps(std::size_t size, double sigma) {
    if (size == 0 || !(sigma > 0.0)) throw Error("config", "invalid Gaussian window");
    std::vector<double> g(size);
    const double centre = (static_cast<double>(size) - 1.0) / 2.0;
    for (std::size_t k = 0; k < size; ++k) {
        const double d = static_cast<double>(k) - centre;
        g[k] = std::exp(-d * d / (2.0 * sigma * sigma));
    }
    const double total = std::accumulate(g.begin(), g.end(), 0.0);
    for (auto& v : g) v /= total;
    return g;
}

namespace serial {

double mse(const GrayImage& a, const GrayImage& b) {
    require_same_dims(a, b);
    std::vector<double> partial(a.height());
    for (std::size_t y = 0; y < a.height(); ++y) partial[y] = row_sq_diff(a, b, y);
    return ordered_sum(partial) / static_cast<double>(a.size());
}

double ssim(const GrayImage& a, const GrayImage& b, const SsimParams& p) { return ssim_checked(a, b, p, false); }

}  // namespace serial
}  // namespace corescale
