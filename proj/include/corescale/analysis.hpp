#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "corescale/image.hpp"

namespace corescale {

/// Threshold segmentation result; 1 where the pixel reached the threshold.
struct BinaryImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> bits;
    double threshold_used = 0.0;

    GrayImage to_gray() const;
    double fraction_set() const;
};

enum class SsimWindow { global, gaussian };

struct SsimParams {
    SsimWindow window = SsimWindow::gaussian;
    std::size_t window_size = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;

    double c1() const noexcept { return (k1 * dynamic_range) * (k1 * dynamic_range); }
    double c2() const noexcept { return (k2 * dynamic_range) * (k2 * dynamic_range); }
};

/// psnr_db is +infinity when mse is exactly zero.
struct QualityMetrics {
    double mse = 0.0;
    double psnr_db = 0.0;
    double ssim = 0.0;
};

/// How MAX_I (and the SSIM dynamic range) is chosen for a comparison.
struct MaxIPolicy {
    enum class Kind { fixed, reference_range };
    Kind kind = Kind::fixed;
    double value = 1.0;

    static MaxIPolicy fixed(double v) { return {Kind::fixed, v}; }
    static MaxIPolicy reference_range() { return {Kind::reference_range, 0.0}; }

    double resolve(const GrayImage& reference) const;
    std::string describe() const;
};

/// (X - mean) / stddev with the population standard deviation.
/// Throws Error("degenerate") for a constant image.
GrayImage zscore(const GrayImage& img);

BinaryImage binarize(const GrayImage& img, double tau);

double mse(const GrayImage& a, const GrayImage& b);
/// 10 log10(max_i^2 / mse); +infinity for identical images.
double psnr(const GrayImage& a, const GrayImage& b, double max_i);
double ssim(const GrayImage& a, const GrayImage& b, const SsimParams& p);

/// MSE, PSNR and SSIM of candidate against reference. The SSIM dynamic range
/// follows the resolved max_i.
QualityMetrics compute_metrics(const GrayImage& candidate, const GrayImage& reference,
                               const MaxIPolicy& policy, SsimParams ssim_params = {});

/// Relative change in percent. Throws for pre_val == 0.
double increase_ratio(double pre_val, double post_val);

/// Normalized 1-D Gaussian taps of the SSIM window.
std::vector<double> gaussian_taps(std::size_t size, double sigma);

namespace serial {
double mse(const GrayImage& a, const GrayImage& b);
double ssim(const GrayImage& a, const GrayImage& b, const SsimParams& p);
}  // namespace serial

}  // namespace corescale
