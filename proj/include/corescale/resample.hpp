#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "corescale/image.hpp"

namespace corescale {

enum class MethodKind { nearest, box, bilinear, bicubic, lanczos2, lanczos3 };

/// One of the six interpolation kernels. Only bicubic carries a parameter.
struct ResampleMethod {
    MethodKind kind = MethodKind::bilinear;
    double bicubic_a = -0.5;

    bool operator==(const ResampleMethod&) const = default;
};

inline constexpr std::array<MethodKind, 6> kAllMethodKinds = {
    MethodKind::nearest, MethodKind::box,      MethodKind::bilinear,
    MethodKind::bicubic, MethodKind::lanczos2, MethodKind::lanczos3,
};

/// All six methods with default parameters, in canonical order.
std::vector<ResampleMethod> all_methods();

std::string_view method_name(MethodKind kind) noexcept;
inline std::string_view method_name(const ResampleMethod& m) noexcept { return method_name(m.kind); }

/// Parses "nearest", "box", "bilinear", "bicubic", "lanczos2", "lanczos3".
ResampleMethod parse_method(std::string_view name);
/// Comma-separated list; "all" expands to the six methods.
std::vector<ResampleMethod> parse_method_list(std::string_view list);

/// Half-width of the unstretched kernel.
double support_radius(const ResampleMethod& m) noexcept;

/// 1-D kernel value at offset t (source-to-target distance in input pixels).
double kernel_weight(const ResampleMethod& m, double t) noexcept;

struct ResampleSpec {
    ResampleMethod method;
    std::size_t out_width = 1;
    std::size_t out_height = 1;
    /// Stretch the kernel when shrinking an axis. Ignored when magnifying and
    /// for nearest.
    bool antialias = true;
};

/// Per-output-sample source indices and normalized weights for one axis.
/// Indices are already clamped to [0, in_size) and consecutive duplicates
/// merged, so weights sum to one for every output sample.
struct AxisWeights {
    std::vector<std::size_t> begin;  // size out + 1; taps of j are [begin[j], begin[j+1])
    std::vector<std::size_t> index;
    std::vector<double> weight;

    std::size_t taps(std::size_t j) const noexcept { return begin[j + 1] - begin[j]; }
};

/// Source coordinate of output sample j, u = (j + 0.5) * in/out - 0.5.
double source_coordinate(std::size_t j, std::size_t in_size, std::size_t out_size) noexcept;

AxisWeights axis_weights(const ResampleMethod& m, std::size_t in_size, std::size_t out_size,
                         bool antialias);

/// Separable resize, horizontal pass then vertical. Row-parallel; the result is
/// bitwise identical for every thread count.
GrayImage resize(const GrayImage& img, const ResampleSpec& spec);

/// Generates a lower-resolution image: dims floor(in / factor), antialias on,
/// pixel pitch multiplied by factor.
GrayImage coarsen(const GrayImage& img, std::size_t factor, const ResampleMethod& m);

/// Generates a higher-resolution image: dims in * factor, pixel pitch divided
/// by factor.
GrayImage refine(const GrayImage& img, std::size_t factor, const ResampleMethod& m);

namespace serial {
/// Single-threaded reference for resize(); kept for equivalence tests and
/// benchmarking.
GrayImage resize(const GrayImage& img, const ResampleSpec& spec);
}  // namespace serial

}  // namespace corescale
