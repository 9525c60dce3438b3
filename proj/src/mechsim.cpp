#include "corescale/mechsim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <string>

#include "corescale/error.hpp"
#include "corescale/harness.hpp"

namespace corescale {
namespace {

// Uniform [0, 1) from the raw 64-bit stream; std distributions are not
// reproducible across standard libraries.
class UnitStream {
public:
    explicit UnitStream(std::uint64_t seed) : engine_(seed) {}
    double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

// Moving mean of half-width r along rows, edge samples replicated.
std::vector<double> box_blur_rows(const std::vector<double>& src, std::size_t w, std::size_t h, std::size_t r) {
    std::vector<double> out(src.size());
    const double norm = 1.0 / static_cast<double>(2 * r + 1);
    for (std::size_t y = 0; y < h; ++y) {
        const double* row = src.data() + y * w;
        auto sample = [&](long long x) {
            return row[std::clamp<long long>(x, 0, static_cast<long long>(w) - 1)];
        };
        double acc = 0.0;
        for (long long k = -static_cast<long long>(r); k <= static_cast<long long>(r); ++k) acc += sample(k);
        for (std::size_t x = 0; x < w; ++x) {
            out[y * w + x] = acc * norm;
            acc += sample(static_cast<long long>(x + r + 1)) - sample(static_cast<long long>(x) - static_cast<long long>(r));
        }
    }
    return out;
}

std::vector<double> transpose(const std::vector<double>& src, std::size_t w, std::size_t h) {
    std::vector<double> out(src.size());
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) out[x * h + y] = src[y * w + x];
    return out;
}

std::vector<double> box_blur(std::vector<double> field, std::size_t w, std::size_t h, std::size_t r) {
    if (r == 0) return field;
    field = box_blur_rows(field, w, h, r);
    field = transpose(box_blur_rows(transpose(field, w, h), h, w, r), h, w);
    return field;
}

void draw_segment(std::vector<std::uint8_t>& pore, std::size_t w, std::size_t h, double x0, double y0, double x1,
                  double y1, double half_width) {
    const auto lo_x = static_cast<long long>(std::floor(std::min(x0, x1) - half_width));
    const auto hi_x = static_cast<long long>(std::ceil(std::max(x0, x1) + half_width));
    const auto lo_y = static_cast<long long>(std::floor(std::min(y0, y1) - half_width));
    const auto hi_y = static_cast<long long>(std::ceil(std::max(y0, y1) + half_width));
    const double dx = x1 - x0, dy = y1 - y0;
    const double len2 = dx * dx + dy * dy;
    for (long long y = std::max<long long>(lo_y, 0); y <= std::min<long long>(hi_y, static_cast<long long>(h) - 1); ++y) {
        for (long long x = std::max<long long>(lo_x, 0); x <= std::min<long long>(hi_x, static_cast<long long>(w) - 1);
             ++x) {
            const double px = static_cast<double>(x) + 0.5, py = static_cast<double>(y) + 0.5;
            double t = len2 > 0.0 ? ((px - x0) * dx + (py - y0) * dy) / len2 : 0.0;
            t = std::clamp(t, 0.0, 1.0);
            const double ex = px - (x0 + t * dx), ey = py - (y0 + t * dy);
            if (ex * ex + ey * ey <= half_width * half_width) pore[static_cast<std::size_t>(y) * w + x] = 1;
        }
    }
}

bool ranks_above(const QualityMetrics& a, std::string_view name_a, const QualityMetrics& b, std::string_view name_b) {
    if (a.psnr_db != b.psnr_db) return a.psnr_db > b.psnr_db;
    if (a.ssim != b.ssim) return a.ssim > b.ssim;
    return name_a < name_b;
}

}  // namespace

GrayImage synth_groundtruth(const SceneSpec& spec) {
    if (!(spec.target_porosity >= 0.0 && spec.target_porosity < 1.0)) {
        throw Error("config", "target porosity must lie in [0, 1)");
    }
    if (spec.width < 512 || spec.height < 512) throw Error("config", "scene dimensions must be at least 512");
    if (!(spec.matrix_level > spec.pore_level) || spec.jitter < 0.0 ||
        spec.jitter >= 0.5 * (spec.matrix_level - spec.pore_level)) {
        throw Error("config", "levels must satisfy pore < matrix and jitter < half their gap");
    }
    const std::size_t w = spec.width, h = spec.height, n = w * h;
    UnitStream rng(spec.seed);

    std::vector<double> field(n);
    for (auto& v : field) v = rng.next();
    field = box_blur(box_blur(std::move(field), w, h, spec.smoothing_radius), w, h, spec.smoothing_radius);

    std::vector<std::uint8_t> pore(n, 0);
    const auto k = static_cast<std::size_t>(std::floor(spec.target_porosity * static_cast<double>(n)));
    if (k > 0) {
        std::vector<double> sorted = field;
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), sorted.end());
        const double cut = sorted[k];
        for (std::size_t i = 0; i < n; ++i) pore[i] = field[i] < cut ? 1 : 0;
    }

    const double extent = static_cast<double>(std::min(w, h));
    for (std::size_t f = 0; f < spec.fracture_count; ++f) {
        double x = rng.next() * static_cast<double>(w);
        double y = rng.next() * static_cast<double>(h);
        double angle = rng.next() * 2.0 * std::numbers::pi;
        for (std::size_t s = 0; s < spec.fracture_segments; ++s) {
            const double len = (0.04 + 0.08 * rng.next()) * extent;
            angle += (rng.next() - 0.5) * 0.8;
            const double nx = x + len * std::cos(angle), ny = y + len * std::sin(angle);
            draw_segment(pore, w, h, x, y, nx, ny, 0.5 * spec.fracture_width);
            x = nx;
            y = ny;
        }
    }

    std::vector<double> px(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double base = pore[i] ? spec.pore_level : spec.matrix_level;
        px[i] = base + (2.0 * rng.next() - 1.0) * spec.jitter;
    }
    GrayImage scene(w, h, std::move(px));
    scene.set_pixel_pitch(1.0);
    scene.set_source_tag("synthetic-scene:seed=" + std::to_string(spec.seed));
    return scene;
}

double pore_fraction(const GrayImage& scene, const SceneSpec& spec) {
    const double cut = spec.pore_threshold();
    auto px = scene.pixels();
    const auto below = std::count_if(px.begin(), px.end(), [cut](double v) { return v < cut; });
    return static_cast<double>(below) / static_cast<double>(px.size());
}

GrayImage simulate_capture(const GrayImage& gt, const ResampleMethod& method, std::size_t pitch) {
    if (pitch == 0) throw Error("factor", "capture pitch must be at least 1");
    if (pitch == 1) return gt;
    return coarsen(gt, pitch, method);
}

MechReport infer_mechanism(const GrayImage& gt, std::size_t hr_pitch, std::size_t scale,
                           const std::vector<ResampleMethod>& sim_methods,
                           const std::vector<ResampleMethod>& coarsen_methods, const MechOptions& options) {
    if (hr_pitch < 1) throw Error("config", "hr pitch must be at least 1");
    if (scale < 2) throw Error("config", "scale must be at least 2");
    if (sim_methods.empty() || coarsen_methods.empty()) throw Error("config", "method lists must be non-empty");
    if (gt.width() / (hr_pitch * scale) == 0 || gt.height() / (hr_pitch * scale) == 0) {
        throw Error("degenerate", "scene too small for pitch " + std::to_string(hr_pitch * scale));
    }

    MechReport report;
    report.hr_pitch = hr_pitch;
    report.scale = scale;
    report.sim_methods = sim_methods;
    report.coarsen_methods = coarsen_methods;
    const MaxIPolicy policy = MaxIPolicy::reference_range();
    report.max_i_policy = policy.describe();
    report.matrix.reserve(sim_methods.size() * coarsen_methods.size());

    for (const auto& sim : sim_methods) {
        const GrayImage a = simulate_capture(gt, sim, hr_pitch);
        const GrayImage b = simulate_capture(gt, sim, hr_pitch * scale);
        for (const auto& m : coarsen_methods) {
            GrayImage c = coarsen(a, scale, m);
            if (c.width() != b.width() || c.height() != b.height()) {
                throw Error("dim_mismatch", "coarsened capture does not match simulated LR dimensions");
            }
            report.matrix.push_back(compute_metrics(c, b, policy, options.ssim));
        }
    }

    for (std::size_t s = 0; s < sim_methods.size(); ++s) {
        std::size_t best = 0;
        std::optional<std::size_t> best_other;
        for (std::size_t m = 0; m < coarsen_methods.size(); ++m) {
            const auto name = method_name(coarsen_methods[m]);
            if (m > 0 && ranks_above(report.cell(s, m), name, report.cell(s, best), method_name(coarsen_methods[best]))) {
                best = m;
            }
            if (coarsen_methods[m] == sim_methods[s]) continue;
            if (!best_other || ranks_above(report.cell(s, m), name, report.cell(s, *best_other),
                                           method_name(coarsen_methods[*best_other]))) {
                best_other = m;
            }
        }
        const std::string sim_name(method_name(sim_methods[s]));
        report.best_per_sim[sim_name] = std::string(method_name(coarsen_methods[best]));
        if (best_other) report.best_other_per_sim[sim_name] = std::string(method_name(coarsen_methods[*best_other]));
    }
    return report;
}

nlohmann::json scene_json(const SceneSpec& spec) {
    return {{"seed", spec.seed},
            {"width", spec.width},
            {"height", spec.height},
            {"target_porosity", spec.target_porosity},
            {"smoothing_radius", spec.smoothing_radius},
            {"fracture_count", spec.fracture_count},
            {"fracture_width", spec.fracture_width},
            {"fracture_segments", spec.fracture_segments},
            {"pore_level", spec.pore_level},
            {"matrix_level", spec.matrix_level},
            {"jitter", spec.jitter}};
}

nlohmann::json mech_report_json(const MechReport& report) {
    nlohmann::json sims = nlohmann::json::array(), coarseners = nlohmann::json::array();
    for (const auto& m : report.sim_methods) sims.push_back(method_name(m));
    for (const auto& m : report.coarsen_methods) coarseners.push_back(method_name(m));
    nlohmann::json cells = nlohmann::json::array();
    for (std::size_t s = 0; s < report.sim_methods.size(); ++s) {
        for (std::size_t m = 0; m < report.coarsen_methods.size(); ++m) {
            const auto& q = report.cell(s, m);
            cells.push_back({{"sim", method_name(report.sim_methods[s])},
                             {"coarsener", method_name(report.coarsen_methods[m])},
                             {"mse", json_number(q.mse)},
                             {"psnr_db", json_number(q.psnr_db)},
                             {"ssim", json_number(q.ssim)}});
        }
    }
    return {{"hr_pitch", report.hr_pitch},
            {"scale", report.scale},
            {"max_i_policy", report.max_i_policy},
            {"sim_methods", std::move(sims)},
            {"coarsen_methods", std::move(coarseners)},
            {"cells", std::move(cells)},
            {"best_per_sim", report.best_per_sim},
            {"best_other_per_sim", report.best_other_per_sim}};
}

std::string mech_report_csv(const std::vector<MechReport>& reports) {
    std::string out = "sim,coarsener,hr_pitch,scale,mse,psnr_db,ssim\n";
    for (const auto& r : reports) {
        for (std::size_t s = 0; s < r.sim_methods.size(); ++s) {
            for (std::size_t m = 0; m < r.coarsen_methods.size(); ++m) {
                const auto& q = r.cell(s, m);
                out += std::string(method_name(r.sim_methods[s])) + ',' + std::string(method_name(r.coarsen_methods[m])) +
                       ',' + std::to_string(r.hr_pitch) + ',' + std::to_string(r.scale) + ',' + format_number(q.mse) +
                       ',' + format_number(q.psnr_db) + ',' + format_number(q.ssim) + '\n';
            }
        }
    }
    return out;
}

}  // namespace corescale
