#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "corescale/analysis.hpp"
#include "corescale/image.hpp"
#include "corescale/resample.hpp"

namespace corescale {

/// Parameters of the procedural porous scene used as ground truth.
///
/// The scene is a seeded white-noise field, box-smoothed twice at
/// smoothing_radius and thresholded at the quantile that yields
/// target_porosity (pores dark). Dark fracture polylines are drawn on top and
/// per-pixel jitter keeps the result non-binary. Jitter never crosses
/// pore_threshold(), so the pore fraction is measurable exactly.
struct SceneSpec {
    std::uint64_t seed = 42;
    std::size_t width = 1024;
    std::size_t height = 1024;
    double target_porosity = 0.15;
    std::size_t smoothing_radius = 40;
    std::size_t fracture_count = 2;
    double fracture_width = 2.0;
    std::size_t fracture_segments = 6;
    double pore_level = 0.1;
    double matrix_level = 0.9;
    double jitter = 0.36;

    double pore_threshold() const noexcept { return 0.5 * (pore_level + matrix_level); }
};

GrayImage synth_groundtruth(const SceneSpec& spec);

/// Fraction of pixels below the scene's pore threshold.
double pore_fraction(const GrayImage& scene, const SceneSpec& spec);

/// A capture device modelled as coarsening by pitch with the given method.
GrayImage simulate_capture(const GrayImage& gt, const ResampleMethod& method, std::size_t pitch);

struct MechCell {
    ResampleMethod sim;
    ResampleMethod coarsener;
    QualityMetrics metrics;
};

struct MechReport {
    std::size_t hr_pitch = 1;
    std::size_t scale = 2;
    std::string max_i_policy;
    std::vector<ResampleMethod> sim_methods;
    std::vector<ResampleMethod> coarsen_methods;
    /// Row-major, sim_methods.size() x coarsen_methods.size().
    std::vector<QualityMetrics> matrix;
    /// Argmax coarsener per simulation method (PSNR, then SSIM, then name).
    std::map<std::string, std::string> best_per_sim;
    /// Same argmax with the simulation method itself left out.
    std::map<std::string, std::string> best_other_per_sim;

    const QualityMetrics& cell(std::size_t sim, std::size_t coarsener) const {
        return matrix[sim * coarsen_methods.size() + coarsener];
    }
};

struct MechOptions {
    SsimParams ssim;
};

/// For each simulated device S: A = capture(gt, S, hr_pitch),
/// B = capture(gt, S, hr_pitch * scale); for each coarsener M the cell holds
/// metrics(coarsen(A, scale, M), B) with MAX_I = peak-to-peak of B.
MechReport infer_mechanism(const GrayImage& gt, std::size_t hr_pitch, std::size_t scale,
                           const std::vector<ResampleMethod>& sim_methods,
                           const std::vector<ResampleMethod>& coarsen_methods, const MechOptions& options = {});

nlohmann::json scene_json(const SceneSpec& spec);
nlohmann::json mech_report_json(const MechReport& report);
/// One row per cell: sim,coarsener,hr_pitch,scale,mse,psnr_db,ssim.
std::string mech_report_csv(const std::vector<MechReport>& reports);

}  // namespace corescale
