#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "corescale/analysis.hpp"
#include "corescale/image.hpp"
#include "corescale/registration.hpp"
#include "corescale/resample.hpp"

namespace corescale {

inline constexpr std::string_view kManifestVersion = "corescale-manifest/1";

/// One line of a corpus description file. Paths are resolved against the
/// corpus file's directory.
struct CorpusEntry {
    std::string id;
    std::filesystem::path hr;
    std::filesystem::path lr;
    std::size_t factor = 2;
    std::string region;
    std::string device;
};

/// Reads a JSON array of {hr, lr, factor, region, device[, id]} objects.
std::vector<CorpusEntry> load_corpus(const std::filesystem::path& path);

struct PairedSample {
    std::string id;
    std::shared_ptr<const GrayImage> hr;
    std::shared_ptr<const GrayImage> lr;
    std::size_t factor = 2;
    PairAlignment alignment;
    std::string region_tag;
    std::string device_tag;

    GrayImage hr_crop() const;
    GrayImage lr_crop() const;
};

/// Registers hr against lr and packages the pair.
PairedSample make_sample(std::string id, GrayImage hr, GrayImage lr, std::size_t factor,
                         const ResampleMethod& pair_method, const PairingOptions& options = {},
                         std::string region = {}, std::string device = {});

/// Loads and registers every corpus entry, in corpus order.
std::vector<PairedSample> prepare_corpus(const std::vector<CorpusEntry>& entries, const ResampleMethod& pair_method,
                                         const PairingOptions& options = {});

enum class Direction { coarsen, refine };
std::string_view direction_name(Direction d) noexcept;
Direction parse_direction(std::string_view name);

struct ReportRow {
    ResampleMethod method;
    std::size_t factor = 1;
    std::string sample;
    Direction direction = Direction::coarsen;
    QualityMetrics metrics;
};

struct QualityReport {
    std::vector<ReportRow> rows;
    std::string max_i_policy;
    bool normalized = true;
    std::string ssim_window = "gaussian";
};

struct EvalOptions {
    /// Z-score both the generated and the real image before comparing.
    bool normalize = true;
    MaxIPolicy max_i = MaxIPolicy::reference_range();
    SsimParams ssim;
};

/// Coarsens each aligned HR crop with every method and scores it against the
/// real LR crop. Rows are ordered (sample, method) whatever the thread count.
QualityReport coarsen_eval(const std::vector<PairedSample>& samples, const std::vector<ResampleMethod>& methods,
                           const EvalOptions& options = {});

/// Refines each aligned LR crop with every method and scores it against the
/// real HR crop.
QualityReport refine_eval(const std::vector<PairedSample>& samples, const std::vector<ResampleMethod>& methods,
                          const EvalOptions& options = {});

enum class RankKey { psnr, ssim, mean_rank };
RankKey parse_rank_key(std::string_view name);

struct MethodScore {
    ResampleMethod method;
    double mean_psnr = 0.0;
    double mean_ssim = 0.0;
    double mean_rank = 0.0;
};

/// Methods ordered best first by mean metric over all rows. Ties fall back to
/// the other metric, then to the method name.
std::vector<MethodScore> rank_methods(const QualityReport& report, RankKey key);

enum class ReportFormat { csv, json };
ReportFormat parse_report_format(std::string_view name);

std::string report_csv(const QualityReport& report);
nlohmann::json report_json(const QualityReport& report);
void export_report(const QualityReport& report, ReportFormat format, const std::filesystem::path& path);

/// Shortest round-trip decimal; infinities print as "inf"/"-inf".
std::string format_number(double v);
/// Number, or the string "inf" for +infinity.
nlohmann::json json_number(double v);

struct ManifestEntry {
    std::string hr_patch;
    std::string lr_refined_patch;
    std::string sample;
};

struct DatasetManifest {
    std::string version{kManifestVersion};
    std::size_t factor = 2;
    std::size_t patch_size = 41;
    std::size_t stride = 41;
    double tau = 0.0;
    std::string method;
    std::vector<ManifestEntry> entries;

    nlohmann::json to_json() const;
    static DatasetManifest from_json(const nlohmann::json& j);
};

struct ManifestOptions {
    bool include_16x = false;
};

/// Span of z-scores mapped onto [0, 1] for the continuous LR patches; tau
/// lands on 0.5.
inline constexpr double kLrRescaleSpan = 6.0;

/// Builds paired training patches: binarized z-scored HR crops and continuous
/// refine(coarsen(HR)) crops, tiled at the given stride. Writes hr/ and lr/
/// PNG patches plus manifest.json under out_dir.
DatasetManifest build_manifest(const std::vector<PairedSample>& samples, const ResampleMethod& method,
                               std::size_t patch_size, std::size_t stride, double tau,
                               const std::filesystem::path& out_dir, const ManifestOptions& options = {});

/// Patch origins along one axis: 0, stride, ... while origin + patch <= extent.
std::size_t patch_count(std::size_t extent, std::size_t patch_size, std::size_t stride);

}  // namespace corescale
