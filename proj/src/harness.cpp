#include "corescale/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "corescale/error.hpp"
#include "corescale/image_io.hpp"

namespace corescale {
namespace {

void check_alignment(const PairedSample& s) {
    const auto& a = s.alignment;
    if (!s.hr || !s.lr) throw Error("misaligned", "sample '" + s.id + "' is missing an image");
    const bool dims_ok = a.hr_rect.w == a.lr_rect.w * s.factor && a.hr_rect.h == a.lr_rect.h * s.factor;
    const bool hr_fits = a.hr_rect.x0 + a.hr_rect.w <= s.hr->width() && a.hr_rect.y0 + a.hr_rect.h <= s.hr->height();
    const bool lr_fits = a.lr_rect.x0 + a.lr_rect.w <= s.lr->width() && a.lr_rect.y0 + a.lr_rect.h <= s.lr->height();
    if (!dims_ok || !hr_fits || !lr_fits || a.factor != s.factor) {
        throw Error("misaligned", "sample '" + s.id + "' has inconsistent alignment rectangles");
    }
}

QualityReport evaluate(const std::vector<PairedSample>& samples, const std::vector<ResampleMethod>& methods,
                       const EvalOptions& options, Direction direction) {
    if (samples.empty()) throw Error("empty", "no samples to evaluate");
    if (methods.empty()) throw Error("empty", "no methods to evaluate");
    for (const auto& s : samples) check_alignment(s);

    QualityReport report;
    report.max_i_policy = options.max_i.describe();
    report.normalized = options.normalize;
    report.ssim_window = options.ssim.window == SsimWindow::gaussian ? "gaussian" : "global";

    const std::size_t n_methods = methods.size();
    const std::size_t total = samples.size() * n_methods;
    report.rows.resize(total);
    std::vector<std::exception_ptr> failures(total);

    // Reference crops are shared by all methods of a sample.
    std::vector<GrayImage> sources, references;
    sources.reserve(samples.size());
    references.reserve(samples.size());
    for (const auto& s : samples) {
        GrayImage hr = s.hr_crop(), lr = s.lr_crop();
        if (direction == Direction::coarsen) {
            sources.push_back(std::move(hr));
            references.push_back(options.normalize ? zscore(lr) : std::move(lr));
        } else {
            sources.push_back(std::move(lr));
            references.push_back(options.normalize ? zscore(hr) : std::move(hr));
        }
    }

#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(total); ++k) {
        const std::size_t si = static_cast<std::size_t>(k) / n_methods;
        const std::size_t mi = static_cast<std::size_t>(k) % n_methods;
        try {
            const PairedSample& s = samples[si];
            GrayImage generated = direction == Direction::coarsen ? coarsen(sources[si], s.factor, methods[mi])
                                                                  : refine(sources[si], s.factor, methods[mi]);
            if (options.normalize) generated = zscore(generated);
            ReportRow& row = report.rows[static_cast<std::size_t>(k)];
            row.method = methods[mi];
            row.factor = s.factor;
            row.sample = s.id;
            row.direction = direction;
            row.metrics = compute_metrics(generated, references[si], options.max_i, options.ssim);
        } catch (...) {
            failures[static_cast<std::size_t>(k)] = std::current_exception();
        }
    }
    for (const auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }
    return report;
}

std::string sanitize(std::string_view id) {
    std::string out;
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
        out.push_back(ok ? c : '_');
    }
    return out.empty() ? std::string("sample") : out;
}

std::string patch_name(std::string_view sample, std::size_t k) {
    std::ostringstream os;
    os << sanitize(sample) << '_';
    os.width(5);
    os.fill('0');
    os << k << ".png";
    return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw Error("io", "write failed for '" + path.string() + "'");
}

}  // namespace

std::vector<CorpusEntry> load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("io", "cannot open corpus '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("format", "corpus '" + path.string() + "' is not valid JSON: " + e.what());
    }
    if (!j.is_array()) throw Error("format", "corpus must be a JSON array");
    const auto base = path.parent_path();
    std::vector<CorpusEntry> entries;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& e = j[i];
        try {
            CorpusEntry c;
            c.hr = base / e.at("hr").get<std::string>();
            c.lr = base / e.at("lr").get<std::string>();
            c.factor = e.at("factor").get<std::size_t>();
            c.region = e.value("region", std::string());
            c.device = e.value("device", std::string());
            c.id = e.value("id", "s" + std::to_string(i));
            if (c.factor == 0) throw Error("format", "corpus entry factor must be at least 1");
            entries.push_back(std::move(c));
        } catch (const nlohmann::json::exception& ex) {
            throw Error("format", "corpus entry " + std::to_string(i) + ": " + ex.what());
        }
    }
    return entries;
}

GrayImage PairedSample::hr_crop() const { return crop(*hr, alignment.hr_rect); }
GrayImage PairedSample::lr_crop() const { return crop(*lr, alignment.lr_rect); }

PairedSample make_sample(std::string id, GrayImage hr, GrayImage lr, std::size_t factor,
                         const ResampleMethod& pair_method, const PairingOptions& options, std::string region,
                         std::string device) {
    PairedSample s;
    s.alignment = pair_images(hr, lr, factor, pair_method, options);
    s.id = std::move(id);
    s.hr = std::make_shared<const GrayImage>(std::move(hr));
    s.lr = std::make_shared<const GrayImage>(std::move(lr));
    s.factor = factor;
    s.region_tag = std::move(region);
    s.device_tag = std::move(device);
    return s;
}

std::vector<PairedSample> prepare_corpus(const std::vector<CorpusEntry>& entries, const ResampleMethod& pair_method,
                                         const PairingOptions& options) {
    std::vector<PairedSample> samples;
    samples.reserve(entries.size());
    for (const auto& e : entries) {
        try {
            samples.push_back(make_sample(e.id, load_image(e.hr), load_image(e.lr), e.factor, pair_method, options,
                                          e.region, e.device));
        } catch (const Error& err) {
            throw Error(err.code(), "sample '" + e.id + "': " + err.what());
        }
    }
    return samples;
}

std::string_view direction_name(Direction d) noexcept { return d == Direction::coarsen ? "coarsen" : "refine"; }

Direction parse_direction(std::string_view name) {
    if (name == "coarsen") return Direction::coarsen;
    if (name == "refine") return Direction::refine;
    throw Error("config", "unknown direction '" + std::string(name) + "' (coarsen or refine)");
}

QualityReport coarsen_eval(const std::vector<PairedSample>& samples, const std::vector<ResampleMethod>& methods,
                           const EvalOptions& options) {
    return evaluate(samples, methods, options, Direction::coarsen);
}

QualityReport refine_eval(const std::vector<PairedSample>& samples, const std::vector<ResampleMethod>& methods,
                          const EvalOptions& options) {
    return evaluate(samples, methods, options, Direction::refine);
}

RankKey parse_rank_key(std::string_view name) {
    if (name == "psnr") return RankKey::psnr;
    if (name == "ssim") return RankKey::ssim;
    if (name == "mean_rank" || name == "both") return RankKey::mean_rank;
    throw Error("config", "unknown rank key '" + std::string(name) + "'");
}

std::vector<MethodScore> rank_methods(const QualityReport& report, RankKey key) {
    if (report.rows.empty()) throw Error("empty", "cannot rank an empty report");

    std::vector<MethodScore> scores;
    std::vector<std::size_t> counts;
    for (const auto& row : report.rows) {
        auto it = std::find_if(scores.begin(), scores.end(), [&](const MethodScore& s) { return s.method == row.method; });
        if (it == scores.end()) {
            scores.push_back({row.method, 0.0, 0.0, 0.0});
            counts.push_back(0);
            it = scores.end() - 1;
        }
        const auto i = static_cast<std::size_t>(it - scores.begin());
        it->mean_psnr += row.metrics.psnr_db;
        it->mean_ssim += row.metrics.ssim;
        ++counts[i];
    }
    for (std::size_t i = 0; i < scores.size(); ++i) {
        scores[i].mean_psnr /= static_cast<double>(counts[i]);
        scores[i].mean_ssim /= static_cast<double>(counts[i]);
    }

    auto by_psnr = [](const MethodScore& a, const MethodScore& b) {
        if (a.mean_psnr != b.mean_psnr) return a.mean_psnr > b.mean_psnr;
        if (a.mean_ssim != b.mean_ssim) return a.mean_ssim > b.mean_ssim;
        return method_name(a.method) < method_name(b.method);
    };
    auto by_ssim = [](const MethodScore& a, const MethodScore& b) {
        if (a.mean_ssim != b.mean_ssim) return a.mean_ssim > b.mean_ssim;
        if (a.mean_psnr != b.mean_psnr) return a.mean_psnr > b.mean_psnr;
        return method_name(a.method) < method_name(b.method);
    };

    // Competition ranks (1-based); methods with equal metric share a rank.
    auto assign_ranks = [&](auto order, auto metric) {
        std::vector<MethodScore> sorted = scores;
        std::sort(sorted.begin(), sorted.end(), order);
        std::map<std::string, double> rank;
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            std::size_t r = i;
            while (r > 0 && metric(sorted[r - 1]) == metric(sorted[i])) --r;
            rank[std::string(method_name(sorted[i].method))] = static_cast<double>(r + 1);
        }
        return rank;
    };

    switch (key) {
        case RankKey::psnr: std::sort(scores.begin(), scores.end(), by_psnr); break;
        case RankKey::ssim: std::sort(scores.begin(), scores.end(), by_ssim); break;
        case RankKey::mean_rank: {
            const auto rp = assign_ranks(by_psnr, [](const MethodScore& s) { return s.mean_psnr; });
            const auto rs = assign_ranks(by_ssim, [](const MethodScore& s) { return s.mean_ssim; });
            for (auto& s : scores) {
                const std::string name(method_name(s.method));
                s.mean_rank = 0.5 * (rp.at(name) + rs.at(name));
            }
            std::sort(scores.begin(), scores.end(), [&](const MethodScore& a, const MethodScore& b) {
                if (a.mean_rank != b.mean_rank) return a.mean_rank < b.mean_rank;
                return by_psnr(a, b);
            });
            break;
        }
    }
    return scores;
}

ReportFormat parse_report_format(std::string_view name) {
    if (name == "csv") return ReportFormat::csv;
    if (name == "json") return ReportFormat::json;
    throw Error("config", "unknown report format '" + std::string(name) + "' (csv or json)");
}

std::string format_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

nlohmann::json json_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

std::string report_csv(const QualityReport& report) {
    std::string out = "method,factor,sample,direction,mse,psnr_db,ssim\n";
    for (const auto& r : report.rows) {
        out += method_name(r.method);
        out += ',' + std::to_string(r.factor) + ',' + r.sample + ',';
        out += direction_name(r.direction);
        out += ',' + format_number(r.metrics.mse) + ',' + format_number(r.metrics.psnr_db) + ',' +
               format_number(r.metrics.ssim) + '\n';
    }
    return out;
}

nlohmann::json report_json(const QualityReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"method", method_name(r.method)},
                        {"factor", r.factor},
                        {"sample", r.sample},
                        {"direction", direction_name(r.direction)},
                        {"mse", json_number(r.metrics.mse)},
                        {"psnr_db", json_number(r.metrics.psnr_db)},
                        {"ssim", json_number(r.metrics.ssim)}});
    }
    return {{"max_i_policy", report.max_i_policy},
            {"normalized", report.normalized},
            {"ssim_window", report.ssim_window},
            {"rows", std::move(rows)}};
}

void export_report(const QualityReport& report, ReportFormat format, const std::filesystem::path& path) {
    write_text(path, format == ReportFormat::csv ? report_csv(report) : report_json(report).dump(2) + "\n");
}

nlohmann::json DatasetManifest::to_json() const {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& e : entries) {
        items.push_back({{"hr_patch", e.hr_patch}, {"lr_refined_patch", e.lr_refined_patch}, {"sample", e.sample}});
    }
    return {{"version", version}, {"factor", factor}, {"patch_size", patch_size}, {"stride", stride},
            {"tau", tau},         {"method", method}, {"entries", std::move(items)}};
}

DatasetManifest DatasetManifest::from_json(const nlohmann::json& j) {
    DatasetManifest m;
    try {
        m.version = j.at("version").get<std::string>();
        if (m.version != kManifestVersion) throw Error("format", "unsupported manifest version '" + m.version + "'");
        m.factor = j.at("factor").get<std::size_t>();
        m.patch_size = j.at("patch_size").get<std::size_t>();
        m.stride = j.at("stride").get<std::size_t>();
        m.tau = j.at("tau").get<double>();
        m.method = j.at("method").get<std::string>();
        for (const auto& e : j.at("entries")) {
            m.entries.push_back({e.at("hr_patch").get<std::string>(), e.at("lr_refined_patch").get<std::string>(),
                                 e.at("sample").get<std::string>()});
        }
    } catch (const nlohmann::json::exception& ex) {
        throw Error("format", std::string("malformed manifest: ") + ex.what());
    }
    return m;
}

std::size_t patch_count(std::size_t extent, std::size_t patch_size, std::size_t stride) {
    if (patch_size == 0 || stride == 0 || patch_size > extent) return 0;
    return (extent - patch_size) / stride + 1;
}

DatasetManifest build_manifest(const std::vector<PairedSample>& samples, const ResampleMethod& method,
                               std::size_t patch_size, std::size_t stride, double tau,
                               const std::filesystem::path& out_dir, const ManifestOptions& options) {
    if (patch_size == 0) throw Error("config", "patch size must be positive");
    if (stride == 0) throw Error("config", "stride must be at least 1");

    std::vector<const PairedSample*> used;
    for (const auto& s : samples) {
        check_alignment(s);
        if (s.factor >= 16 && !options.include_16x) continue;
        used.push_back(&s);
    }
    if (used.empty()) throw Error("empty", "no samples eligible for the manifest");
    for (const auto* s : used) {
        if (s->factor != used.front()->factor) throw Error("config", "manifest samples must share one factor");
    }

    DatasetManifest manifest;
    manifest.factor = used.front()->factor;
    manifest.patch_size = patch_size;
    manifest.stride = stride;
    manifest.tau = tau;
    manifest.method = std::string(method_name(method));

    // Geometry is validated before anything touches the filesystem.
    for (const auto* s : used) {
        const auto& r = s->alignment.hr_rect;
        const std::size_t f = s->factor;
        if (patch_size > (r.w / f) * f || patch_size > (r.h / f) * f) {
            throw Error("patch_too_large", "patch " + std::to_string(patch_size) + " exceeds crop of sample '" +
                                               s->id + "' (" + std::to_string(r.w) + "x" + std::to_string(r.h) + ")");
        }
    }

    std::error_code ec;
    std::filesystem::create_directories(out_dir / "hr", ec);
    if (!ec) std::filesystem::create_directories(out_dir / "lr", ec);
    if (ec) throw Error("io", "cannot create '" + out_dir.string() + "': " + ec.message());

    for (const auto* s : used) {
        const GrayImage hr_z = zscore(s->hr_crop());
        const BinaryImage hr_bin = binarize(hr_z, tau);
        const GrayImage lr_z = refine(coarsen(hr_z, s->factor, method), s->factor, method);

        std::vector<double> lr_scaled(lr_z.size());
        for (std::size_t i = 0; i < lr_scaled.size(); ++i) {
            lr_scaled[i] = std::clamp(0.5 + (lr_z.pixels()[i] - tau) / kLrRescaleSpan, 0.0, 1.0);
        }
        const GrayImage lr_img(lr_z.width(), lr_z.height(), std::move(lr_scaled));
        const GrayImage hr_img = hr_bin.to_gray();

        const std::size_t nx = patch_count(lr_img.width(), patch_size, stride);
        const std::size_t ny = patch_count(lr_img.height(), patch_size, stride);
        std::size_t k = 0;
        for (std::size_t py = 0; py < ny; ++py) {
            for (std::size_t px = 0; px < nx; ++px, ++k) {
                const Rect r{px * stride, py * stride, patch_size, patch_size};
                const std::string name = patch_name(s->id, k);
                save_image(crop(hr_img, r), out_dir / "hr" / name, 8);
                save_image(crop(lr_img, r), out_dir / "lr" / name, 16);
                manifest.entries.push_back({"hr/" + name, "lr/" + name, s->id});
            }
        }
    }
    write_text(out_dir / "manifest.json", manifest.to_json().dump(2) + "\n");
    return manifest;
}

}  // namespace corescale
