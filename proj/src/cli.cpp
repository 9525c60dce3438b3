#include "corescale/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>

#include "CLI11.hpp"
#include "json.hpp"

#include "corescale/analysis.hpp"
#include "corescale/error.hpp"
#include "corescale/harness.hpp"
#include "corescale/image_io.hpp"
#include "corescale/mechsim.hpp"
#include "corescale/parallel.hpp"
#include "corescale/registration.hpp"
#include "corescale/resample.hpp"

namespace corescale::cli {
namespace {

using nlohmann::json;

constexpr const char* kGlossary = R"(Terminology:
  coarsen  generate a low-resolution image (larger pixel pitch), --scale 1/N.
           Called "upscaling" in the micrograph literature (the pitch grows).
  refine   generate a high-resolution-sized image by interpolation, --scale N.
           Called "downscaling" there.
Methods: nearest, box, bilinear, bicubic, lanczos2, lanczos3 (or "all").
Environment: COREScale_THREADS sets the default for --threads.
Exit codes: 0 success, 1 domain error, 2 usage error.)";

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("io", "cannot open '" + path.string() + "' for writing");
    f << text;
    if (!f) throw Error("io", "write failed for '" + path.string() + "'");
}

json rect_json(const Rect& r) { return {{"x0", r.x0}, {"y0", r.y0}, {"w", r.w}, {"h", r.h}}; }

json alignment_json(const PairAlignment& a) {
    return {{"offset_x", a.offset_x}, {"offset_y", a.offset_y},       {"score", a.score},
            {"factor", a.factor},     {"hr_rect", rect_json(a.hr_rect)}, {"lr_rect", rect_json(a.lr_rect)}};
}

SsimWindow parse_window(const std::string& s) {
    if (s == "gaussian") return SsimWindow::gaussian;
    if (s == "global") return SsimWindow::global;
    throw Error("config", "unknown SSIM window '" + s + "'");
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::string_view rest = text;
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const std::string token(rest.substr(0, comma));
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        if (token.empty()) continue;
        try {
            std::size_t used = 0;
            const auto v = std::stoull(token, &used);
            if (used != token.size() || v == 0) throw std::invalid_argument(token);
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw Error("config", "expected a positive integer list, got '" + text + "'");
        }
    }
    if (out.empty()) throw Error("config", "empty integer list");
    return out;
}

// --config expansion. The file has the same shape as the echo written by
// every run: {"subcommand": ..., "threads": ..., "options": {...}}. Options
// from the file are inserted ahead of explicit flags, which therefore win.
void expand_config(std::vector<std::string>& args, const std::set<std::string>& subcommands) {
    std::optional<std::string> path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (!path) return;

    std::ifstream in(*path);
    if (!in) throw Error("io", "cannot open config '" + *path + "'");
    json cfg;
    try {
        in >> cfg;
    } catch (const json::exception& e) {
        throw Error("format", "config '" + *path + "' is not valid JSON: " + e.what());
    }

    auto sub_it = std::find_if(args.begin(), args.end(), [&](const std::string& a) { return subcommands.count(a) > 0; });
    if (sub_it == args.end()) {
        if (!cfg.contains("subcommand")) throw Error("config", "config file names no subcommand");
        args.insert(args.begin(), cfg["subcommand"].get<std::string>());
        sub_it = args.begin();
    }
    std::vector<std::string> extra;
    const json options = cfg.value("options", json::object());
    for (auto it = options.begin(); it != options.end(); ++it) {
        const std::string& key = it.key();
        const json& value = it.value();
        if (value.is_boolean()) {
            if (value.get<bool>()) extra.push_back("--" + key);
        } else if (value.is_string()) {
            extra.push_back("--" + key);
            extra.push_back(value.get<std::string>());
        } else if (value.is_number()) {
            extra.push_back("--" + key);
            extra.push_back(value.dump());
        } else {
            throw Error("config", "config option '" + key + "' must be a string, number or boolean");
        }
    }
    const auto pos = (sub_it - args.begin()) + 1;
    args.insert(args.begin() + pos, extra.begin(), extra.end());
    if (cfg.contains("threads") && cfg["threads"].is_number_integer()) {
        args.insert(args.begin(), {"--threads", std::to_string(cfg["threads"].get<int>())});
    }
}

json effective_options(const CLI::App& sub) {
    json opts = json::object();
    for (const CLI::Option* opt : sub.get_options()) {
        if (opt == sub.get_help_ptr() || opt->get_lnames().empty()) continue;
        const std::string& name = opt->get_lnames().front();
        if (name == "echo") continue;
        if (opt->get_expected_min() == 0) {
            opts[name] = opt->count() > 0;
        } else if (opt->count() > 0) {
            opts[name] = opt->as<std::string>();
        } else if (!opt->get_default_str().empty()) {
            opts[name] = opt->get_default_str();
        }
    }
    return opts;
}

struct Context {
    std::ostream& out;
    std::ostream& err;
};

}  // namespace

ScaleArg parse_scale(const std::string& text) {
    auto parse_positive = [&](const std::string& s) {
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size() || v == 0) throw Error("config", "invalid scale '" + text + "' (use 1/N or N)");
        return static_cast<std::size_t>(v);
    };
    if (text.rfind("1/", 0) == 0) return {parse_positive(text.substr(2)), true};
    return {parse_positive(text), false};
}

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Resampling benchmark and dataset toolkit for paired-resolution micrographs", "corescale"};
    app.footer(kGlossary);
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();

    int threads = 0;
    if (const char* env = std::getenv("COREScale_THREADS")) threads = std::atoi(env);
    app.add_option("--threads", threads, "Worker threads (0 = runtime default)");
    std::string config_path;
    app.add_option("--config", config_path, "JSON config (same shape as the echo file); flags override it");

    Context ctx{out, err};
    std::map<std::string, std::function<std::filesystem::path()>> actions;
    std::map<std::string, std::string> echo_paths;

    auto add_echo = [&](CLI::App* sub) {
        sub->add_option("--echo", echo_paths[sub->get_name()],
                        "Config echo path (default: <output>.config.json)");
    };

    // resize ---------------------------------------------------------------
    struct {
        std::string in, out, method = "bilinear", scale = "1/2";
        bool no_antialias = false;
        int bit_depth = 8;
    } rz;
    {
        auto* s = app.add_subcommand("resize", "Coarsen (--scale 1/N) or refine (--scale N) one image");
        s->add_option("--in", rz.in, "Input PGM/PNG")->required();
        s->add_option("--out", rz.out, "Output .pgm/.png")->required();
        s->add_option("--method", rz.method, "Resampling method");
        s->add_option("--scale", rz.scale, "1/N coarsens by N, N refines by N");
        s->add_flag("--no-antialias", rz.no_antialias, "Do not stretch the kernel when coarsening");
        s->add_option("--bit-depth", rz.bit_depth, "8 or 16");
        add_echo(s);
        actions["resize"] = [&]() -> std::filesystem::path {
            const auto img = load_image(rz.in);
            const auto m = parse_method(rz.method);
            const auto sc = parse_scale(rz.scale);
            GrayImage result = img;
            if (sc.coarsen && rz.no_antialias) {
                const std::size_t w = img.width() / sc.factor, h = img.height() / sc.factor;
                if (w == 0 || h == 0) throw Error("degenerate", "coarsening leaves an empty image");
                result = resize(img, {m, w, h, false});
            } else if (sc.coarsen) {
                result = coarsen(img, sc.factor, m);
            } else {
                result = refine(img, sc.factor, m);
            }
            save_image(result, rz.out, rz.bit_depth);
            ctx.out << "wrote " << rz.out << " (" << result.width() << "x" << result.height() << ")\n";
            return rz.out;
        };
    }

    // pair -----------------------------------------------------------------
    struct {
        std::string hr, lr, method = "bilinear", out;
        std::size_t factor = 2;
        double fraction = 1.0, floor = 0.5;
        bool zero_mean = false;
    } pr;
    {
        auto* s = app.add_subcommand("pair", "Register an HR/LR pair by normalized cross-correlation");
        s->add_option("--hr", pr.hr, "High-resolution image")->required();
        s->add_option("--lr", pr.lr, "Low-resolution image")->required();
        s->add_option("--factor", pr.factor, "Pixel pitch ratio");
        s->add_option("--method", pr.method, "Method used to coarsen the HR template");
        s->add_option("--template-fraction", pr.fraction, "Central template side fraction in (0, 1]");
        s->add_option("--score-floor", pr.floor, "Minimum accepted peak score");
        s->add_flag("--zero-mean", pr.zero_mean, "Mean-subtract both windows");
        s->add_option("--out", pr.out, "Write the alignment JSON here instead of stdout");
        add_echo(s);
        actions["pair"] = [&]() -> std::filesystem::path {
            const auto a = pair_images(load_image(pr.hr), load_image(pr.lr), pr.factor, parse_method(pr.method),
                                       {pr.fraction, pr.floor, pr.zero_mean});
            const std::string text = alignment_json(a).dump(2) + "\n";
            if (pr.out.empty()) {
                ctx.out << text;
                return "corescale-pair";
            }
            write_text(pr.out, text);
            return pr.out;
        };
    }

    // normalize ----------------------------------------------------------------
    struct {
        std::string in, out;
        int bit_depth = 16;
    } nz;
    {
        auto* s = app.add_subcommand("normalize", "Z-score an image; prints mean/std, optionally saves it");
        s->add_option("--in", nz.in, "Input image")->required();
        s->add_option("--out", nz.out, "Save 0.5 + z/6 clipped to [0,1]");
        s->add_option("--bit-depth", nz.bit_depth, "8 or 16");
        add_echo(s);
        actions["normalize"] = [&]() -> std::filesystem::path {
            const auto img = load_image(nz.in);
            const auto z = zscore(img);
            auto px = img.pixels();
            double mean = 0.0;
            for (double v : px) mean += v;
            mean /= static_cast<double>(px.size());
            double var = 0.0;
            for (double v : px) var += (v - mean) * (v - mean);
            json j = {{"width", img.width()},
                      {"height", img.height()},
                      {"mean", mean},
                      {"std", std::sqrt(var / static_cast<double>(px.size()))}};
            ctx.out << j.dump(2) << "\n";
            if (nz.out.empty()) return "corescale-normalize";
            std::vector<double> scaled(z.size());
            for (std::size_t i = 0; i < scaled.size(); ++i) {
                scaled[i] = std::clamp(0.5 + z.pixels()[i] / kLrRescaleSpan, 0.0, 1.0);
            }
            save_image(GrayImage(z.width(), z.height(), std::move(scaled)), nz.out, nz.bit_depth);
            return nz.out;
        };
    }

    // segment ------------------------------------------------------------------
    struct {
        std::string in, out;
        double tau = 0.5;
        bool zscore_first = false;
    } sg;
    {
        auto* s = app.add_subcommand("segment", "Threshold an image into a binary image (1 where pixel >= tau)");
        s->add_option("--in", sg.in, "Input image")->required();
        s->add_option("--out", sg.out, "Binary output (0/255)")->required();
        s->add_option("--tau", sg.tau, "Threshold");
        s->add_flag("--zscore", sg.zscore_first, "Z-score before thresholding");
        add_echo(s);
        actions["segment"] = [&]() -> std::filesystem::path {
            auto img = load_image(sg.in);
            if (sg.zscore_first) img = zscore(img);
            const auto b = binarize(img, sg.tau);
            save_image(b.to_gray(), sg.out, 8);
            ctx.out << json{{"threshold", b.threshold_used}, {"fraction_set", b.fraction_set()}}.dump(2) << "\n";
            return sg.out;
        };
    }

    // metrics ------------------------------------------------------------------
    struct {
        std::string a, b, window = "gaussian";
        double max_i = 1.0;
        bool normalize = false;
    } mt;
    {
        auto* s = app.add_subcommand("metrics", "MSE / PSNR / SSIM of --a against reference --b");
        s->add_option("--a", mt.a, "Candidate image")->required();
        s->add_option("--b", mt.b, "Reference image")->required();
        s->add_option("--max-i", mt.max_i, "MAX_I in the [0,1] pixel domain (1 == 255 on 8-bit data)");
        s->add_flag("--normalize", mt.normalize, "Z-score both; MAX_I becomes the reference peak-to-peak range");
        s->add_option("--ssim", mt.window, "gaussian or global");
        add_echo(s);
        actions["metrics"] = [&]() -> std::filesystem::path {
            GrayImage a = load_image(mt.a), b = load_image(mt.b);
            MaxIPolicy policy = MaxIPolicy::fixed(mt.max_i);
            if (mt.normalize) {
                a = zscore(a);
                b = zscore(b);
                policy = MaxIPolicy::reference_range();
            }
            SsimParams p;
            p.window = parse_window(mt.window);
            const auto q = compute_metrics(a, b, policy, p);
            ctx.out << json{{"mse", json_number(q.mse)},
                            {"psnr_db", json_number(q.psnr_db)},
                            {"ssim", json_number(q.ssim)},
                            {"max_i", policy.resolve(b)},
                            {"max_i_policy", policy.describe()}}
                           .dump(2)
                    << "\n";
            return "corescale-metrics";
        };
    }

    // bench --------------------------------------------------------------------
    struct {
        std::string corpus, direction = "coarsen", methods = "all", report, format, pair_method = "bilinear";
        std::string window = "gaussian", rank = "psnr";
        double fraction = 1.0, floor = 0.5;
        bool zero_mean = false, no_normalize = false;
    } bn;
    {
        auto* s = app.add_subcommand("bench", "Score every method on a paired corpus and rank them");
        s->add_option("--corpus", bn.corpus, "Corpus JSON")->required();
        s->add_option("--direction", bn.direction, "coarsen or refine");
        s->add_option("--methods", bn.methods, "Comma-separated methods or 'all'");
        s->add_option("--report", bn.report, "Report output path")->required();
        s->add_option("--format", bn.format, "csv or json (default: from the report extension)");
        s->add_option("--pair-method", bn.pair_method, "Method used for registration");
        s->add_option("--template-fraction", bn.fraction, "Central template side fraction");
        s->add_option("--score-floor", bn.floor, "Minimum pairing score");
        s->add_flag("--zero-mean", bn.zero_mean, "Zero-mean correlation for pairing");
        s->add_flag("--no-normalize", bn.no_normalize, "Compare raw intensities with MAX_I = 1");
        s->add_option("--ssim", bn.window, "gaussian or global");
        s->add_option("--rank", bn.rank, "psnr, ssim or mean_rank");
        add_echo(s);
        actions["bench"] = [&]() -> std::filesystem::path {
            const auto samples = prepare_corpus(load_corpus(bn.corpus), parse_method(bn.pair_method),
                                                {bn.fraction, bn.floor, bn.zero_mean});
            EvalOptions opt;
            opt.normalize = !bn.no_normalize;
            opt.max_i = opt.normalize ? MaxIPolicy::reference_range() : MaxIPolicy::fixed(1.0);
            opt.ssim.window = parse_window(bn.window);
            const auto methods = parse_method_list(bn.methods);
            const auto report = parse_direction(bn.direction) == Direction::coarsen ? coarsen_eval(samples, methods, opt)
                                                                                     : refine_eval(samples, methods, opt);
            std::string fmt = bn.format;
            if (fmt.empty()) fmt = std::filesystem::path(bn.report).extension() == ".json" ? "json" : "csv";
            export_report(report, parse_report_format(fmt), bn.report);
            const auto ranking = rank_methods(report, parse_rank_key(bn.rank));
            for (std::size_t i = 0; i < ranking.size(); ++i) {
                ctx.out << i + 1 << ' ' << method_name(ranking[i].method) << " psnr=" << format_number(ranking[i].mean_psnr)
                        << " ssim=" << format_number(ranking[i].mean_ssim) << "\n";
            }
            return bn.report;
        };
    }

    // mechsim ------------------------------------------------------------------
    SceneSpec scene;
    struct {
        std::size_t size = 1024, hr_pitch = 2;
        std::string scales = "2,4", sims = "all", methods = "all", out, csv, dump_dir, window = "gaussian";
    } ms;
    {
        auto* s = app.add_subcommand("mechsim", "Infer which coarsener reproduces each simulated capture device");
        s->add_option("--seed", scene.seed, "Scene seed");
        s->add_option("--size", ms.size, "Scene width and height (>= 512)");
        s->add_option("--porosity", scene.target_porosity, "Target pore fraction in [0, 1)");
        s->add_option("--smoothing", scene.smoothing_radius, "Blob smoothing radius (pixels)");
        s->add_option("--fractures", scene.fracture_count, "Number of fracture polylines");
        s->add_option("--fracture-width", scene.fracture_width, "Fracture width (pixels)");
        s->add_option("--jitter", scene.jitter, "Per-pixel uniform jitter amplitude");
        s->add_option("--hr-pitch", ms.hr_pitch, "Pitch of the simulated HR capture");
        s->add_option("--scales", ms.scales, "Comma-separated LR/HR pitch ratios");
        s->add_option("--sim-methods", ms.sims, "Simulated capture methods");
        s->add_option("--methods", ms.methods, "Candidate coarseners");
        s->add_option("--ssim", ms.window, "gaussian or global");
        s->add_option("--out", ms.out, "Report JSON")->required();
        s->add_option("--csv", ms.csv, "Optional CSV matrix");
        s->add_option("--dump-dir", ms.dump_dir, "Optional directory for PGM dumps of the scene and captures");
        add_echo(s);
        actions["mechsim"] = [&]() -> std::filesystem::path {
            scene.width = scene.height = ms.size;
            const auto gt = synth_groundtruth(scene);
            const auto sims = parse_method_list(ms.sims);
            const auto methods = parse_method_list(ms.methods);
            MechOptions opt;
            opt.ssim.window = parse_window(ms.window);
            std::vector<MechReport> reports;
            json jr = json::array();
            for (auto scale : parse_size_list(ms.scales)) {
                reports.push_back(infer_mechanism(gt, ms.hr_pitch, scale, sims, methods, opt));
                jr.push_back(mech_report_json(reports.back()));
            }
            const json doc = {{"scene", scene_json(scene)},
                              {"pore_fraction", pore_fraction(gt, scene)},
                              {"reports", std::move(jr)}};
            write_text(ms.out, doc.dump(2) + "\n");
            if (!ms.csv.empty()) write_text(ms.csv, mech_report_csv(reports));
            if (!ms.dump_dir.empty()) {
                const std::filesystem::path dir = ms.dump_dir;
                std::filesystem::create_directories(dir);
                save_image(gt, dir / "scene.pgm", 16);
                for (const auto& sm : sims) {
                    const std::string name(method_name(sm));
                    save_image(simulate_capture(gt, sm, ms.hr_pitch), dir / ("A_" + name + ".pgm"), 16);
                    for (const auto& r : reports) {
                        save_image(simulate_capture(gt, sm, ms.hr_pitch * r.scale),
                                   dir / ("B_" + name + "_s" + std::to_string(r.scale) + ".pgm"), 16);
                    }
                }
            }
            for (const auto& r : reports) {
                for (const auto& [sim, best] : r.best_per_sim) {
                    ctx.out << "scale " << r.scale << ": sim=" << sim << " best=" << best
                            << " best_other=" << r.best_other_per_sim.at(sim) << "\n";
                }
            }
            return ms.out;
        };
    }

    // dataset ------------------------------------------------------------------
    struct {
        std::string corpus, method = "bilinear", out_dir, pair_method = "bilinear";
        std::size_t patch = 41, stride = 41;
        double tau = 0.0, fraction = 1.0, floor = 0.5;
        bool include_16x = false, zero_mean = false;
    } ds;
    {
        auto* s = app.add_subcommand("dataset", "Forge a super-resolution training manifest from a corpus");
        s->add_option("--corpus", ds.corpus, "Corpus JSON")->required();
        s->add_option("--method", ds.method, "Coarsen/refine method used to synthesize LR patches");
        s->add_option("--patch", ds.patch, "Patch side length");
        s->add_option("--stride", ds.stride, "Patch stride");
        s->add_option("--tau", ds.tau, "Threshold on z-scored HR crops");
        s->add_option("--out-dir", ds.out_dir, "Output directory")->required();
        s->add_flag("--include-16x", ds.include_16x, "Keep 16x pairs");
        s->add_option("--pair-method", ds.pair_method, "Method used for registration");
        s->add_option("--template-fraction", ds.fraction, "Central template side fraction");
        s->add_option("--score-floor", ds.floor, "Minimum pairing score");
        s->add_flag("--zero-mean", ds.zero_mean, "Zero-mean correlation for pairing");
        add_echo(s);
        actions["dataset"] = [&]() -> std::filesystem::path {
            const auto samples = prepare_corpus(load_corpus(ds.corpus), parse_method(ds.pair_method),
                                                {ds.fraction, ds.floor, ds.zero_mean});
            const auto manifest = build_manifest(samples, parse_method(ds.method), ds.patch, ds.stride, ds.tau,
                                                 ds.out_dir, {ds.include_16x});
            ctx.out << "wrote " << manifest.entries.size() << " patch pairs to " << ds.out_dir << "\n";
            return std::filesystem::path(ds.out_dir) / "manifest";
        };
    }

    std::set<std::string> names;
    for (const auto& [name, _] : actions) names.insert(name);

    try {
        expand_config(args, names);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return 0;
        }
        err << "error: usage: " << e.what() << "\n" << app.help();
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.code() << ": " << e.what() << "\n";
        return 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    try {
        set_thread_count(threads);
        const std::filesystem::path primary = actions.at(name)();
        const json echo = {{"subcommand", name}, {"threads", threads}, {"options", effective_options(*sub)}};
        std::filesystem::path echo_path = echo_paths[name];
        if (echo_path.empty()) echo_path = primary.string() + ".config.json";
        write_text(echo_path, echo.dump(2) + "\n");
    } catch (const Error& e) {
        err << "error: " << e.code() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace corescale::cli
