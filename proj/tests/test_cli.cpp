#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include "corescale/cli.hpp"
#include "corescale/error.hpp"
#include "corescale/image_io.hpp"
#include "corescale/resample.hpp"

using namespace corescale;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(std::move(args), out, err);
    return {code, out.str(), err.str()};
}

std::string read_bytes(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

nlohmann::json read_json(const std::filesystem::path& p) {
    std::ifstream f(p);
    return nlohmann::json::parse(f);
}

GrayImage texture(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto noise = oracle::random_image(n / 4 + 1, n / 4 + 1, rng);
    return crop(refine(noise, 4, {MethodKind::bicubic}), {0, 0, n, n});
}

// Writes a two-sample corpus with LR generated by bilinear coarsening.
std::filesystem::path write_corpus(const std::filesystem::path& dir) {
    nlohmann::json corpus = nlohmann::json::array();
    for (int i = 0; i < 2; ++i) {
        const auto hr = texture(64, 10 + i);
        const std::string h = "hr" + std::to_string(i) + ".pgm", l = "lr" + std::to_string(i) + ".pgm";
        save_image(hr, dir / h, 16);
        save_image(coarsen(load_image(dir / h), 2, {}), dir / l, 16);
        corpus.push_back({{"id", "c" + std::to_string(i)}, {"hr", h}, {"lr", l}, {"factor", 2}});
    }
    std::ofstream(dir / "corpus.json") << corpus.dump(2);
    return dir / "corpus.json";
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("scale argument") {
    CHECK(cli::parse_scale("1/4").coarsen);
    CHECK(cli::parse_scale("1/4").factor == 4);
    CHECK(!cli::parse_scale("3").coarsen);
    CHECK(cli::parse_scale("3").factor == 3);
    CHECK_THROWS_AS(cli::parse_scale("0"), Error);
    CHECK_THROWS_AS(cli::parse_scale("1/x"), Error);
    CHECK_THROWS_AS(cli::parse_scale("2.5"), Error);
}

TEST_CASE("help and usage errors") {
    const auto help = run({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("coarsen") != std::string::npos);
    const auto unknown = run({"frobnicate"});
    CHECK(unknown.code == 2);
    CHECK(unknown.err.find("Usage") != std::string::npos);
    CHECK(run({}).code == 2);
    CHECK(run({"resize", "--in", "x.pgm"}).code == 2);
}

TEST_CASE("resize writes the output and a config echo") {
    const auto dir = scratch_dir("cli_resize");
    save_image(texture(32, 1), dir / "a.pgm");
    const auto r = run({"resize", "--in", (dir / "a.pgm").string(), "--out", (dir / "b.pgm").string(), "--method",
                        "bilinear", "--scale", "1/2"});
    REQUIRE(r.code == 0);
    const auto b = load_image(dir / "b.pgm");
    CHECK(b.width() == 16);
    const auto echo = read_json(dir / "b.pgm.config.json");
    CHECK(echo["subcommand"] == "resize");
    CHECK(echo["options"]["method"] == "bilinear");
    CHECK(echo["options"]["scale"] == "1/2");
    CHECK(echo["options"]["no-antialias"] == false);
    CHECK(echo["options"]["bit-depth"] == "8");

    const auto up = run({"resize", "--in", (dir / "b.pgm").string(), "--out", (dir / "c.png").string(), "--scale",
                         "3", "--method", "lanczos3", "--bit-depth", "16"});
    REQUIRE(up.code == 0);
    CHECK(load_image(dir / "c.png").width() == 48);
}

TEST_CASE("config files replay a run and flags override them") {
    const auto dir = scratch_dir("cli_config");
    save_image(texture(32, 2), dir / "a.pgm");
    REQUIRE(run({"resize", "--in", (dir / "a.pgm").string(), "--out", (dir / "b.pgm").string(), "--method", "box",
                 "--scale", "1/4", "--echo", (dir / "run.json").string()})
                .code == 0);
    REQUIRE(run({"--config", (dir / "run.json").string(), "resize", "--out", (dir / "c.pgm").string()}).code == 0);
    CHECK(read_bytes(dir / "b.pgm") == read_bytes(dir / "c.pgm"));
    REQUIRE(run({"--config", (dir / "run.json").string(), "resize", "--out", (dir / "d.pgm").string(), "--scale",
                 "1/2"})
                .code == 0);
    CHECK(load_image(dir / "d.pgm").width() == 16);
    REQUIRE(run({"--config", (dir / "run.json").string()}).code == 0);
    CHECK(run({"--config", (dir / "missing.json").string(), "resize"}).code == 2);
}

TEST_CASE("domain errors exit 1 with a coded message") {
    const auto dir = scratch_dir("cli_errors");
    save_image(GrayImage(8, 8, 0.5), dir / "flat.pgm");
    const auto r = run({"normalize", "--in", (dir / "flat.pgm").string()});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("error: degenerate:", 0) == 0);
    CHECK(run({"resize", "--in", (dir / "nope.pgm").string(), "--out", (dir / "o.pgm").string()}).code == 1);
    CHECK(run({"resize", "--in", (dir / "flat.pgm").string(), "--out", (dir / "o.pgm").string(), "--method", "cubic"})
              .code == 1);
}

TEST_CASE("metrics, normalize and segment") {
    const auto dir = scratch_dir("cli_metrics");
    save_image(texture(24, 3), dir / "a.png", 16);
    save_image(texture(24, 4), dir / "b.png", 16);
    const auto m = run({"metrics", "--a", (dir / "a.png").string(), "--b", (dir / "a.png").string(), "--echo",
                     (dir / "m.config.json").string()});
    REQUIRE(m.code == 0);
    const auto j = nlohmann::json::parse(m.out);
    CHECK(j["psnr_db"] == "inf");
    CHECK(j["ssim"] == 1.0);
    CHECK(j["max_i_policy"] == "fixed:1");
    const auto n = run({"metrics", "--a", (dir / "a.png").string(), "--b", (dir / "b.png").string(), "--normalize",
                        "--ssim", "global", "--echo", (dir / "n.config.json").string()});
    REQUIRE(n.code == 0);
    CHECK(nlohmann::json::parse(n.out)["max_i_policy"] == "reference_range");

    const auto z = run({"normalize", "--in", (dir / "a.png").string(), "--out", (dir / "z.png").string()});
    REQUIRE(z.code == 0);
    CHECK(nlohmann::json::parse(z.out)["std"].get<double>() > 0.0);
    const auto s = run({"segment", "--in", (dir / "a.png").string(), "--out", (dir / "s.png").string(), "--tau", "0",
                        "--zscore"});
    REQUIRE(s.code == 0);
    const auto seg = load_image(dir / "s.png");
    for (double v : seg.pixels()) CHECK((v == 0.0 || v == 1.0));
}

TEST_CASE("pair emits an alignment record") {
    const auto dir = scratch_dir("cli_pair");
    const auto hr = texture(64, 5);
    save_image(hr, dir / "hr.png", 16);
    save_image(coarsen(load_image(dir / "hr.png"), 2, {}), dir / "lr.png", 16);
    const auto r = run({"pair", "--hr", (dir / "hr.png").string(), "--lr", (dir / "lr.png").string(), "--factor", "2",
                        "--echo", (dir / "pair.config.json").string()});
    CHECK(read_json(dir / "pair.config.json")["options"]["factor"] == "2");
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["offset_x"] == 0);
    CHECK(j["factor"] == 2);
    CHECK(j["hr_rect"]["w"] == 64);
    CHECK(j["lr_rect"]["w"] == 32);
    CHECK(j["score"].get<double>() >= 0.999);
}

TEST_CASE("bench writes one row per sample and method") {
    const auto dir = scratch_dir("cli_bench");
    const auto corpus = write_corpus(dir);
    const auto r = run({"bench", "--corpus", corpus.string(), "--direction", "coarsen", "--report",
                        (dir / "out.csv").string()});
    REQUIRE(r.code == 0);
    std::ifstream csv(dir / "out.csv");
    std::size_t lines = 0;
    for (std::string line; std::getline(csv, line);) ++lines;
    CHECK(lines == 1 + 2 * 6);
    CHECK(r.out.rfind("1 bilinear", 0) == 0);
    const auto j = run({"--threads", "3", "bench", "--corpus", corpus.string(), "--direction", "refine", "--report",
                        (dir / "out.json").string(), "--methods", "box,bicubic"});
    REQUIRE(j.code == 0);
    CHECK(read_json(dir / "out.json")["rows"].size() == 4);
    CHECK(read_json(dir / "out.json.config.json")["threads"] == 3);
}

TEST_CASE("dataset and mechsim") {
    const auto dir = scratch_dir("cli_dataset");
    const auto corpus = write_corpus(dir);
    const auto d = run({"dataset", "--corpus", corpus.string(), "--out-dir", (dir / "ds").string(), "--patch", "32",
                        "--stride", "32"});
    REQUIRE(d.code == 0);
    CHECK(read_json(dir / "ds" / "manifest.json")["entries"].size() == 8);
    CHECK(std::filesystem::exists(dir / "ds" / "manifest.config.json"));

    const auto m = run({"mechsim", "--size", "512", "--scales", "2", "--out", (dir / "m.json").string(), "--csv",
                        (dir / "m.csv").string(), "--sim-methods", "nearest,box"});
    REQUIRE(m.code == 0);
    const auto j = read_json(dir / "m.json");
    CHECK(j["reports"].size() == 1);
    CHECK(j["scene"]["width"] == 512);
    CHECK(j["reports"][0]["best_per_sim"]["box"] == "box");
    CHECK(run({"mechsim", "--size", "100", "--out", (dir / "bad.json").string()}).code == 1);
}

}  // TEST_SUITE
