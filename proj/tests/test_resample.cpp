#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "corescale/error.hpp"
#include "corescale/parallel.hpp"
#include "corescale/resample.hpp"

using namespace corescale;

namespace {

GrayImage transpose(const GrayImage& img) {
    std::vector<double> px(img.size());
    for (std::size_t y = 0; y < img.height(); ++y) {
        for (std::size_t x = 0; x < img.width(); ++x) px[x * img.height() + y] = img.at(x, y);
    }
    return GrayImage(img.height(), img.width(), std::move(px));
}

GrayImage mat(std::size_t w, std::size_t h, std::vector<double> v) { return GrayImage(w, h, std::move(v)); }

}  // namespace

TEST_SUITE("resample") {

TEST_CASE("kernel values") {
    CHECK(kernel_weight({MethodKind::bicubic}, 0.0) == 1.0);
    CHECK(kernel_weight({MethodKind::bicubic}, 1.5) == doctest::Approx(-0.0625).epsilon(1e-15));
    CHECK(kernel_weight({MethodKind::lanczos2}, 1.0) == 0.0);
    CHECK(kernel_weight({MethodKind::lanczos3}, -2.0) == 0.0);
    CHECK(kernel_weight({MethodKind::bilinear}, 0.25) == 0.75);
    CHECK(kernel_weight({MethodKind::box}, -0.5) == 1.0);
    CHECK(kernel_weight({MethodKind::box}, 0.5) == 0.0);
    CHECK(kernel_weight({MethodKind::bicubic, -0.75}, 1.5) == doctest::Approx(-0.75 * 0.125).epsilon(1e-15));
}

TEST_CASE("method names and support radii") {
    for (auto m : all_methods()) CHECK(parse_method(method_name(m)) == m);
    CHECK(support_radius({MethodKind::nearest}) == 0.5);
    CHECK(support_radius({MethodKind::box}) == 0.5);
    CHECK(support_radius({MethodKind::bilinear}) == 1.0);
    CHECK(support_radius({MethodKind::bicubic}) == 2.0);
    CHECK(support_radius({MethodKind::lanczos2}) == 2.0);
    CHECK(support_radius({MethodKind::lanczos3}) == 3.0);
    CHECK(ResampleMethod{}.bicubic_a == -0.5);
    CHECK(parse_method_list("all").size() == 6);
    CHECK(parse_method_list("box,bicubic,box").size() == 2);
    CHECK_THROWS_AS(parse_method("cubic"), Error);
    CHECK_THROWS_AS(parse_method_list(","), Error);
}

TEST_CASE("axis weights sum to one with clamped indices") {
    for (auto m : all_methods()) {
        for (auto [in, out] : {std::pair<std::size_t, std::size_t>{7, 3}, {3, 7}, {16, 1}, {1, 5}, {10, 10}}) {
            const auto aw = axis_weights(m, in, out, true);
            for (std::size_t j = 0; j < out; ++j) {
                double total = 0.0;
                for (std::size_t k = aw.begin[j]; k < aw.begin[j + 1]; ++k) {
                    CHECK(aw.index[k] < in);
                    total += aw.weight[k];
                }
                CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
            }
        }
    }
}

TEST_CASE("coarsen examples on a 2x2 block") {
    const auto img = mat(2, 2, {0, 2, 4, 6});
    CHECK(coarsen(img, 2, {MethodKind::box}).at(0, 0) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(coarsen(img, 2, {MethodKind::nearest}).at(0, 0) == 6.0);
    CHECK(coarsen(img, 2, {MethodKind::bilinear}).at(0, 0) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("refine examples") {
    const auto r = refine(mat(1, 1, {5}), 2, {MethodKind::nearest});
    CHECK(r.width() == 2);
    for (double v : r.pixels()) CHECK(v == 5.0);
    const auto b = refine(mat(2, 1, {0, 1}), 2, {MethodKind::bilinear});
    REQUIRE(b.width() == 4);
    REQUIRE(b.height() == 2);
    const double expect[4] = {0.0, 0.25, 0.75, 1.0};
    for (std::size_t y = 0; y < 2; ++y) {
        for (std::size_t x = 0; x < 4; ++x) CHECK(b.at(x, y) == doctest::Approx(expect[x]).epsilon(1e-15));
    }
}

TEST_CASE("dimensions and pixel pitch") {
    GrayImage img(10, 7, 0.2);
    img.set_pixel_pitch(9.1);
    const auto c = coarsen(img, 3, {MethodKind::bicubic});
    CHECK(c.width() == 3);
    CHECK(c.height() == 2);
    CHECK(*c.pixel_pitch() == doctest::Approx(27.3));
    const auto r = refine(img, 2, {MethodKind::lanczos3});
    CHECK(r.width() == 20);
    CHECK(*r.pixel_pitch() == doctest::Approx(4.55));
    CHECK_THROWS_AS(coarsen(img, 8, {MethodKind::box}), Error);
    CHECK_THROWS_AS(resize(img, {{}, 0, 3, true}), Error);
}

TEST_CASE("random 4x4 to 2x2 matches the 2-D oracle") {
    std::mt19937_64 rng(3);
    for (auto m : all_methods()) {
        const auto img = oracle::random_image(4, 4, rng);
        const auto got = resize(img, {m, 2, 2, true});
        CHECK(oracle::max_abs_diff(got, oracle::resize2d(img, m.kind, 2, 2)) <= 1e-12);
    }
}

TEST_CASE("oracle agreement on mixed and non-integer ratios") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        for (auto m : all_methods()) {
            const std::size_t w = 1 + rng() % 12, h = 1 + rng() % 12;
            const std::size_t ow = 1 + rng() % 15, oh = 1 + rng() % 15;
            const bool aa = trial % 2 == 0;
            const auto img = oracle::random_image(w, h, rng);
            CHECK(oracle::max_abs_diff(resize(img, {m, ow, oh, aa}), oracle::resize2d(img, m.kind, ow, oh, aa)) <=
                  1e-12);
        }
    }
}

TEST_CASE("partition of unity") {
    for (auto m : all_methods()) {
        for (std::size_t f : {2, 3, 4, 8, 16}) {
            const GrayImage c(48, 32, 0.37);
            const auto down = coarsen(c, f, m);
            for (double v : down.pixels()) CHECK(std::abs(v - 0.37) <= 1e-12);
            const auto up = refine(GrayImage(3, 2, 0.37), f, m);
            for (double v : up.pixels()) CHECK(std::abs(v - 0.37) <= 1e-12);
        }
    }
}

TEST_CASE("identity scale is bit exact") {
    std::mt19937_64 rng(9);
    const auto img = oracle::random_image(13, 9, rng);
    for (auto m : all_methods()) {
        CHECK(resize(img, {m, 13, 9, true}).same_pixels(img));
        CHECK(coarsen(img, 1, m).same_pixels(img));
        CHECK(refine(img, 1, m).same_pixels(img));
    }
}

TEST_CASE("block-mean law for box") {
    std::mt19937_64 rng(13);
    for (std::size_t s : {2, 3, 4, 8}) {
        const auto img = oracle::random_image(s * 5, s * 3, rng);
        const auto c = coarsen(img, s, {MethodKind::box});
        for (std::size_t y = 0; y < 3; ++y) {
            for (std::size_t x = 0; x < 5; ++x) {
                double acc = 0.0;
                for (std::size_t dy = 0; dy < s; ++dy) {
                    for (std::size_t dx = 0; dx < s; ++dx) acc += img.at(x * s + dx, y * s + dy);
                }
                CHECK(std::abs(c.at(x, y) - acc / static_cast<double>(s * s)) <= 1e-12);
            }
        }
    }
}

TEST_CASE("nonnegative kernels keep values in range") {
    std::mt19937_64 rng(17);
    for (auto k : {MethodKind::nearest, MethodKind::box, MethodKind::bilinear}) {
        for (int trial = 0; trial < 20; ++trial) {
            const auto img = oracle::random_image(3 + rng() % 20, 3 + rng() % 20, rng);
            const double lo = min_value(img), hi = max_value(img);
            for (const auto& out : {coarsen(img, 3, {k}), refine(img, 3, {k}), resize(img, {{k}, 7, 11, true})}) {
                CHECK(min_value(out) >= lo);
                CHECK(max_value(out) <= hi);
            }
        }
    }
}

TEST_CASE("pass order does not matter") {
    std::mt19937_64 rng(19);
    for (auto m : all_methods()) {
        const auto img = oracle::random_image(11, 14, rng);
        const auto hv = resize(img, {m, 5, 9, true});
        const auto vh = transpose(resize(transpose(img), {m, 9, 5, true}));
        CHECK(oracle::max_abs_diff(hv, vh) <= 1e-12);
    }
}

TEST_CASE("antialias has no effect when magnifying") {
    std::mt19937_64 rng(23);
    const auto img = oracle::random_image(6, 5, rng);
    for (auto m : all_methods()) {
        CHECK(resize(img, {m, 13, 10, true}).same_pixels(resize(img, {m, 13, 10, false})));
    }
    const auto big = oracle::random_image(24, 24, rng);
    CHECK(!resize(big, {{MethodKind::bilinear}, 6, 6, true}).same_pixels(resize(big, {{MethodKind::bilinear}, 6, 6, false})));
    CHECK(resize(big, {{MethodKind::nearest}, 6, 6, true}).same_pixels(resize(big, {{MethodKind::nearest}, 6, 6, false})));
}

TEST_CASE("parallel and serial resize agree bitwise") {
    std::mt19937_64 rng(29);
    const auto img = oracle::random_image(97, 61, rng);
    for (int threads : {1, 3}) {
        set_thread_count(threads);
        for (auto m : all_methods()) {
            for (const ResampleSpec& spec : {ResampleSpec{m, 31, 17, true}, ResampleSpec{m, 200, 130, true}}) {
                CHECK(resize(img, spec).same_pixels(serial::resize(img, spec)));
            }
        }
    }
    set_thread_count(0);
}

}  // TEST_SUITE
