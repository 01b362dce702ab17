#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "test_util.hpp"
#include "vige/backbone.hpp"
#include "vige/ops.hpp"
#include "vige/pyramid.hpp"

using namespace vige;
using testutil::random_tensor;

namespace {

std::vector<TensorPtr> random_frames(int count, int h, int w, Rng& rng, double p_fg = 0.3) {
    std::vector<TensorPtr> frames;
    for (int t = 0; t < count; ++t) {
        auto f = zeros({1, h, w});
        for (auto& v : f->data) v = rng.next_double() < p_fg ? 1.0 : 0.0;
        frames.push_back(std::move(f));
    }
    return frames;
}

BackboneConfig small_cfg() {
    BackboneConfig cfg;
    cfg.widths = {2, 3};
    cfg.input_h = 32;
    cfg.input_w = 24;
    return cfg;
}

}  // namespace

TEST_CASE("default config maps 64x44 to an 8x5 feature grid") {
    BackboneConfig cfg;
    const auto hw = cfg.final_hw();
    CHECK(hw[0] == 8);
    CHECK(hw[1] == 5);
    CHECK(cfg.final_channels() == 32);
}

TEST_CASE("all-zero sequence with zero-bias parameters yields all-zero x_f") {
    Rng rng(3);
    const auto cfg = small_cfg();
    ConvSetBackbone backbone(cfg, rng);  // biases initialize to zero
    std::vector<TensorPtr> frames{zeros({1, cfg.input_h, cfg.input_w}),
                                  zeros({1, cfg.input_h, cfg.input_w})};
    Tape tape(false);
    const auto maps = backbone.extract(tape, frames);
    for (const double v : maps.x_f->data) CHECK(v == 0.0);
    REQUIRE(maps.x_g);
    CHECK(maps.x_g->shape == maps.x_f->shape);
    for (const double v : maps.x_g->data) CHECK(v == 0.0);
}

TEST_CASE("single-frame extraction equals the per-frame CNN output") {
    Rng rng(4);
    auto cfg = small_cfg();
    cfg.emit_global = false;
    ConvSetBackbone backbone(cfg, rng);
    Rng frame_rng(5);
    const auto frames = random_frames(1, cfg.input_h, cfg.input_w, frame_rng);

    Tape tape(false);
    const auto single = backbone.extract(tape, frames);
    // Set pooling over one frame is the identity, so running the same frame
    // twice must give the identical map.
    const std::vector<TensorPtr> twice{frames[0], frames[0]};
    const auto doubled = backbone.extract(tape, twice);
    CHECK(testutil::bitwise_equal(*single.x_f, *doubled.x_f));
}

TEST_CASE("frame permutation leaves both maps bitwise unchanged") {
    Rng rng(6);
    ConvSetBackbone backbone(small_cfg(), rng);
    Rng frame_rng(7);
    auto frames = random_frames(5, 32, 24, frame_rng);

    Tape tape(false);
    const auto base = backbone.extract(tape, frames);
    std::vector<TensorPtr> shuffled{frames[3], frames[0], frames[4], frames[2], frames[1]};
    const auto permuted = backbone.extract(tape, shuffled);
    CHECK(testutil::bitwise_equal(*base.x_f, *permuted.x_f));
    REQUIRE(base.x_g);
    CHECK(testutil::bitwise_equal(*base.x_g, *permuted.x_g));
}

TEST_CASE("adding a frame can only raise or preserve x_f elements") {
    Rng rng(8);
    auto cfg = small_cfg();
    cfg.emit_global = false;
    ConvSetBackbone backbone(cfg, rng);
    Rng frame_rng(9);
    auto frames = random_frames(4, 32, 24, frame_rng);

    Tape tape(false);
    const auto smaller = backbone.extract(
        tape, std::span<const TensorPtr>(frames.data(), frames.size() - 1));
    const auto larger = backbone.extract(tape, frames);
    for (std::size_t i = 0; i < smaller.x_f->data.size(); ++i) {
        CHECK(larger.x_f->data[i] >= smaller.x_f->data[i]);
    }
}

TEST_CASE("output shape follows the closed-form calculator across configs") {
    Rng rng(10);
    for (const auto& widths : {std::vector<int>{2}, std::vector<int>{2, 4},
                               std::vector<int>{2, 2, 4}}) {
        BackboneConfig cfg;
        cfg.widths = widths;
        cfg.input_h = 64;
        cfg.input_w = 44;
        ConvSetBackbone backbone(cfg, rng);
        Rng frame_rng(11);
        const auto frames = random_frames(2, 64, 44, frame_rng);
        Tape tape(false);
        const auto maps = backbone.extract(tape, frames);
        const auto hw = cfg.final_hw();
        CHECK(maps.x_f->shape == Shape{widths.back(), hw[0], hw[1]});
    }
}

TEST_CASE("backbone rejects wrong frame sizes and empty sequences") {
    Rng rng(12);
    ConvSetBackbone backbone(small_cfg(), rng);
    Tape tape(false);
    const std::vector<TensorPtr> wrong{zeros({1, 16, 16})};
    CHECK_THROWS_AS(backbone.extract(tape, wrong), ShapeError);
    CHECK_THROWS_AS(backbone.extract(tape, std::span<const TensorPtr>{}), ValueError);
}

TEST_CASE("config validation rejects degenerate setups") {
    BackboneConfig cfg;
    cfg.widths = {};
    CHECK_THROWS_AS(cfg.validate(), ValueError);
    cfg = BackboneConfig{};
    cfg.widths = {2, 2, 2, 2, 2};  // pools 64x44 down below 2x2
    CHECK_THROWS_AS(cfg.validate(), ValueError);
}

TEST_CASE("horizontal bands split near-equally with earlier bands larger") {
    const auto even = horizontal_bands(8, 4);
    REQUIRE(even.size() == 4);
    for (int b = 0; b < 4; ++b) {
        CHECK(even[b].first == 2 * b);
        CHECK(even[b].second == 2 * b + 2);
    }
    const auto uneven = horizontal_bands(5, 4);  // 2,1,1,1
    CHECK(uneven[0] == std::pair<std::int64_t, std::int64_t>{0, 2});
    CHECK(uneven[1] == std::pair<std::int64_t, std::int64_t>{2, 3});
    CHECK(uneven[3] == std::pair<std::int64_t, std::int64_t>{4, 5});
    CHECK_THROWS_AS(horizontal_bands(3, 4), ValueError);
}

TEST_CASE("strip pooling: constant map, strip counts, and brute-force oracle") {
    Rng rng(13);
    PyramidConfig cfg;
    cfg.scales = {1};
    cfg.out_dim = 4;
    HorizontalPyramid pyr(cfg, 3, rng);
    Tape tape(false);

    FeatureMaps maps;
    maps.x_f = full({3, 6, 4}, 2.5);
    auto strips = pyr.pool_strips(tape, maps);
    REQUIRE(strips.size() == 1);
    for (const double v : strips[0]->data) CHECK(v == doctest::Approx(5.0));  // max c + mean c

    PyramidConfig multi;
    multi.scales = {1, 2, 4};
    HorizontalPyramid pyr7(multi, 3, rng);
    CHECK(multi.strip_count() == 7);
    maps.x_f = random_tensor({3, 8, 4}, rng);
    const auto seven = pyr7.pool_strips(tape, maps);
    REQUIRE(seven.size() == 7);

    // Scale-1 strip equals (max + mean) over the whole map, per channel.
    for (int c = 0; c < 3; ++c) {
        double best = -1e300, acc = 0.0;
        for (int i = 0; i < 32; ++i) {
            const double v = maps.x_f->data[c * 32 + i];
            best = std::max(best, v);
            acc += v;
        }
        CHECK(seven[0]->data[c] == doctest::Approx(best + acc / 32.0).epsilon(1e-12));
    }
}

TEST_CASE("strip pooling adds the global map's band pool when present") {
    Rng rng(14);
    PyramidConfig cfg;
    cfg.scales = {2};
    HorizontalPyramid pyr(cfg, 2, rng);
    Tape tape(false);
    FeatureMaps maps;
    maps.x_f = random_tensor({2, 4, 3}, rng);
    maps.x_g = random_tensor({2, 4, 3}, rng);

    const auto merged = pyr.pool_strips(tape, maps);
    FeatureMaps only_f{maps.x_f, nullptr};
    FeatureMaps only_g{maps.x_g, nullptr};
    const auto from_f = pyr.pool_strips(tape, only_f);
    const auto from_g = pyr.pool_strips(tape, only_g);
    for (std::size_t s = 0; s < merged.size(); ++s) {
        for (std::size_t i = 0; i < merged[s]->data.size(); ++i) {
            CHECK(merged[s]->data[i] ==
                  doctest::Approx(from_f[s]->data[i] + from_g[s]->data[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("band locality: perturbing outside a band leaves its row unchanged") {
    Rng rng(15);
    PyramidConfig cfg;
    cfg.scales = {2};
    HorizontalPyramid pyr(cfg, 2, rng);
    Tape tape(false);
    FeatureMaps maps;
    maps.x_f = random_tensor({2, 6, 3}, rng);

    const auto before = pyr.pool_strips(tape, maps);
    // Band 0 covers rows [0,3); poke row 4 and compare.
    maps.x_f->data[(0 * 6 + 4) * 3 + 1] += 3.0;
    const auto after = pyr.pool_strips(tape, maps);
    CHECK(testutil::bitwise_equal(*before[0], *after[0]));
    CHECK_FALSE(testutil::bitwise_equal(*before[1], *after[1]));
}

TEST_CASE("pool_strips rejects maps shorter than the largest scale") {
    Rng rng(16);
    PyramidConfig cfg;
    cfg.scales = {1, 4};
    HorizontalPyramid pyr(cfg, 2, rng);
    Tape tape(false);
    FeatureMaps maps;
    maps.x_f = random_tensor({2, 3, 3}, rng);
    CHECK_THROWS_AS(pyr.pool_strips(tape, maps), ValueError);
}

TEST_CASE("separate_fc maps each strip through its own matrix") {
    Rng rng(17);
    PyramidConfig cfg;
    cfg.scales = {1, 2};
    cfg.out_dim = 3;
    HorizontalPyramid pyr(cfg, 3, rng);  // C_f = 3 = D, identity possible
    Tape tape(false);

    ParamList params;
    pyr.collect_params("pyr", params);
    REQUIRE(params.size() == 3);

    // Identity weights: rows equal the pooled strips.
    for (auto& [name, w] : params) {
        std::fill(w->data.begin(), w->data.end(), 0.0);
        for (int i = 0; i < 3; ++i) w->data[static_cast<std::size_t>(i * 3 + i)] = 1.0;
    }
    std::vector<TensorPtr> strips{tensor({3}, {1, 2, 3}), tensor({3}, {4, 5, 6}),
                                  tensor({3}, {7, 8, 9})};
    auto rows = pyr.separate_fc(tape, strips);
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i]->data == strips[i]->data);

    // Zero weights: all-zero mapping.
    for (auto& [name, w] : params) std::fill(w->data.begin(), w->data.end(), 0.0);
    rows = pyr.separate_fc(tape, strips);
    for (const auto& r : rows) {
        for (const double v : r->data) CHECK(v == 0.0);
    }

    CHECK_THROWS_AS(
        pyr.separate_fc(tape, std::span<const TensorPtr>(strips.data(), 2)), ValueError);
}

TEST_CASE("separate_fc rows match an independent matmul and stay independent") {
    Rng rng(18);
    PyramidConfig cfg;
    cfg.scales = {3};
    cfg.out_dim = 4;
    HorizontalPyramid pyr(cfg, 5, rng);
    Tape tape(false);

    std::vector<TensorPtr> strips;
    for (int i = 0; i < 3; ++i) strips.push_back(random_tensor({5}, rng));
    const auto rows = pyr.separate_fc(tape, strips);

    ParamList params;
    pyr.collect_params("pyr", params);
    for (std::size_t s = 0; s < 3; ++s) {
        const auto& w = params[s].second;
        for (int i = 0; i < 4; ++i) {
            double acc = 0.0;
            for (int j = 0; j < 5; ++j) acc += w->data[i * 5 + j] * strips[s]->data[j];
            CHECK(rows[s]->data[i] == doctest::Approx(acc).epsilon(1e-12));
        }
    }

    // Zeroing weight matrix 1 zeroes exactly row 1.
    std::fill(params[1].second->data.begin(), params[1].second->data.end(), 0.0);
    const auto rows2 = pyr.separate_fc(tape, strips);
    CHECK(testutil::bitwise_equal(*rows2[0], *rows[0]));
    for (const double v : rows2[1]->data) CHECK(v == 0.0);
    CHECK(testutil::bitwise_equal(*rows2[2], *rows[2]));
}
