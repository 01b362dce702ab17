#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "test_util.hpp"
#include "vige/evaluator.hpp"
#include "vige/synth.hpp"
#include "vige/trainer.hpp"

using namespace vige;
using testutil::TempDir;

namespace {

ModelConfig tiny_model(int num_views, bool bank = true) {
    ModelConfig mc;
    mc.backbone.widths = {2, 2};
    mc.pyramid.scales = {1, 2};
    mc.pyramid.out_dim = 4;
    mc.view_dim = 4;
    mc.num_views = num_views;
    mc.bank_enabled = bank;
    mc.seed = 5;
    return mc;
}

LoadedDataset tiny_dataset(const TempDir& tmp, int subjects = 3, int views = 3, int seqs = 4) {
    SynthConfig cfg;
    cfg.subjects = subjects;
    cfg.angles_deg = evenly_spaced_angles(views);
    cfg.seqs_per_view = seqs;
    cfg.frames = 5;
    cfg.seed = 31;
    generate_dataset(tmp.path() / "data", cfg);
    return LoadedDataset::load(load_dataset(tmp.path() / "data"));
}

// Exhaustive nearest-neighbor retrieval, written independently of rank1_hits.
std::vector<std::optional<bool>> rank1_oracle(const std::vector<RetrievalItem>& gallery,
                                              const std::vector<RetrievalItem>& probes,
                                              bool exclude) {
    std::vector<std::optional<bool>> out;
    for (const auto& p : probes) {
        double best = 1e300;
        int arg = -1;
        for (std::size_t g = 0; g < gallery.size(); ++g) {
            if (exclude && gallery[g].view == p.view) continue;
            double d = 0.0;
            for (std::size_t i = 0; i < p.embedding.size(); ++i) {
                const double diff = gallery[g].embedding[i] - p.embedding[i];
                d += diff * diff;
            }
            if (d < best) {
                best = d;
                arg = static_cast<int>(g);
            }
        }
        if (arg < 0) {
            out.push_back(std::nullopt);
        } else {
            out.push_back(gallery[static_cast<std::size_t>(arg)].subject == p.subject);
        }
    }
    return out;
}

}  // namespace

TEST_CASE("embedding is deterministic and frame-permutation invariant") {
    TempDir tmp("embed");
    const auto data = tiny_dataset(tmp);
    GaitModel model(tiny_model(3));

    const auto& frames = data.sequence(0).frames;
    const auto a = embed_sequence(model, frames);
    const auto b = embed_sequence(model, frames);
    CHECK(a.embedding == b.embedding);
    CHECK(a.predicted_view == b.predicted_view);

    std::vector<Frame> shuffled(frames.rbegin(), frames.rend());
    const auto c = embed_sequence(model, shuffled);
    CHECK(a.embedding == c.embedding);
}

TEST_CASE("identity bank embeddings equal the baseline model's exactly") {
    TempDir tmp("passthrough");
    const auto data = tiny_dataset(tmp);
    auto mc_vi = tiny_model(3, true);
    mc_vi.init_eps = 0.0;
    GaitModel vi(mc_vi);
    GaitModel base(tiny_model(3, false));

    for (int i = 0; i < 6; ++i) {
        const auto& frames = data.sequence(i).frames;
        const auto ev = embed_sequence(vi, frames);
        const auto eb = embed_sequence(base, frames);
        CHECK(ev.embedding == eb.embedding);
    }
}

TEST_CASE("rank1 hand cases: planted duplicates win, closer impostors lose") {
    // Gallery holds an exact duplicate of each probe at a different view.
    std::vector<RetrievalItem> gallery{{{1.0, 0.0}, "a", 0}, {{0.0, 1.0}, "b", 0}};
    std::vector<RetrievalItem> probes{{{1.0, 0.0}, "a", 1}, {{0.0, 1.0}, "b", 1}};
    auto hits = rank1_hits(gallery, probes, true);
    REQUIRE(hits.size() == 2);
    CHECK(*hits[0]);
    CHECK(*hits[1]);

    // One probe, two gallery entries: wrong subject at distance 1, right
    // subject at distance 2. Nearest wins, so rank-1 misses.
    std::vector<RetrievalItem> g2{{{1.0, 0.0}, "impostor", 0}, {{2.0, 0.0}, "me", 0}};
    std::vector<RetrievalItem> p2{{{0.0, 0.0}, "me", 1}};
    hits = rank1_hits(g2, p2, true);
    CHECK_FALSE(*hits[0]);
}

TEST_CASE("self-match sanity: exclusion off with the probe in the gallery is 100%") {
    Rng rng(61);
    std::vector<RetrievalItem> items;
    for (int i = 0; i < 10; ++i) {
        std::vector<double> e(4);
        for (auto& v : e) v = rng.uniform(-1, 1);
        items.push_back({e, "s" + std::to_string(i), i % 3});
    }
    const auto hits = rank1_hits(items, items, false);
    for (const auto& h : hits) CHECK(*h);
}

TEST_CASE("rank1 matches the exhaustive oracle on random instances") {
    Rng rng(62);
    for (int trial = 0; trial < 40; ++trial) {
        const int subjects = 2 + static_cast<int>(rng.uniform_int(0, 3));
        const int views = 2 + static_cast<int>(rng.uniform_int(0, 1));
        std::vector<RetrievalItem> gallery, probes;
        for (int s = 0; s < subjects; ++s) {
            for (int v = 0; v < views; ++v) {
                for (int copy = 0; copy < 2; ++copy) {
                    std::vector<double> e(3);
                    for (auto& x : e) x = rng.uniform(-1, 1);
                    RetrievalItem item{e, "s" + std::to_string(s), v};
                    (copy == 0 ? gallery : probes).push_back(item);
                }
            }
        }
        const bool exclude = trial % 2 == 0;
        const auto mine = rank1_hits(gallery, probes, exclude);
        const auto ref = rank1_oracle(gallery, probes, exclude);
        REQUIRE(mine.size() == ref.size());
        for (std::size_t i = 0; i < mine.size(); ++i) {
            CHECK(mine[i].has_value() == ref[i].has_value());
            if (mine[i]) CHECK(*mine[i] == *ref[i]);
        }
    }
}

TEST_CASE("rank1 is invariant under gallery permutation (distinct distances)") {
    Rng rng(63);
    std::vector<RetrievalItem> gallery, probes;
    for (int i = 0; i < 12; ++i) {
        std::vector<double> e(3);
        for (auto& v : e) v = rng.uniform(-1, 1);
        gallery.push_back({e, "s" + std::to_string(i % 4), i % 3});
    }
    for (int i = 0; i < 6; ++i) {
        std::vector<double> e(3);
        for (auto& v : e) v = rng.uniform(-1, 1);
        probes.push_back({e, "s" + std::to_string(i % 4), i % 3});
    }
    const auto base = rank1_hits(gallery, probes, true);
    auto shuffled = gallery;
    std::reverse(shuffled.begin(), shuffled.end());
    const auto permuted = rank1_hits(shuffled, probes, true);
    for (std::size_t i = 0; i < base.size(); ++i) CHECK(*base[i] == *permuted[i]);
}

TEST_CASE("evaluate produces a well-formed report over the synthetic protocol") {
    TempDir tmp("evalrep");
    const auto data = tiny_dataset(tmp, 4, 3, 4);
    GaitModel model(tiny_model(3));

    EvalProtocol protocol;
    protocol.gallery = parse_selector("nm:0-1");
    protocol.probes = {parse_selector("nm:2-3")};
    const auto rep = evaluate(model, data, protocol, 2);

    REQUIRE(rep.cells.size() == 1);
    REQUIRE(rep.cells[0].size() == 3);
    for (const auto& cell : rep.cells[0]) {
        CHECK(cell.defined());
        CHECK(cell.pct() >= 0.0);
        CHECK(cell.pct() <= 100.0);
    }
    // Means recompute exactly from the cells.
    double acc = 0.0;
    for (const auto& cell : rep.cells[0]) acc += cell.pct();
    CHECK(*rep.condition_mean(0) == doctest::Approx(acc / 3.0).epsilon(1e-12));
    CHECK(*rep.overall_mean() == doctest::Approx(acc / 3.0).epsilon(1e-12));

    const auto tsv = rep.to_tsv();
    CHECK(tsv.find("probe\t0\t60\t120\tmean") == 0);
    CHECK(tsv.find("view_accuracy") != std::string::npos);
    CHECK(rep.to_table().find("overall mean") != std::string::npos);

    // Undefined cells appear when exclusion empties the gallery: single view.
    SynthConfig cfg;
    cfg.subjects = 2;
    cfg.angles_deg = {0};
    cfg.seqs_per_view = 4;
    cfg.frames = 5;
    cfg.seed = 32;
    generate_dataset(tmp.path() / "single", cfg);
    const auto single = LoadedDataset::load(load_dataset(tmp.path() / "single"));
    auto mc = tiny_model(2);  // view head needs >= 2 logits
    GaitModel m2(mc);
    const auto rep2 = evaluate(m2, single, protocol, 1);
    CHECK_FALSE(rep2.cells[0][0].defined());
    CHECK(rep2.skipped_probes > 0);
    CHECK_FALSE(rep2.overall_mean().has_value());
    CHECK(rep2.to_tsv().find("-") != std::string::npos);
}

TEST_CASE("evaluate refuses overlapping gallery and probe selections") {
    TempDir tmp("evaloverlap");
    const auto data = tiny_dataset(tmp);
    GaitModel model(tiny_model(3));
    EvalProtocol protocol;
    protocol.gallery = parse_selector("nm:0-2");
    protocol.probes = {parse_selector("nm:2-3")};
    CHECK_THROWS_AS(evaluate(model, data, protocol, 1), ValueError);
}

TEST_CASE("view accuracy of a constant predictor on balanced views is 100/M") {
    TempDir tmp("viewacc");
    const auto data = tiny_dataset(tmp, 2, 4, 2);
    auto mc = tiny_model(4);
    GaitModel model(mc);

    // Pin the head to always predict view 2.
    for (const auto& [name, t] : model.params()) {
        if (name == "view_head.w_view") std::fill(t->data.begin(), t->data.end(), 0.0);
        if (name == "view_head.b_view") {
            std::fill(t->data.begin(), t->data.end(), 0.0);
            t->data[2] = 10.0;
        }
    }
    std::vector<int> ids(data.sequences().size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
    const double acc = view_accuracy(model, data, ids, 2);
    CHECK(acc == doctest::Approx(100.0 / 4).epsilon(1e-9));
}

TEST_CASE("selector parsing accepts ranges and lists, rejects junk") {
    auto sel = parse_selector("nm:0-2");
    CHECK(sel.condition == "nm");
    CHECK(sel.seq_indices == std::vector<int>{0, 1, 2});
    sel = parse_selector("bg:0,3,5");
    CHECK(sel.seq_indices == std::vector<int>{0, 3, 5});
    CHECK_THROWS_AS(parse_selector("nm"), ValueError);
    CHECK_THROWS_AS(parse_selector(":0-1"), ValueError);
    CHECK_THROWS_AS(parse_selector("nm:"), ValueError);
    CHECK_THROWS_AS(parse_selector("nm:3-1"), ValueError);
}
