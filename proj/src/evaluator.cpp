#include "vige/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <cstdio>
#include <map>
#include <sstream>
#include <thread>

namespace vige {

EvalSelector parse_selector(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos || colon == 0) {
        throw ValueError("selector '" + spec + "' must look like condition:indices (nm:0-1)");
    }
    EvalSelector sel;
    sel.condition = spec.substr(0, colon);
    std::stringstream ss(spec.substr(colon + 1));
    std::string part;
    while (std::getline(ss, part, ',')) {
        if (part.empty()) continue;
        const auto dash = part.find('-');
        if (dash == std::string::npos) {
            sel.seq_indices.push_back(std::stoi(part));
        } else {
            const int lo = std::stoi(part.substr(0, dash));
            const int hi = std::stoi(part.substr(dash + 1));
            if (hi < lo) throw ValueError("selector range '" + part + "' is inverted");
            for (int i = lo; i <= hi; ++i) sel.seq_indices.push_back(i);
        }
    }
    if (sel.seq_indices.empty()) {
        throw ValueError("selector '" + spec + "' names no sequence indices");
    }
    std::sort(sel.seq_indices.begin(), sel.seq_indices.end());
    sel.seq_indices.erase(std::unique(sel.seq_indices.begin(), sel.seq_indices.end()),
                          sel.seq_indices.end());
    return sel;
}

EmbedResult embed_sequence(const GaitModel& model, std::span<const Frame> frames) {
    Tape tape(false);
    const auto tensors = frames_to_tensors(frames);
    const auto out = model.forward(tape, tensors);
    EmbedResult res;
    res.predicted_view = out.view.y_hat;
    res.embedding = out.final_block->data;
    return res;
}

std::vector<std::optional<bool>> rank1_hits(std::span<const RetrievalItem> gallery,
                                            std::span<const RetrievalItem> probes,
                                            bool exclude_identical_view) {
    std::vector<std::optional<bool>> hits;
    hits.reserve(probes.size());
    for (const auto& probe : probes) {
        double best = 0.0;
        int best_idx = -1;
        for (std::size_t g = 0; g < gallery.size(); ++g) {
            const auto& cand = gallery[g];
            if (exclude_identical_view && cand.view == probe.view) continue;
            if (cand.embedding.size() != probe.embedding.size()) {
                throw ShapeError("rank1: embedding lengths differ");
            }
            double dist = 0.0;
            for (std::size_t i = 0; i < cand.embedding.size(); ++i) {
                const double d = cand.embedding[i] - probe.embedding[i];
                dist += d * d;
            }
            if (best_idx < 0 || dist < best) {
                best = dist;
                best_idx = static_cast<int>(g);
            }
        }
        if (best_idx < 0) {
            hits.push_back(std::nullopt);
        } else {
            hits.push_back(gallery[static_cast<std::size_t>(best_idx)].subject == probe.subject);
        }
    }
    return hits;
}

std::optional<double> EvalReport::condition_mean(std::size_t row) const {
    double acc = 0.0;
    int n = 0;
    for (const auto& cell : cells[row]) {
        if (cell.defined()) {
            acc += cell.pct();
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return acc / n;
}

std::optional<double> EvalReport::overall_mean() const {
    double acc = 0.0;
    int n = 0;
    for (std::size_t r = 0; r < cells.size(); ++r) {
        for (const auto& cell : cells[r]) {
            if (cell.defined()) {
                acc += cell.pct();
                ++n;
            }
        }
    }
    if (n == 0) return std::nullopt;
    return acc / n;
}

namespace {

std::string fmt_pct(const std::optional<double>& v) {
    if (!v) return "-";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", *v);
    return buf;
}

std::string fmt_angle(double a) {
    char buf[32];
    if (a == std::floor(a)) {
        std::snprintf(buf, sizeof(buf), "%d", static_cast<int>(a));
    } else {
        std::snprintf(buf, sizeof(buf), "%g", a);
    }
    return buf;
}

}  // namespace

std::string EvalReport::to_tsv() const {
    std::ostringstream os;
    os << "probe";
    for (const double a : view_angles) os << '\t' << fmt_angle(a);
    os << "\tmean\n";
    for (std::size_t r = 0; r < cells.size(); ++r) {
        os << probe_conditions[r];
        for (const auto& cell : cells[r]) {
            os << '\t' << fmt_pct(cell.defined() ? std::optional<double>(cell.pct())
                                                 : std::nullopt);
        }
        os << '\t' << fmt_pct(condition_mean(r)) << '\n';
    }
    os << "overall_mean\t" << fmt_pct(overall_mean()) << '\n';
    os << "view_accuracy\t" << fmt_pct(view_accuracy_pct) << '\n';
    return os.str();
}

std::string EvalReport::to_table() const {
    // Aligned text table, one row per probe condition, one column per view.
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header{"probe"};
    for (const double a : view_angles) header.push_back(fmt_angle(a));
    header.push_back("mean");
    rows.push_back(header);
    for (std::size_t r = 0; r < cells.size(); ++r) {
        std::vector<std::string> row{probe_conditions[r]};
        for (const auto& cell : cells[r]) {
            row.push_back(fmt_pct(cell.defined() ? std::optional<double>(cell.pct())
                                                 : std::nullopt));
        }
        row.push_back(fmt_pct(condition_mean(r)));
        rows.push_back(row);
    }
    std::vector<std::size_t> width(rows[0].size(), 0);
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    std::ostringstream os;
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            os << (c ? "  " : "");
            os << row[c];
            for (std::size_t pad = row[c].size(); pad < width[c]; ++pad) os << ' ';
        }
        os << '\n';
    }
    os << "overall mean: " << fmt_pct(overall_mean()) << '\n';
    os << "view accuracy: " << fmt_pct(view_accuracy_pct) << "%\n";
    return os.str();
}

namespace {

// Embeds the listed sequences, `threads`-wide, results in sequence order.
std::vector<EmbedResult> embed_many(const GaitModel& model, const LoadedDataset& data,
                                    const std::vector<int>& seq_ids, int threads) {
    std::vector<EmbedResult> results(seq_ids.size());
    const int n_threads = std::max(1, std::min<int>(threads, static_cast<int>(seq_ids.size())));
    std::vector<std::thread> workers;
    std::atomic<std::size_t> next{0};
    for (int w = 0; w < n_threads; ++w) {
        workers.emplace_back([&]() {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= seq_ids.size()) break;
                const auto& seq = data.sequence(seq_ids[i]);
                results[i] = embed_sequence(model, seq.frames);
            }
        });
    }
    for (auto& w : workers) w.join();
    return results;
}

}  // namespace

EvalReport evaluate(const GaitModel& model, const LoadedDataset& data,
                    const EvalProtocol& protocol, int threads) {
    const auto& index = data.index();

    // (subject, condition, view) -> ordered sequence ids.
    std::map<std::tuple<std::string, std::string, int>, std::vector<int>> groups;
    for (std::size_t i = 0; i < index.records.size(); ++i) {
        const auto& rec = index.records[i];
        groups[{rec.subject, rec.condition, rec.view_label}].push_back(static_cast<int>(i));
    }

    auto collect = [&](const EvalSelector& sel) {
        std::vector<int> ids;
        for (const auto& [key, seqs] : groups) {
            if (std::get<1>(key) != sel.condition) continue;
            for (const int ordinal : sel.seq_indices) {
                if (ordinal >= 0 && ordinal < static_cast<int>(seqs.size())) {
                    ids.push_back(seqs[static_cast<std::size_t>(ordinal)]);
                }
            }
        }
        std::sort(ids.begin(), ids.end());
        return ids;
    };

    const auto gallery_ids = collect(protocol.gallery);
    std::vector<std::vector<int>> probe_ids;
    for (const auto& sel : protocol.probes) probe_ids.push_back(collect(sel));

    // Disjointness by (subject, condition, seq) key is structural here:
    // overlapping ids would evaluate a probe against itself.
    for (const auto& ids : probe_ids) {
        for (const int id : ids) {
            if (std::binary_search(gallery_ids.begin(), gallery_ids.end(), id)) {
                throw ValueError("evaluation protocol: probe sequence also selected as gallery");
            }
        }
    }

    std::vector<int> all_ids = gallery_ids;
    for (const auto& ids : probe_ids) all_ids.insert(all_ids.end(), ids.begin(), ids.end());
    std::sort(all_ids.begin(), all_ids.end());
    all_ids.erase(std::unique(all_ids.begin(), all_ids.end()), all_ids.end());
    const auto embeddings = embed_many(model, data, all_ids, threads);
    auto embedding_of = [&](int id) -> const EmbedResult& {
        const auto it = std::lower_bound(all_ids.begin(), all_ids.end(), id);
        return embeddings[static_cast<std::size_t>(it - all_ids.begin())];
    };

    std::vector<RetrievalItem> gallery;
    for (const int id : gallery_ids) {
        const auto& rec = index.records[static_cast<std::size_t>(id)];
        gallery.push_back({embedding_of(id).embedding, rec.subject, rec.view_label});
    }

    EvalReport report;
    report.view_angles = index.view_angles;
    int probe_view_hits = 0, probe_count = 0;
    for (std::size_t s = 0; s < protocol.probes.size(); ++s) {
        const auto& sel = protocol.probes[s];
        std::string label = sel.condition + ":";
        for (std::size_t i = 0; i < sel.seq_indices.size(); ++i) {
            label += (i ? "," : "") + std::to_string(sel.seq_indices[i]);
        }
        report.probe_conditions.push_back(label);
        report.cells.emplace_back(index.num_views());

        std::vector<RetrievalItem> probes;
        std::vector<int> probe_views;
        for (const int id : probe_ids[s]) {
            const auto& rec = index.records[static_cast<std::size_t>(id)];
            const auto& emb = embedding_of(id);
            probes.push_back({emb.embedding, rec.subject, rec.view_label});
            probe_views.push_back(rec.view_label);
            if (emb.predicted_view == rec.view_label) ++probe_view_hits;
            ++probe_count;
        }
        const auto hits = rank1_hits(gallery, probes, protocol.exclude_identical_view);
        auto& row = report.cells.back();
        for (std::size_t p = 0; p < probes.size(); ++p) {
            auto& cell = row[static_cast<std::size_t>(probe_views[p])];
            if (!hits[p].has_value()) continue;  // empty effective gallery
            ++cell.total;
            if (*hits[p]) ++cell.hits;
        }
        for (std::size_t p = 0; p < probes.size(); ++p) {
            if (!hits[p].has_value()) ++report.skipped_probes;
        }
    }
    report.view_accuracy_pct =
        probe_count > 0 ? 100.0 * probe_view_hits / probe_count : 0.0;
    return report;
}

double view_accuracy(const GaitModel& model, const LoadedDataset& data,
                     std::span<const int> sequence_ids, int threads) {
    std::vector<int> ids(sequence_ids.begin(), sequence_ids.end());
    const auto embeddings = embed_many(model, data, ids, threads);
    int hits = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto& rec = data.index().records[static_cast<std::size_t>(ids[i])];
        if (embeddings[i].predicted_view == rec.view_label) ++hits;
    }
    return ids.empty() ? 0.0 : 100.0 * hits / static_cast<double>(ids.size());
}

}  // namespace vige
