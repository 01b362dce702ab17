#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vige/data.hpp"
#include "vige/model.hpp"

namespace vige {

// Which sequences of a (subject, condition, view) group enter a set, by
// ordinal position. Text form: "nm:0-1" or "nm:0,2,5".
struct EvalSelector {
    std::string condition;
    std::vector<int> seq_indices;
};

EvalSelector parse_selector(const std::string& spec);

struct EvalProtocol {
    EvalSelector gallery;
    std::vector<EvalSelector> probes;
    bool exclude_identical_view = true;
};

struct EmbedResult {
    std::vector<double> embedding;  // flattened [n x D] final feature
    int predicted_view = 0;
};

// Deterministic forward pass over every frame of the sequence, projection
// selected by the predicted view.
EmbedResult embed_sequence(const GaitModel& model, std::span<const Frame> frames);

// Retrieval item for the rank-1 core (kept independent of the model so the
// protocol can be checked against brute-force oracles on raw embeddings).
struct RetrievalItem {
    std::vector<double> embedding;
    std::string subject;
    int view = 0;
};

// Nearest-gallery-subject hit per probe under summed per-strip squared
// Euclidean distance (equivalently, squared distance of the flattened
// embedding). Ties go to the smallest gallery index. nullopt marks a probe
// whose effective gallery is empty after identical-view exclusion.
std::vector<std::optional<bool>> rank1_hits(std::span<const RetrievalItem> gallery,
                                            std::span<const RetrievalItem> probes,
                                            bool exclude_identical_view);

struct EvalCell {
    int hits = 0;
    int total = 0;
    bool defined() const { return total > 0; }
    double pct() const { return 100.0 * hits / total; }
};

struct EvalReport {
    std::vector<double> view_angles;            // column labels
    std::vector<std::string> probe_conditions;  // row labels (selector text)
    std::vector<std::vector<EvalCell>> cells;   // [condition][view]
    int skipped_probes = 0;                     // probes with empty effective gallery after exclusion
    double view_accuracy_pct = 0.0;

    std::optional<double> condition_mean(std::size_t row) const;
    std::optional<double> overall_mean() const;
    std::string to_tsv() const;
    std::string to_table() const;
};

// Full protocol run: gallery/probe assembly, embedding extraction
// (parallelized across sequences), rank-1 per (condition, probe view), and
// view-classification accuracy over all probe sequences.
EvalReport evaluate(const GaitModel& model, const LoadedDataset& data,
                    const EvalProtocol& protocol, int threads = 1);

// Fraction (percent) of sequences whose predicted view matches the label.
double view_accuracy(const GaitModel& model, const LoadedDataset& data,
                     std::span<const int> sequence_ids, int threads = 1);

}  // namespace vige
