#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vige/tensor.hpp"

namespace vige {

struct LossWeights {
    double lambda_ce = 0.5;
    double lambda_trip = 1.0;
    double margin = 0.2;

    void validate() const;
};

struct Triplet {
    int anchor;
    int positive;
    int negative;
};

// Every valid (anchor, positive, negative) index combination in the batch,
// exactly once, in lexicographic order: anchor and positive share a subject,
// the negative does not. Throws when the batch admits no triplet.
std::vector<Triplet> mine_all(std::span<const int> subjects);

// Triplet count of a balanced P-subjects-by-K-sequences batch.
std::int64_t balanced_triplet_count(int subjects, int seqs_per_subject);

// Mean over the batch of -log softmax(logits)[label]; differentiable.
TensorPtr ce_loss(Tape& tape, const TensorPtr& logits, std::span<const int> labels);

// Batch-all triplet loss over per-strip features. Each feature tensor is the
// [n x D] strip matrix of one sequence; distances are squared Euclidean per
// strip. Loss = (1/K) * sum_triplets sum_strips max(margin - d_neg + d_pos, 0)
// with K the triplet count; the hinge subgradient at the kink is 0.
TensorPtr triplet_loss(Tape& tape, std::span<const TensorPtr> features,
                       std::span<const Triplet> triplets, double margin);

// lambda_ce * ce + lambda_trip * trip.
TensorPtr joint_loss(Tape& tape, const TensorPtr& ce, const TensorPtr& trip,
                     const LossWeights& weights);

}  // namespace vige
