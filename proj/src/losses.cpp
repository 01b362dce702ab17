#include "vige/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vige/ops.hpp"

namespace vige {

void LossWeights::validate() const {
    if (lambda_ce < 0.0 || lambda_trip < 0.0 || margin < 0.0) {
        throw ValueError("loss weights and margin must be nonnegative");
    }
}

std::vector<Triplet> mine_all(std::span<const int> subjects) {
    const int batch = static_cast<int>(subjects.size());
    std::vector<Triplet> out;
    for (int a = 0; a < batch; ++a) {
        for (int p = 0; p < batch; ++p) {
            if (p == a || subjects[p] != subjects[a]) continue;
            for (int n = 0; n < batch; ++n) {
                if (subjects[n] == subjects[a]) continue;
                out.push_back({a, p, n});
            }
        }
    }
    if (out.empty()) {
        throw ValueError(
            "degenerate batch: full mining needs a subject with >= 2 sequences and at least two "
            "subjects");
    }
    return out;
}

std::int64_t balanced_triplet_count(int subjects, int seqs_per_subject) {
    const std::int64_t p = subjects, k = seqs_per_subject;
    return p * k * (k - 1) * (p - 1) * k;
}

TensorPtr ce_loss(Tape& tape, const TensorPtr& logits, std::span<const int> labels) {
    if (logits->shape.size() != 2) {
        throw ShapeError("ce_loss: expected [batch x classes] logits, got " +
                         shape_str(logits->shape));
    }
    const std::int64_t batch = logits->shape[0];
    const std::int64_t classes = logits->shape[1];
    if (static_cast<std::int64_t>(labels.size()) != batch) {
        throw ValueError("ce_loss: " + std::to_string(labels.size()) + " labels for batch of " +
                         std::to_string(batch));
    }
    for (const int y : labels) {
        if (y < 0 || y >= classes) {
            throw ValueError("ce_loss: label " + std::to_string(y) + " out of range [0," +
                             std::to_string(classes) + ")");
        }
    }

    auto out = zeros({1}, tape.recording() && logits->requires_grad);
    double acc = 0.0;
    std::vector<double> softmaxes(logits->data.size());
    for (std::int64_t j = 0; j < batch; ++j) {
        const double* row = logits->data.data() + j * classes;
        double m = row[0];
        for (std::int64_t i = 1; i < classes; ++i) m = std::max(m, row[i]);
        double denom = 0.0;
        for (std::int64_t i = 0; i < classes; ++i) denom += std::exp(row[i] - m);
        const double lse = m + std::log(denom);
        acc += lse - row[labels[static_cast<std::size_t>(j)]];
        for (std::int64_t i = 0; i < classes; ++i) {
            softmaxes[static_cast<std::size_t>(j * classes + i)] = std::exp(row[i] - lse);
        }
    }
    out->data[0] = acc / static_cast<double>(batch);
    if (!std::isfinite(out->data[0])) throw NumericError("ce_loss produced a non-finite value");

    if (out->requires_grad) {
        std::vector<int> y(labels.begin(), labels.end());
        tape.record(out, [logits, out, softmaxes = std::move(softmaxes), y = std::move(y), batch,
                          classes]() {
            const double g = out->grad[0] / static_cast<double>(batch);
            for (std::int64_t j = 0; j < batch; ++j) {
                for (std::int64_t i = 0; i < classes; ++i) {
                    const auto idx = static_cast<std::size_t>(j * classes + i);
                    const double onehot = i == y[static_cast<std::size_t>(j)] ? 1.0 : 0.0;
                    logits->grad[idx] += g * (softmaxes[idx] - onehot);
                }
            }
        });
    }
    return out;
}

namespace {

// Squared Euclidean distance between strip `j` of two [n x D] feature blocks.
double strip_dist_sq(const Tensor& a, const Tensor& b, std::int64_t j, std::int64_t dim) {
    const double* pa = a.data.data() + j * dim;
    const double* pb = b.data.data() + j * dim;
    double acc = 0.0;
    for (std::int64_t d = 0; d < dim; ++d) {
        const double diff = pa[d] - pb[d];
        acc += diff * diff;
    }
    return acc;
}

}  // namespace

TensorPtr triplet_loss(Tape& tape, std::span<const TensorPtr> features,
                       std::span<const Triplet> triplets, double margin) {
    if (triplets.empty()) throw ValueError("triplet_loss: empty triplet set");
    if (features.empty()) throw ValueError("triplet_loss: empty feature batch");
    const Shape& shape = features[0]->shape;
    if (shape.size() != 2) {
        throw ShapeError("triplet_loss: features must be [strips x dim], got " +
                         shape_str(shape));
    }
    bool needs_grad = false;
    for (const auto& f : features) {
        if (f->shape != shape) {
            throw ShapeError("triplet_loss: feature shape " + shape_str(f->shape) +
                             " differs from " + shape_str(shape));
        }
        needs_grad = needs_grad || f->requires_grad;
    }
    const std::int64_t strips = shape[0];
    const std::int64_t dim = shape[1];
    const int batch = static_cast<int>(features.size());
    for (const auto& t : triplets) {
        if (t.anchor < 0 || t.anchor >= batch || t.positive < 0 || t.positive >= batch ||
            t.negative < 0 || t.negative >= batch) {
            throw ValueError("triplet_loss: triplet index out of batch range");
        }
    }

    auto out = zeros({1}, tape.recording() && needs_grad);
    double acc = 0.0;
    for (const auto& t : triplets) {
        for (std::int64_t j = 0; j < strips; ++j) {
            const double d_pos = strip_dist_sq(*features[static_cast<std::size_t>(t.anchor)],
                                               *features[static_cast<std::size_t>(t.positive)], j,
                                               dim);
            const double d_neg = strip_dist_sq(*features[static_cast<std::size_t>(t.anchor)],
                                               *features[static_cast<std::size_t>(t.negative)], j,
                                               dim);
            acc += std::max(margin - d_neg + d_pos, 0.0);
        }
    }
    const double inv_k = 1.0 / static_cast<double>(triplets.size());
    out->data[0] = acc * inv_k;
    if (!std::isfinite(out->data[0])) {
        throw NumericError("triplet_loss produced a non-finite value");
    }

    if (out->requires_grad) {
        std::vector<TensorPtr> feats(features.begin(), features.end());
        std::vector<Triplet> trips(triplets.begin(), triplets.end());
        tape.record(out, [feats = std::move(feats), trips = std::move(trips), out, margin, strips,
                          dim, inv_k]() {
            const double g = out->grad[0] * inv_k;
            for (const auto& t : trips) {
                const auto& fa = feats[static_cast<std::size_t>(t.anchor)];
                const auto& fp = feats[static_cast<std::size_t>(t.positive)];
                const auto& fn = feats[static_cast<std::size_t>(t.negative)];
                for (std::int64_t j = 0; j < strips; ++j) {
                    const double d_pos = strip_dist_sq(*fa, *fp, j, dim);
                    const double d_neg = strip_dist_sq(*fa, *fn, j, dim);
                    if (margin - d_neg + d_pos <= 0.0) continue;  // inactive hinge, 0 at the kink
                    for (std::int64_t d = 0; d < dim; ++d) {
                        const auto idx = static_cast<std::size_t>(j * dim + d);
                        const double ap = fa->data[idx] - fp->data[idx];
                        const double an = fa->data[idx] - fn->data[idx];
                        if (fa->requires_grad) fa->grad[idx] += g * 2.0 * (ap - an);
                        if (fp->requires_grad) fp->grad[idx] -= g * 2.0 * ap;
                        if (fn->requires_grad) fn->grad[idx] += g * 2.0 * an;
                    }
                }
            }
        });
    }
    return out;
}

TensorPtr joint_loss(Tape& tape, const TensorPtr& ce, const TensorPtr& trip,
                     const LossWeights& weights) {
    weights.validate();
    return ops::add(tape, ops::scale(tape, ce, weights.lambda_ce),
                    ops::scale(tape, trip, weights.lambda_trip));
}

}  // namespace vige
