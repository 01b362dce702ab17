#include "vige/view_head.hpp"

#include <algorithm>
#include <cmath>

#include "vige/ops.hpp"

namespace vige {

std::vector<double> softmax(const std::vector<double>& logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double denom = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - m);
        denom += out[i];
    }
    for (auto& v : out) v /= denom;
    return out;
}

int argmax_first(const std::vector<double>& values) {
    int best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
    }
    return best;
}

ViewHead::ViewHead(int feature_channels, bool with_global, int view_dim, int num_views, Rng& rng)
    : pooled_dim_(with_global ? 2 * feature_channels : feature_channels),
      view_dim_(view_dim),
      num_views_(num_views),
      with_global_(with_global) {
    if (num_views_ < 2) throw ValueError("view head: need at least 2 views");
    if (view_dim_ < 1) throw ValueError("view head: view feature dimension must be >= 1");
    const double b1 = std::sqrt(6.0 / static_cast<double>(view_dim_ + pooled_dim_));
    fc_ = zeros({view_dim_, pooled_dim_}, true);
    for (auto& v : fc_->data) v = rng.uniform(-b1, b1);
    const double b2 = std::sqrt(6.0 / static_cast<double>(num_views_ + view_dim_));
    w_view_ = zeros({num_views_, view_dim_}, true);
    for (auto& v : w_view_->data) v = rng.uniform(-b2, b2);
    b_view_ = zeros({num_views_}, true);
}

TensorPtr ViewHead::view_feature(Tape& tape, const FeatureMaps& maps) const {
    TensorPtr pooled;
    if (with_global_) {
        if (!maps.x_g) throw ValueError("view head: configured for a global map, none provided");
        // GAP is per-channel, so pooling each map then concatenating equals
        // pooling the channel-concatenated map.
        pooled = ops::concat(tape, ops::global_avg_pool(tape, maps.x_f),
                             ops::global_avg_pool(tape, maps.x_g));
    } else {
        pooled = ops::global_avg_pool(tape, maps.x_f);
    }
    if (pooled->shape[0] != pooled_dim_) {
        throw ShapeError("view head: pooled width " + shape_str(pooled->shape) +
                         " does not match fc width " + std::to_string(pooled_dim_));
    }
    return ops::matmul(tape, fc_, pooled);
}

ViewPrediction ViewHead::predict_view(Tape& tape, const TensorPtr& f_v) const {
    ViewPrediction pred;
    pred.logits = ops::bias_add(tape, ops::matmul(tape, w_view_, f_v), b_view_);
    pred.probs = softmax(pred.logits->data);
    pred.y_hat = argmax_first(pred.logits->data);
    return pred;
}

void ViewHead::collect_params(const std::string& prefix, ParamList& out) const {
    out.emplace_back(prefix + ".fc", fc_);
    out.emplace_back(prefix + ".w_view", w_view_);
    out.emplace_back(prefix + ".b_view", b_view_);
}

}  // namespace vige
