#pragma once

#include <vector>

#include "vige/backbone.hpp"
#include "vige/tensor.hpp"

namespace vige {

struct ViewPrediction {
    TensorPtr logits;           // [M], on the tape (feeds the CE branch)
    std::vector<double> probs;  // softmax of logits, plain values
    int y_hat = 0;              // argmax, first index on ties
};

// View-classification branch: global-average-pool the feature map(s), map
// through a linear layer to the view feature f_v, then score the M discrete
// views. View selection is a hard argmax; no gradient flows through the
// selected index.
class ViewHead {
  public:
    ViewHead(int feature_channels, bool with_global, int view_dim, int num_views, Rng& rng);

    TensorPtr view_feature(Tape& tape, const FeatureMaps& maps) const;  // [D_v]
    ViewPrediction predict_view(Tape& tape, const TensorPtr& f_v) const;

    void collect_params(const std::string& prefix, ParamList& out) const;

    int num_views() const { return num_views_; }
    int view_dim() const { return view_dim_; }

  private:
    int pooled_dim_;  // C_f, doubled when the global map is concatenated
    int view_dim_;
    int num_views_;
    bool with_global_;
    TensorPtr fc_;      // [D_v x pooled_dim]
    TensorPtr w_view_;  // [M x D_v]
    TensorPtr b_view_;  // [M]
};

// Numerically stabilized softmax (subtract max); probabilities of any finite
// logit vector sum to 1.
std::vector<double> softmax(const std::vector<double>& logits);

// First index among the maximizers.
int argmax_first(const std::vector<double>& values);

}  // namespace vige
