#pragma once

#include <array>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "vige/ops.hpp"
#include "vige/rng.hpp"
#include "vige/tensor.hpp"

namespace vige {

// Named trainable tensors in a fixed, deterministic order.
using ParamList = std::vector<std::pair<std::string, TensorPtr>>;

struct BackboneConfig {
    std::vector<int> widths{8, 16, 32};  // output channels per conv block
    int kernel = 3;
    double slope = 0.01;      // leaky-relu
    int pool = 2;             // spatial max-pool window == stride per block
    bool emit_global = true;  // produce the set-pooled global map x_g
    int input_h = 64;
    int input_w = 44;

    void validate() const;
    // Spatial size after all blocks; the closed-form shape rule.
    std::array<std::int64_t, 2> final_hw() const;
    int final_channels() const { return widths.back(); }
};

struct FeatureMaps {
    TensorPtr x_f;  // [C_f x H_f x W_f]
    TensorPtr x_g;  // same shape, present when the global path is enabled
};

// Maps a silhouette sequence (frames as [1 x H x W] tensors) to feature maps.
// Anything downstream only sees this interface, so other sequence encoders
// can slot in without touching the pyramid, view head, or projection bank.
class Backbone {
  public:
    virtual ~Backbone() = default;
    virtual FeatureMaps extract(Tape& tape, std::span<const TensorPtr> frames) const = 0;
    virtual int feature_channels() const = 0;
    virtual std::array<std::int64_t, 2> feature_hw() const = 0;
    virtual bool has_global() const = 0;
    virtual void collect_params(const std::string& prefix, ParamList& out) const = 0;
};

// Per-frame conv blocks (conv -> bias -> leaky-relu -> spatial max-pool) with
// an elementwise-max pool over the frame set at the end, plus an optional
// global path that set-pools after block 1 and runs the remaining blocks on
// the pooled map.
class ConvSetBackbone final : public Backbone {
  public:
    ConvSetBackbone(BackboneConfig cfg, Rng& rng);

    FeatureMaps extract(Tape& tape, std::span<const TensorPtr> frames) const override;
    int feature_channels() const override { return cfg_.final_channels(); }
    std::array<std::int64_t, 2> feature_hw() const override { return cfg_.final_hw(); }
    bool has_global() const override { return cfg_.emit_global; }
    void collect_params(const std::string& prefix, ParamList& out) const override;

    const BackboneConfig& config() const { return cfg_; }

  private:
    TensorPtr apply_block(Tape& tape, const TensorPtr& x, std::size_t block) const;

    BackboneConfig cfg_;
    std::vector<TensorPtr> kernels_;  // per block [C_out x C_in x k x k]
    std::vector<TensorPtr> biases_;   // per block [C_out]
};

}  // namespace vige
