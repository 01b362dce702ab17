#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "vige/backbone.hpp"
#include "vige/tensor.hpp"

namespace vige {

struct PyramidConfig {
    std::vector<int> scales{1, 2, 4};  // strip counts per pyramid level
    int out_dim = 64;                  // D, the per-strip feature dimension

    int strip_count() const;  // n = sum(scales)
    void validate() const;
};

// Horizontal bands for one scale over H_f rows: near-equal split, earlier
// bands one row larger when H_f is not divisible.
std::vector<std::pair<std::int64_t, std::int64_t>> horizontal_bands(std::int64_t rows,
                                                                    int parts);

// Horizontal pyramid pooling + per-strip linear mapping. Rows are ordered
// scale-major, then band index within the scale.
class HorizontalPyramid {
  public:
    HorizontalPyramid(PyramidConfig cfg, int feature_channels, Rng& rng);

    // n per-strip pooled vectors of dim C_f: per band, (max + mean) over the
    // band's spatial extent; the global map's band pool is added in when
    // present.
    std::vector<TensorPtr> pool_strips(Tape& tape, const FeatureMaps& maps) const;

    // Per-strip linear maps (weights NOT shared across strips): row i equals
    // weights[i] * strips[i].
    std::vector<TensorPtr> separate_fc(Tape& tape, std::span<const TensorPtr> strips) const;

    void collect_params(const std::string& prefix, ParamList& out) const;

    const PyramidConfig& config() const { return cfg_; }
    int feature_channels() const { return channels_; }

  private:
    PyramidConfig cfg_;
    int channels_;
    std::vector<TensorPtr> weights_;  // n matrices [D x C_f]
};

}  // namespace vige
