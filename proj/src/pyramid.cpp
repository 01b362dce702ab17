#include "vige/pyramid.hpp"

#include <cmath>
#include <string>

#include "vige/ops.hpp"

namespace vige {

int PyramidConfig::strip_count() const {
    int n = 0;
    for (const int s : scales) n += s;
    return n;
}

void PyramidConfig::validate() const {
    if (scales.empty()) throw ValueError("pyramid: at least one scale required");
    for (const int s : scales) {
        if (s < 1) throw ValueError("pyramid: scale must be >= 1");
    }
    if (out_dim < 1) throw ValueError("pyramid: output dimension must be >= 1");
}

std::vector<std::pair<std::int64_t, std::int64_t>> horizontal_bands(std::int64_t rows,
                                                                    int parts) {
    if (parts < 1 || rows < parts) {
        throw ValueError("pyramid: cannot cut " + std::to_string(rows) + " rows into " +
                         std::to_string(parts) + " bands");
    }
    std::vector<std::pair<std::int64_t, std::int64_t>> bands;
    const std::int64_t base = rows / parts;
    const std::int64_t extra = rows % parts;  // earlier bands take one extra row
    std::int64_t start = 0;
    for (int b = 0; b < parts; ++b) {
        const std::int64_t len = base + (b < extra ? 1 : 0);
        bands.emplace_back(start, start + len);
        start += len;
    }
    return bands;
}

HorizontalPyramid::HorizontalPyramid(PyramidConfig cfg, int feature_channels, Rng& rng)
    : cfg_(std::move(cfg)), channels_(feature_channels) {
    cfg_.validate();
    const int n = cfg_.strip_count();
    const double bound = std::sqrt(6.0 / static_cast<double>(cfg_.out_dim + channels_));
    for (int i = 0; i < n; ++i) {
        auto w = zeros({cfg_.out_dim, channels_}, true);
        for (auto& v : w->data) v = rng.uniform(-bound, bound);
        weights_.push_back(std::move(w));
    }
}

std::vector<TensorPtr> HorizontalPyramid::pool_strips(Tape& tape, const FeatureMaps& maps) const {
    if (!maps.x_f) throw ValueError("pyramid: missing feature map");
    const std::int64_t rows = maps.x_f->shape[1];
    int max_scale = 0;
    for (const int s : cfg_.scales) max_scale = std::max(max_scale, s);
    if (rows < max_scale) {
        throw ValueError("pyramid: feature map height " + std::to_string(rows) +
                         " is smaller than the largest scale " + std::to_string(max_scale));
    }
    std::vector<TensorPtr> strips;
    strips.reserve(static_cast<std::size_t>(cfg_.strip_count()));
    for (const int s : cfg_.scales) {
        for (const auto& [lo, hi] : horizontal_bands(rows, s)) {
            auto pooled = ops::band_maxmean_pool(tape, maps.x_f, lo, hi);
            if (maps.x_g) {
                pooled = ops::add(tape, pooled, ops::band_maxmean_pool(tape, maps.x_g, lo, hi));
            }
            strips.push_back(std::move(pooled));
        }
    }
    return strips;
}

std::vector<TensorPtr> HorizontalPyramid::separate_fc(Tape& tape,
                                                      std::span<const TensorPtr> strips) const {
    if (strips.size() != weights_.size()) {
        throw ValueError("pyramid: got " + std::to_string(strips.size()) + " strips, expected " +
                         std::to_string(weights_.size()));
    }
    std::vector<TensorPtr> rows;
    rows.reserve(strips.size());
    for (std::size_t i = 0; i < strips.size(); ++i) {
        rows.push_back(ops::matmul(tape, weights_[i], strips[i]));
    }
    return rows;
}

void HorizontalPyramid::collect_params(const std::string& prefix, ParamList& out) const {
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        out.emplace_back(prefix + ".fc" + std::to_string(i), weights_[i]);
    }
}

}  // namespace vige
