#include "vige/backbone.hpp"

#include <cmath>
#include <string>

namespace vige {

void BackboneConfig::validate() const {
    if (widths.empty()) throw ValueError("backbone: at least one conv block required");
    for (const int w : widths) {
        if (w < 1) throw ValueError("backbone: channel width must be >= 1");
    }
    if (kernel < 1) throw ValueError("backbone: kernel size must be >= 1");
    if (pool < 1) throw ValueError("backbone: pool window must be >= 1");
    if (slope < 0.0 || slope >= 1.0) throw ValueError("backbone: slope must lie in [0,1)");
    const auto hw = final_hw();
    if (hw[0] < 2 || hw[1] < 2) {
        throw ValueError("backbone: final feature map " + std::to_string(hw[0]) + "x" +
                         std::to_string(hw[1]) + " too small for strip pooling");
    }
}

std::array<std::int64_t, 2> BackboneConfig::final_hw() const {
    std::int64_t h = input_h, w = input_w;
    const int pad = kernel / 2;
    for (std::size_t b = 0; b < widths.size(); ++b) {
        h = ops::conv_out_dim(h, kernel, 1, pad);
        w = ops::conv_out_dim(w, kernel, 1, pad);
        h = ops::conv_out_dim(h, pool, pool, 0);
        w = ops::conv_out_dim(w, pool, pool, 0);
    }
    return {h, w};
}

ConvSetBackbone::ConvSetBackbone(BackboneConfig cfg, Rng& rng) : cfg_(std::move(cfg)) {
    cfg_.validate();
    int c_in = 1;
    for (std::size_t b = 0; b < cfg_.widths.size(); ++b) {
        const int c_out = cfg_.widths[b];
        const std::int64_t fan_in =
            static_cast<std::int64_t>(c_in) * cfg_.kernel * cfg_.kernel;
        const double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));
        auto k = zeros({c_out, c_in, cfg_.kernel, cfg_.kernel}, true);
        for (auto& v : k->data) v = std_dev * rng.normal();
        kernels_.push_back(std::move(k));
        biases_.push_back(zeros({c_out}, true));
        c_in = c_out;
    }
}

TensorPtr ConvSetBackbone::apply_block(Tape& tape, const TensorPtr& x, std::size_t block) const {
    const int pad = cfg_.kernel / 2;
    auto y = ops::conv2d(tape, x, kernels_[block], 1, pad);
    y = ops::bias_add(tape, y, biases_[block]);
    y = ops::leaky_relu(tape, y, cfg_.slope);
    return ops::max_pool2d(tape, y, cfg_.pool, cfg_.pool);
}

FeatureMaps ConvSetBackbone::extract(Tape& tape, std::span<const TensorPtr> frames) const {
    if (frames.empty()) throw ValueError("backbone: empty silhouette sequence");
    for (const auto& f : frames) {
        if (f->shape != Shape{1, cfg_.input_h, cfg_.input_w}) {
            throw ShapeError("backbone: frame shape " + shape_str(f->shape) +
                             " does not match configured input [1x" +
                             std::to_string(cfg_.input_h) + "x" + std::to_string(cfg_.input_w) +
                             "]");
        }
    }

    // Per-frame features through every block, then one set pool.
    std::vector<TensorPtr> stage1;
    stage1.reserve(frames.size());
    for (const auto& f : frames) stage1.push_back(apply_block(tape, f, 0));

    std::vector<TensorPtr> current = stage1;
    for (std::size_t b = 1; b < cfg_.widths.size(); ++b) {
        for (auto& t : current) t = apply_block(tape, t, b);
    }
    FeatureMaps maps;
    maps.x_f = ops::set_max_pool(tape, current);

    if (cfg_.emit_global) {
        // Global path: set-pool the block-1 features, then reuse the
        // remaining blocks on the pooled map.
        auto g = ops::set_max_pool(tape, stage1);
        for (std::size_t b = 1; b < cfg_.widths.size(); ++b) g = apply_block(tape, g, b);
        maps.x_g = std::move(g);
    }
    return maps;
}

void ConvSetBackbone::collect_params(const std::string& prefix, ParamList& out) const {
    for (std::size_t b = 0; b < kernels_.size(); ++b) {
        out.emplace_back(prefix + ".block" + std::to_string(b) + ".kernel", kernels_[b]);
        out.emplace_back(prefix + ".block" + std::to_string(b) + ".bias", biases_[b]);
    }
}

}  // namespace vige
