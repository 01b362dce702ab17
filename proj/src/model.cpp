#include "vige/model.hpp"

#include "vige/ops.hpp"

namespace vige {

SelectionMode selection_mode_from_string(const std::string& s) {
    if (s == "predicted") return SelectionMode::predicted;
    if (s == "ground-truth") return SelectionMode::ground_truth;
    throw ValueError("unknown selection mode '" + s + "' (expected predicted or ground-truth)");
}

std::string to_string(SelectionMode m) {
    return m == SelectionMode::predicted ? "predicted" : "ground-truth";
}

void ModelConfig::validate() const {
    backbone.validate();
    pyramid.validate();
    if (view_dim < 1) throw ValueError("model: view_dim must be >= 1");
    if (num_views < 2) throw ValueError("model: need at least 2 discrete views");
    if (init_eps < 0.0) throw ValueError("model: init_eps must be nonnegative");
    const auto hw = backbone.final_hw();
    int max_scale = 0;
    for (const int s : pyramid.scales) max_scale = std::max(max_scale, s);
    if (hw[0] < max_scale) {
        throw ValueError("model: feature map height " + std::to_string(hw[0]) +
                         " cannot host pyramid scale " + std::to_string(max_scale));
    }
    if (bank_enabled && placement == Placement::replace_separate_fc &&
        pyramid.out_dim != backbone.final_channels()) {
        // The bank's square D x D matrices consume the pooled strips
        // directly in this placement, so D must equal C_f.
        throw ValueError("model: replace-separate-fc placement requires out_dim == final "
                         "channels (got D=" +
                         std::to_string(pyramid.out_dim) + ", C_f=" +
                         std::to_string(backbone.final_channels()) + ")");
    }
}

GaitModel::GaitModel(const ModelConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    Rng root(cfg_.seed);
    Rng backbone_rng = root.split(1);
    Rng pyramid_rng = root.split(2);
    Rng head_rng = root.split(3);
    Rng bank_rng = root.split(4);

    backbone_ = std::make_unique<ConvSetBackbone>(cfg_.backbone, backbone_rng);
    pyramid_ = std::make_unique<HorizontalPyramid>(cfg_.pyramid, backbone_->feature_channels(),
                                                   pyramid_rng);
    head_ = std::make_unique<ViewHead>(backbone_->feature_channels(), cfg_.backbone.emit_global,
                                       cfg_.view_dim, cfg_.num_views, head_rng);
    if (cfg_.bank_enabled) {
        bank_.emplace(cfg_.num_views, cfg_.pyramid.strip_count(), final_dim(), cfg_.shared_bank,
                      cfg_.init_scheme, cfg_.init_eps, bank_rng);
    }
}

int GaitModel::final_dim() const {
    return cfg_.bank_enabled && cfg_.placement == Placement::replace_separate_fc
               ? backbone_->feature_channels()
               : cfg_.pyramid.out_dim;
}

SequenceOutput GaitModel::forward(Tape& tape, std::span<const TensorPtr> frames,
                                  std::optional<int> forced_view) const {
    SequenceOutput out;
    const auto maps = backbone_->extract(tape, frames);

    // Branch 2 first: the view prediction drives matrix selection.
    out.view = head_->predict_view(tape, head_->view_feature(tape, maps));

    // Branch 1: pyramid pooling, per-strip mapping, view projection.
    auto strips = pyramid_->pool_strips(tape, maps);
    std::vector<TensorPtr> hpm;
    if (cfg_.bank_enabled && cfg_.placement == Placement::replace_separate_fc) {
        hpm = std::move(strips);  // the projection takes the separate FC's place
    } else {
        hpm = pyramid_->separate_fc(tape, strips);
    }

    if (cfg_.bank_enabled) {
        out.selected_view = forced_view ? *forced_view : out.view.y_hat;
        const auto group = bank_->select(out.selected_view);
        out.final_rows = ProjectionBank::project(tape, hpm, group);
    } else {
        out.final_rows = std::move(hpm);
    }
    out.final_block = ops::stack_rows(tape, out.final_rows);
    return out;
}

ParamList GaitModel::params() const {
    ParamList list;
    backbone_->collect_params("backbone", list);
    if (!(cfg_.bank_enabled && cfg_.placement == Placement::replace_separate_fc)) {
        pyramid_->collect_params("pyramid", list);
    }
    head_->collect_params("view_head", list);
    if (bank_) bank_->collect_params("bank", list);
    return list;
}

void GaitModel::zero_grads() const {
    for (const auto& [name, t] : params()) t->zero_grad();
}

}  // namespace vige
