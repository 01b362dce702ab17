#pragma once

#include <memory>
#include <optional>
#include <string>

#include "vige/backbone.hpp"
#include "vige/losses.hpp"
#include "vige/projection_bank.hpp"
#include "vige/pyramid.hpp"
#include "vige/view_head.hpp"

namespace vige {

enum class SelectionMode { predicted, ground_truth };

SelectionMode selection_mode_from_string(const std::string& s);
std::string to_string(SelectionMode m);

struct ModelConfig {
    BackboneConfig backbone;
    PyramidConfig pyramid;
    int view_dim = 32;  // D_v
    int num_views = 0;  // M, set from the dataset
    bool bank_enabled = true;  // false = baseline model without view embedding
    Placement placement = Placement::after_separate_fc;
    bool shared_bank = false;
    InitScheme init_scheme = InitScheme::identity_perturbed;
    double init_eps = 0.01;
    std::uint64_t seed = 0;

    void validate() const;
};

// Output of one sequence's forward pass.
struct SequenceOutput {
    std::vector<TensorPtr> final_rows;  // n vectors of dim D (f_final)
    TensorPtr final_block;              // [n x D], the same rows stacked
    ViewPrediction view;
    int selected_view = -1;  // view whose projection group was applied (-1: none)
};

// The full two-branch pipeline: backbone -> {pyramid+projection, view head}.
class GaitModel {
  public:
    explicit GaitModel(const ModelConfig& cfg);

    // forced_view overrides the selection source (ground-truth training mode
    // and isolation tests); the view head still runs and is still trained.
    SequenceOutput forward(Tape& tape, std::span<const TensorPtr> frames,
                           std::optional<int> forced_view = std::nullopt) const;

    ParamList params() const;
    void zero_grads() const;

    const ModelConfig& config() const { return cfg_; }
    const Backbone& backbone() const { return *backbone_; }
    const ProjectionBank* bank() const { return bank_ ? &*bank_ : nullptr; }
    int strip_count() const { return cfg_.pyramid.strip_count(); }
    int final_dim() const;

  private:
    ModelConfig cfg_;
    std::unique_ptr<ConvSetBackbone> backbone_;
    std::unique_ptr<HorizontalPyramid> pyramid_;
    std::unique_ptr<ViewHead> head_;
    std::optional<ProjectionBank> bank_;
};

}  // namespace vige
