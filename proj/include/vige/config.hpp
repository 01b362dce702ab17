#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vige/losses.hpp"
#include "vige/model.hpp"

namespace vige {

struct TrainConfig {
    double lr = 1e-4;
    std::optional<std::pair<double, std::int64_t>> lr_drop;  // (factor, at_iteration)
    std::int64_t iterations = 1000;
    int subjects_per_batch = 8;  // P
    int seqs_per_subject = 16;   // K
    int frames_per_seq = 16;     // T_s
    LossWeights weights;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;
    SelectionMode selection = SelectionMode::predicted;

    void validate() const;
    double lr_at(std::int64_t iteration) const;  // schedule as a pure function
};

// Line-based `key = value` text with '#' comments; unknown keys are errors.
std::map<std::string, std::string> parse_kv_text(const std::string& text);
std::map<std::string, std::string> parse_kv_file(const std::string& path);

// Round-trippable snapshot of the model + training configuration, in the
// same key=value syntax the CLI config files use.
std::string encode_configs(const ModelConfig& model, const TrainConfig& train);
void decode_configs(const std::string& text, ModelConfig& model, TrainConfig& train);

}  // namespace vige
