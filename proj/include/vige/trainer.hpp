#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "vige/checkpoint.hpp"
#include "vige/config.hpp"
#include "vige/data.hpp"
#include "vige/model.hpp"

namespace vige {

// One Adam update with bias correction over an ordered parameter list.
// Moments are stored per parameter in list order; t counts updates from 1.
struct AdamState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    std::int64_t t = 0;
};

void adam_step(const ParamList& params, AdamState& state, double lr, double beta1, double beta2,
               double eps);

struct MetricsRow {
    std::int64_t iteration;
    double ce;
    double trip;
    double joint;
    double batch_view_acc;
    double lr;
};

constexpr const char* kMetricsHeader = "iteration\tce\ttrip\tjoint\tbatch_view_acc\tlr";
std::string format_metrics_row(const MetricsRow& row);

// Joint CE + triplet training over P x K batches. One step is strictly
// sequential (sample -> forward -> backward -> update); the whole run is
// reproducible bitwise from the seed.
class Trainer {
  public:
    Trainer(GaitModel& model, const LoadedDataset& data, TrainConfig cfg);

    // Runs until cfg.iterations, appending one TSV row per step to `log`
    // (header included when starting from iteration 0). Throws NumericError
    // with a diagnostic dump if a loss goes non-finite.
    std::vector<MetricsRow> run(std::ostream* log = nullptr);

    MetricsRow step();

    std::int64_t iteration() const { return iteration_; }

    Checkpoint make_checkpoint() const;
    // Restores parameters, moments, iteration counter and sampler state.
    // The model and config must match the checkpoint's snapshot.
    void restore(const Checkpoint& ckpt);

  private:
    GaitModel& model_;
    const LoadedDataset& data_;
    TrainConfig cfg_;
    Rng rng_;
    AdamState adam_;
    std::int64_t iteration_ = 0;
};

struct GradCheckResult {
    std::string name;
    double max_rel_err;
};

// Finite-difference audit of every parameter tensor against the analytic
// gradient of the joint loss on a synthetic in-memory batch (ground-truth
// view selection keeps the objective smooth in the parameters).
std::vector<GradCheckResult> full_model_gradcheck(const GaitModel& model, const LossWeights& w,
                                                  int subjects, int seqs_per_subject,
                                                  int frames_per_seq, double eps,
                                                  int coords_per_tensor, std::uint64_t seed);

}  // namespace vige
