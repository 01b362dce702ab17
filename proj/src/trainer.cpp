#include "vige/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ostream>
#include <sstream>

#include "vige/gradcheck.hpp"
#include "vige/ops.hpp"

namespace vige {

void adam_step(const ParamList& params, AdamState& state, double lr, double beta1, double beta2,
               double eps) {
    if (state.m.empty()) {
        for (const auto& [name, t] : params) {
            state.m.emplace_back(t->data.size(), 0.0);
            state.v.emplace_back(t->data.size(), 0.0);
        }
    }
    if (state.m.size() != params.size()) {
        throw ValueError("adam: moment count does not match parameter count");
    }
    ++state.t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    for (std::size_t p = 0; p < params.size(); ++p) {
        auto& t = params[p].second;
        auto& m = state.m[p];
        auto& v = state.v[p];
        if (m.size() != t->data.size()) {
            throw ValueError("adam: moment shape mismatch for " + params[p].first);
        }
        for (std::size_t i = 0; i < t->data.size(); ++i) {
            const double g = t->grad[i];
            m[i] = beta1 * m[i] + (1.0 - beta1) * g;
            v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            t->data[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
        }
    }
}

std::string format_metrics_row(const MetricsRow& row) {
    char buf[192];
    std::snprintf(buf, sizeof(buf), "%lld\t%.12g\t%.12g\t%.12g\t%.6g\t%.12g",
                  static_cast<long long>(row.iteration), row.ce, row.trip, row.joint,
                  row.batch_view_acc, row.lr);
    return buf;
}

Trainer::Trainer(GaitModel& model, const LoadedDataset& data, TrainConfig cfg)
    : model_(model), data_(data), cfg_(std::move(cfg)), rng_(cfg_.seed) {
    cfg_.validate();
}

MetricsRow Trainer::step() {
    const auto batch = sample_batch(data_, cfg_.subjects_per_batch, cfg_.seqs_per_subject,
                                    cfg_.frames_per_seq, rng_);
    const std::int64_t iter = iteration_ + 1;
    const double lr = cfg_.lr_at(iter);

    Tape tape;
    std::vector<TensorPtr> logit_rows;
    std::vector<TensorPtr> features;
    int view_hits = 0;
    for (const auto& entry : batch.entries) {
        const auto frames = frames_to_tensors(std::span<const Frame* const>(entry.frames));
        std::optional<int> forced;
        if (cfg_.selection == SelectionMode::ground_truth) forced = entry.view_label;
        auto out = model_.forward(tape, frames, forced);
        logit_rows.push_back(out.view.logits);
        features.push_back(out.final_block);
        if (out.view.y_hat == entry.view_label) ++view_hits;
    }

    const auto views = batch.view_labels();
    const auto subjects = batch.subject_labels();
    auto ce = ce_loss(tape, ops::stack_rows(tape, logit_rows), views);
    const auto triplets = mine_all(subjects);
    auto trip = triplet_loss(tape, features, triplets, cfg_.weights.margin);
    auto joint = joint_loss(tape, ce, trip, cfg_.weights);

    MetricsRow row;
    row.iteration = iter;
    row.ce = ce->value();
    row.trip = trip->value();
    row.joint = joint->value();
    row.batch_view_acc = static_cast<double>(view_hits) / static_cast<double>(batch.entries.size());
    row.lr = lr;
    if (!std::isfinite(row.joint)) {
        throw NumericError("training diverged at iteration " + std::to_string(iter));
    }

    model_.zero_grads();
    tape.backward(joint);
    adam_step(model_.params(), adam_, lr, cfg_.beta1, cfg_.beta2, cfg_.adam_eps);
    iteration_ = iter;
    return row;
}

std::vector<MetricsRow> Trainer::run(std::ostream* log) {
    std::vector<MetricsRow> rows;
    if (log && iteration_ == 0) *log << kMetricsHeader << '\n';
    while (iteration_ < cfg_.iterations) {
        MetricsRow row;
        try {
            row = step();
        } catch (const NumericError& e) {
            // Diagnostic dump: where it stopped and how large the gradients were.
            std::ostringstream os;
            os << e.what() << " [iteration " << (iteration_ + 1) << "]";
            if (!rows.empty()) {
                os << " last ce=" << rows.back().ce << " trip=" << rows.back().trip
                   << " joint=" << rows.back().joint;
            }
            os << " grad norms:";
            for (const auto& [name, t] : model_.params()) {
                double norm = 0.0;
                for (const double g : t->grad) norm += g * g;
                os << ' ' << name << '=' << std::sqrt(norm);
            }
            throw NumericError(os.str());
        }
        rows.push_back(row);
        if (log) *log << format_metrics_row(row) << '\n';
    }
    return rows;
}

namespace {

TensorPtr u64_bits_tensor(const std::array<std::uint64_t, 4>& words) {
    std::vector<double> values(4);
    static_assert(sizeof(double) == sizeof(std::uint64_t));
    std::memcpy(values.data(), words.data(), sizeof(std::uint64_t) * 4);
    return tensor({4}, std::move(values));
}

std::array<std::uint64_t, 4> u64_bits_from(const TensorPtr& t) {
    if (t->shape != Shape{4}) throw FormatError("checkpoint: malformed sampler state record");
    std::array<std::uint64_t, 4> words;
    std::memcpy(words.data(), t->data.data(), sizeof(std::uint64_t) * 4);
    return words;
}

}  // namespace

Checkpoint Trainer::make_checkpoint() const {
    Checkpoint ckpt;
    ckpt.config_text = encode_configs(model_.config(), cfg_);
    const auto params = model_.params();
    for (const auto& [name, t] : params) {
        ckpt.tensors.emplace_back("param/" + name, tensor(t->shape, t->data));
    }
    if (!adam_.m.empty()) {
        for (std::size_t p = 0; p < params.size(); ++p) {
            ckpt.tensors.emplace_back("adam/m/" + params[p].first,
                                      tensor(params[p].second->shape, adam_.m[p]));
            ckpt.tensors.emplace_back("adam/v/" + params[p].first,
                                      tensor(params[p].second->shape, adam_.v[p]));
        }
    }
    ckpt.tensors.emplace_back("state/iteration",
                              scalar(static_cast<double>(iteration_)));
    ckpt.tensors.emplace_back("state/adam_t", scalar(static_cast<double>(adam_.t)));
    ckpt.tensors.emplace_back("state/rng", u64_bits_tensor(rng_.state()));
    return ckpt;
}

void Trainer::restore(const Checkpoint& ckpt) {
    const auto params = model_.params();
    adam_.m.clear();
    adam_.v.clear();
    for (const auto& [name, t] : params) {
        const auto& saved = ckpt.find("param/" + name);
        if (saved->shape != t->shape) {
            throw FormatError("checkpoint: shape mismatch for " + name + " (" +
                              shape_str(saved->shape) + " vs " + shape_str(t->shape) + ")");
        }
        t->data = saved->data;
        if (ckpt.contains("adam/m/" + name)) {
            adam_.m.push_back(ckpt.find("adam/m/" + name)->data);
            adam_.v.push_back(ckpt.find("adam/v/" + name)->data);
        }
    }
    if (!adam_.m.empty() && adam_.m.size() != params.size()) {
        throw FormatError("checkpoint: incomplete optimizer state");
    }
    iteration_ = static_cast<std::int64_t>(ckpt.find("state/iteration")->value());
    adam_.t = static_cast<std::int64_t>(ckpt.find("state/adam_t")->value());
    rng_.set_state(u64_bits_from(ckpt.find("state/rng")));
}

std::vector<GradCheckResult> full_model_gradcheck(const GaitModel& model, const LossWeights& w,
                                                  int subjects, int seqs_per_subject,
                                                  int frames_per_seq, double eps,
                                                  int coords_per_tensor, std::uint64_t seed) {
    // Synthetic in-memory batch: subjects in blocks of K, views cycling over
    // the model's M labels. Frames carry continuous values rather than 0/1
    // silhouettes: all-background receptive fields with zero-initialized
    // biases would land pre-activations exactly on the leaky-relu kink,
    // where no finite difference can match any subgradient choice.
    Rng rng(seed);
    const auto& bcfg = model.config().backbone;
    const int batch = subjects * seqs_per_subject;
    std::vector<std::vector<TensorPtr>> frames(static_cast<std::size_t>(batch));
    std::vector<int> subject_labels, view_labels;
    for (int i = 0; i < batch; ++i) {
        for (int t = 0; t < frames_per_seq; ++t) {
            auto f = zeros({1, bcfg.input_h, bcfg.input_w});
            for (auto& px : f->data) px = rng.uniform(0.05, 1.0);
            frames[static_cast<std::size_t>(i)].push_back(std::move(f));
        }
        subject_labels.push_back(i / seqs_per_subject);
        view_labels.push_back(i % model.config().num_views);
    }

    auto objective = [&](Tape& tape) {
        std::vector<TensorPtr> logit_rows, features;
        for (int i = 0; i < batch; ++i) {
            auto out = model.forward(tape, frames[static_cast<std::size_t>(i)],
                                     view_labels[static_cast<std::size_t>(i)]);
            logit_rows.push_back(out.view.logits);
            features.push_back(out.final_block);
        }
        auto ce = ce_loss(tape, ops::stack_rows(tape, logit_rows), view_labels);
        auto trip = triplet_loss(tape, features, mine_all(subject_labels), w.margin);
        return joint_loss(tape, ce, trip, w);
    };

    model.zero_grads();
    {
        Tape tape;
        tape.backward(objective(tape));
    }
    auto eval = [&]() {
        Tape tape(false);
        return objective(tape)->value();
    };

    // Central difference at one coordinate, plus a half-step consistency
    // probe. The objective has hinge/max/leaky-relu kinks; a coordinate whose
    // eps-window straddles one yields step-size-dependent estimates and says
    // nothing about the backward rule, so it is skipped and resampled. A
    // wrong backward rule still shows up as consistent numerics that
    // disagree with the analytic gradient.
    auto check_coord = [&](const TensorPtr& t, std::int64_t c) -> std::optional<double> {
        const auto i = static_cast<std::size_t>(c);
        const double saved = t->data[i];
        auto central = [&](double h) {
            t->data[i] = saved + h;
            const double f_plus = eval();
            t->data[i] = saved - h;
            const double f_minus = eval();
            t->data[i] = saved;
            return (f_plus - f_minus) / (2.0 * h);
        };
        const double n_full = central(eps);
        const double n_half = central(eps / 2.0);
        const double scale = std::max({std::fabs(n_full), std::fabs(n_half), 1e-8});
        // Smooth coordinates agree across step sizes to ~1e-9 here; a kink
        // inside the window shows up orders of magnitude above the gate.
        if (std::fabs(n_full - n_half) / scale > 1e-5) return std::nullopt;
        const double analytic = t->grad[i];
        const double denom = std::max({std::fabs(analytic), std::fabs(n_full), 1e-8});
        return std::fabs(analytic - n_full) / denom;
    };

    std::vector<GradCheckResult> results;
    Rng coord_rng = rng.split(77);
    for (const auto& [name, t] : model.params()) {
        double max_rel = 0.0;
        int accepted = 0;
        const int wanted = std::min<std::int64_t>(coords_per_tensor, t->numel());
        std::vector<std::int64_t> tried;
        for (int attempt = 0; accepted < wanted && attempt < 8 * coords_per_tensor &&
                              static_cast<std::int64_t>(tried.size()) < t->numel();
             ++attempt) {
            const std::int64_t c = coord_rng.uniform_int(0, t->numel() - 1);
            if (std::find(tried.begin(), tried.end(), c) != tried.end()) continue;
            tried.push_back(c);
            const auto err = check_coord(t, c);
            if (!err) continue;  // kink inside the window
            max_rel = std::max(max_rel, *err);
            ++accepted;
        }
        results.push_back({name, accepted > 0 ? max_rel : 0.0});
    }
    return results;
}

}  // namespace vige
