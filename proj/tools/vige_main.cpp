// Command-line entry point: dataset synthesis, training, retrieval
// evaluation, gradient auditing, and projection-matrix inspection.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

#include "vige/evaluator.hpp"
#include "vige/synth.hpp"
#include "vige/trainer.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

using namespace vige;

struct TrainFlags {
    std::string data_dir;
    std::string checkpoint_out = "model.ckpt";
    std::string log_out;
    std::string resume_from;
    std::vector<int> widths{8, 16, 32};
    int kernel = 3;
    double slope = 0.01;
    bool no_global = false;
    std::vector<int> scales{1, 2, 4};
    int out_dim = 64;
    int view_dim = 32;
    bool baseline = false;
    std::string placement = "after-separate-fc";
    bool shared = false;
    std::string init_scheme = "identity-perturbed";
    double init_eps = 0.01;
    std::uint64_t model_seed = 0;
    TrainConfig train;
    double lr_drop_factor = 0.0;
    std::int64_t lr_drop_at = 0;
    std::string selection = "predicted";
};

void add_train_flags(CLI::App& cmd, TrainFlags& f) {
    cmd.add_option("--data", f.data_dir, "dataset root directory")->required();
    cmd.add_option("--out", f.checkpoint_out, "checkpoint output path");
    cmd.add_option("--log", f.log_out, "metrics TSV output path");
    cmd.add_option("--resume", f.resume_from, "checkpoint to resume from");
    cmd.add_option("--widths", f.widths, "conv block widths")->delimiter(',');
    cmd.add_option("--kernel", f.kernel, "conv kernel size");
    cmd.add_option("--slope", f.slope, "leaky-relu slope");
    cmd.add_flag("--no-global", f.no_global, "disable the set-pooled global feature path");
    cmd.add_option("--scales", f.scales, "pyramid strip counts")->delimiter(',');
    cmd.add_option("--out-dim", f.out_dim, "per-strip feature dimension D");
    cmd.add_option("--view-dim", f.view_dim, "view feature dimension");
    cmd.add_flag("--baseline", f.baseline, "train without the view projection bank");
    cmd.add_option("--placement", f.placement,
                   "projection placement: replace-separate-fc | after-separate-fc");
    cmd.add_flag("--shared", f.shared, "share one projection matrix across strips per view");
    cmd.add_option("--init-scheme", f.init_scheme,
                   "projection init: identity-perturbed | xavier");
    cmd.add_option("--init-eps", f.init_eps, "identity perturbation scale");
    cmd.add_option("--model-seed", f.model_seed, "parameter initialization seed");
    cmd.add_option("--lr", f.train.lr, "learning rate");
    cmd.add_option("--lr-drop-factor", f.lr_drop_factor, "learning-rate drop factor");
    cmd.add_option("--lr-drop-at", f.lr_drop_at, "iteration at which the drop applies");
    cmd.add_option("--iterations", f.train.iterations, "training iterations");
    cmd.add_option("--batch-p", f.train.subjects_per_batch, "subjects per batch");
    cmd.add_option("--batch-k", f.train.seqs_per_subject, "sequences per subject");
    cmd.add_option("--frames-per-seq", f.train.frames_per_seq, "frames sampled per sequence");
    cmd.add_option("--lambda-ce", f.train.weights.lambda_ce, "CE loss weight");
    cmd.add_option("--lambda-trip", f.train.weights.lambda_trip, "triplet loss weight");
    cmd.add_option("--margin", f.train.weights.margin, "triplet margin");
    cmd.add_option("--seed", f.train.seed, "training/sampling seed");
    cmd.add_option("--selection-mode", f.selection,
                   "projection selection during training: predicted | ground-truth");
    cmd.set_config("--config", "", "key = value config file (flags override)");
    cmd.allow_config_extras(false);
}

int run_train(const TrainFlags& f) {
    LoadReport report;
    const auto index = load_dataset(f.data_dir, &report);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    if (index.num_views() < 2) {
        std::cerr << "error: dataset has " << index.num_views()
                  << " views; need at least 2\n";
        return kExitUsage;
    }
    const auto data = LoadedDataset::load(index);

    ModelConfig mc;
    mc.backbone.widths = f.widths;
    mc.backbone.kernel = f.kernel;
    mc.backbone.slope = f.slope;
    mc.backbone.emit_global = !f.no_global;
    mc.pyramid.scales = f.scales;
    mc.pyramid.out_dim = f.out_dim;
    mc.view_dim = f.view_dim;
    mc.num_views = index.num_views();
    mc.bank_enabled = !f.baseline;
    mc.placement = placement_from_string(f.placement);
    mc.shared_bank = f.shared;
    mc.init_scheme = init_scheme_from_string(f.init_scheme);
    mc.init_eps = f.init_eps;
    mc.seed = f.model_seed;

    TrainConfig tc = f.train;
    tc.selection = selection_mode_from_string(f.selection);
    if (f.lr_drop_factor > 0.0) tc.lr_drop = {f.lr_drop_factor, f.lr_drop_at};

    GaitModel model(mc);
    Trainer trainer(model, data, tc);
    if (!f.resume_from.empty()) trainer.restore(load_checkpoint(f.resume_from));

    std::ofstream log_file;
    std::ostream* log = nullptr;
    if (!f.log_out.empty()) {
        log_file.open(f.log_out, std::ios::trunc);
        if (!log_file) throw IoError("cannot write log " + f.log_out);
        log = &log_file;
    }
    const auto rows = trainer.run(log);
    save_checkpoint(f.checkpoint_out, trainer.make_checkpoint());
    if (!rows.empty()) {
        const auto& last = rows.back();
        std::printf("trained %lld iterations: ce=%.4f trip=%.4f joint=%.4f view_acc=%.3f\n",
                    static_cast<long long>(last.iteration), last.ce, last.trip, last.joint,
                    last.batch_view_acc);
    }
    std::printf("checkpoint written to %s\n", f.checkpoint_out.c_str());
    return 0;
}

// Rebuilds the model recorded in a checkpoint and loads its parameters.
GaitModel model_from_checkpoint(const Checkpoint& ckpt, ModelConfig* mc_out = nullptr,
                                TrainConfig* tc_out = nullptr) {
    ModelConfig mc;
    TrainConfig tc;
    decode_configs(ckpt.config_text, mc, tc);
    GaitModel model(mc);
    for (const auto& [name, t] : model.params()) {
        const auto& saved = ckpt.find("param/" + name);
        if (saved->shape != t->shape) {
            throw FormatError("checkpoint parameter " + name + " has shape " +
                              shape_str(saved->shape) + ", model expects " +
                              shape_str(t->shape));
        }
        t->data = saved->data;
    }
    if (mc_out) *mc_out = mc;
    if (tc_out) *tc_out = tc;
    return model;
}

int run_eval(const std::string& ckpt_path, const std::string& data_dir,
             const std::string& gallery, const std::vector<std::string>& probes,
             bool no_exclude, const std::string& out_prefix, int threads) {
    const auto ckpt = load_checkpoint(ckpt_path);
    const auto model = model_from_checkpoint(ckpt);

    LoadReport report;
    const auto index = load_dataset(data_dir, &report);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    const auto data = LoadedDataset::load(index);

    EvalProtocol protocol;
    protocol.gallery = parse_selector(gallery);
    for (const auto& p : probes) protocol.probes.push_back(parse_selector(p));
    protocol.exclude_identical_view = !no_exclude;

    const auto rep = evaluate(model, data, protocol, threads);
    std::cout << rep.to_table();
    if (!out_prefix.empty()) {
        std::ofstream tsv(out_prefix + ".tsv", std::ios::trunc);
        tsv << rep.to_tsv();
        std::ofstream txt(out_prefix + ".txt", std::ios::trunc);
        txt << rep.to_table();
        if (!tsv || !txt) throw IoError("cannot write report files with prefix " + out_prefix);
        std::printf("report written to %s.tsv and %s.txt\n", out_prefix.c_str(),
                    out_prefix.c_str());
    }
    return 0;
}

int run_gradcheck(const std::vector<int>& widths, const std::vector<int>& scales, int out_dim,
                  int view_dim, int num_views, int p, int k, int frames, double eps, int coords,
                  std::uint64_t seed, double tolerance) {
    ModelConfig mc;
    mc.backbone.widths = widths;
    mc.pyramid.scales = scales;
    mc.pyramid.out_dim = out_dim;
    mc.view_dim = view_dim;
    mc.num_views = num_views;
    mc.seed = seed;
    GaitModel model(mc);

    const auto results = full_model_gradcheck(model, LossWeights{}, p, k, frames, eps, coords,
                                              seed + 1);
    double worst = 0.0;
    for (const auto& r : results) {
        std::printf("%-28s max_rel_err %.3e %s\n", r.name.c_str(), r.max_rel_err,
                    r.max_rel_err < tolerance ? "ok" : "FAIL");
        worst = std::max(worst, r.max_rel_err);
    }
    std::printf("worst %.3e (tolerance %.1e)\n", worst, tolerance);
    return worst < tolerance ? 0 : 1;
}

int run_inspect(const std::string& ckpt_path, int strip, const std::vector<int>& views,
                const std::string& out_prefix) {
    const auto ckpt = load_checkpoint(ckpt_path);
    const auto model = model_from_checkpoint(ckpt);
    const auto* bank = model.bank();
    if (!bank) {
        std::cerr << "error: checkpoint holds a baseline model without a projection bank\n";
        return kExitUsage;
    }
    if (views.size() != 2) {
        std::cerr << "error: --views needs exactly two view indices\n";
        return kExitUsage;
    }
    if (strip < 0 || strip >= bank->num_strips() || views[0] < 0 ||
        views[0] >= bank->num_views() || views[1] < 0 || views[1] >= bank->num_views()) {
        std::cerr << "error: strip or view index out of range (strips " << bank->num_strips()
                  << ", views " << bank->num_views() << ")\n";
        return kExitUsage;
    }

    const auto& za = bank->matrix(views[0], strip);
    const auto& zb = bank->matrix(views[1], strip);
    const int d = bank->dim();

    auto write_csv = [&](const std::string& path, const std::vector<double>& vals) {
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw IoError("cannot write " + path);
        out.precision(17);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) out << (j ? "," : "") << vals[i * d + j];
            out << '\n';
        }
    };
    write_csv(out_prefix + "_view" + std::to_string(views[0]) + ".csv", za->data);
    write_csv(out_prefix + "_view" + std::to_string(views[1]) + ".csv", zb->data);

    std::vector<double> diff(za->data.size());
    double max_abs = 0.0, diff_fro = 0.0, a_fro = 0.0;
    for (std::size_t i = 0; i < diff.size(); ++i) {
        diff[i] = std::fabs(za->data[i] - zb->data[i]);
        max_abs = std::max(max_abs, diff[i]);
        diff_fro += diff[i] * diff[i];
        a_fro += za->data[i] * za->data[i];
    }
    diff_fro = std::sqrt(diff_fro);
    a_fro = std::sqrt(a_fro);
    write_csv(out_prefix + "_absdiff.csv", diff);

    Frame img;
    img.h = d;
    img.w = d;
    img.pixels.resize(diff.size());
    for (std::size_t i = 0; i < diff.size(); ++i) {
        img.pixels[i] = max_abs > 0.0
                            ? static_cast<std::uint8_t>(std::llround(255.0 * diff[i] / max_abs))
                            : 0;
    }
    write_pgm(out_prefix + "_absdiff.pgm", img);

    std::printf("strip %d views %d vs %d: ||Za-Zb||_F = %.6e, ||Za||_F = %.6e, relative = %.6e\n",
                strip, views[0], views[1], diff_fro, a_fro,
                a_fro > 0.0 ? diff_fro / a_fro : 0.0);
    std::printf("wrote %s_view%d.csv, %s_view%d.csv, %s_absdiff.csv, %s_absdiff.pgm\n",
                out_prefix.c_str(), views[0], out_prefix.c_str(), views[1], out_prefix.c_str(),
                out_prefix.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"view-embedded gait recognition engine"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic multi-view gait dataset");
    std::string synth_out;
    SynthConfig sc;
    int view_count = 8;
    std::vector<int> explicit_angles;
    synth->add_option("--out", synth_out, "output dataset root")->required();
    synth->add_option("--subjects", sc.subjects, "number of subjects");
    synth->add_option("--views", view_count, "number of evenly spaced views in [0,180)");
    synth->add_option("--angles", explicit_angles, "explicit view angles (deg)")->delimiter(',');
    synth->add_option("--seqs", sc.seqs_per_view, "sequences per view");
    synth->add_option("--frames", sc.frames, "frames per sequence");
    synth->add_option("--condition", sc.condition, "condition tag");
    synth->add_option("--seed", sc.seed, "generator seed");
    synth->add_option("--subject-prefix", sc.subject_prefix, "subject name prefix");
    synth->set_config("--config", "", "key = value config file (flags override)");
    synth->allow_config_extras(false);

    // train
    auto* train = app.add_subcommand("train", "train a model on a dataset");
    TrainFlags tf;
    add_train_flags(*train, tf);

    // eval
    auto* eval = app.add_subcommand("eval", "cross-view rank-1 evaluation");
    std::string eval_ckpt, eval_data, eval_gallery = "nm:0-1", eval_out;
    std::vector<std::string> eval_probes;
    bool no_exclude = false;
    int eval_threads = static_cast<int>(std::thread::hardware_concurrency());
    eval->add_option("--checkpoint", eval_ckpt, "trained checkpoint")->required();
    eval->add_option("--data", eval_data, "dataset root")->required();
    eval->add_option("--gallery", eval_gallery, "gallery selector, e.g. nm:0-1");
    eval->add_option("--probe", eval_probes, "probe selector(s), e.g. nm:2-3");
    eval->add_flag("--no-exclude-identical", no_exclude,
                   "keep identical-view gallery entries");
    eval->add_option("--out", eval_out, "report file prefix (.tsv/.txt)");
    eval->add_option("--threads", eval_threads, "embedding threads");
    eval->set_config("--config", "", "key = value config file (flags override)");
    eval->allow_config_extras(false);

    // gradcheck
    auto* gc = app.add_subcommand("gradcheck",
                                  "finite-difference audit of all parameter gradients");
    std::vector<int> gc_widths{2, 2};
    std::vector<int> gc_scales{1, 2};
    int gc_out_dim = 4, gc_view_dim = 4, gc_views = 3, gc_p = 2, gc_k = 2, gc_frames = 2;
    int gc_coords = 5;
    double gc_eps = 1e-5, gc_tol = 1e-4;
    std::uint64_t gc_seed = 7;
    gc->add_option("--widths", gc_widths, "conv block widths")->delimiter(',');
    gc->add_option("--scales", gc_scales, "pyramid scales")->delimiter(',');
    gc->add_option("--out-dim", gc_out_dim, "per-strip dimension D");
    gc->add_option("--view-dim", gc_view_dim, "view feature dimension");
    gc->add_option("--num-views", gc_views, "number of views M");
    gc->add_option("--batch-p", gc_p, "subjects in the audit batch");
    gc->add_option("--batch-k", gc_k, "sequences per subject");
    gc->add_option("--frames", gc_frames, "frames per sequence");
    gc->add_option("--eps", gc_eps, "finite-difference step");
    gc->add_option("--coords", gc_coords, "sampled coordinates per tensor");
    gc->add_option("--seed", gc_seed, "fixture seed");
    gc->add_option("--tolerance", gc_tol, "max relative error accepted");

    // inspect
    auto* inspect = app.add_subcommand("inspect",
                                       "dump projection matrices and their difference");
    std::string ins_ckpt, ins_out = "inspect";
    int ins_strip = 0;
    std::vector<int> ins_views{0, 1};
    inspect->add_option("--model", ins_ckpt, "trained checkpoint")->required();
    inspect->add_option("--strip", ins_strip, "strip index");
    inspect->add_option("--views", ins_views, "two view indices a,b")->delimiter(',');
    inspect->add_option("--out", ins_out, "output file prefix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (synth->parsed()) {
            sc.angles_deg = explicit_angles.empty() ? evenly_spaced_angles(view_count)
                                                    : explicit_angles;
            generate_dataset(synth_out, sc);
            const long long total =
                static_cast<long long>(sc.subjects) * sc.angles_deg.size() * sc.seqs_per_view;
            std::printf("generated %d subjects x %zu views x %d seqs = %lld sequences (%d frames"
                        " each) under %s\n",
                        sc.subjects, sc.angles_deg.size(), sc.seqs_per_view, total, sc.frames,
                        synth_out.c_str());
            return 0;
        }
        if (train->parsed()) return run_train(tf);
        if (eval->parsed()) {
            if (eval_probes.empty()) eval_probes.push_back("nm:2-3");
            return run_eval(eval_ckpt, eval_data, eval_gallery, eval_probes, no_exclude,
                            eval_out, eval_threads);
        }
        if (gc->parsed()) {
            return run_gradcheck(gc_widths, gc_scales, gc_out_dim, gc_view_dim, gc_views, gc_p,
                                 gc_k, gc_frames, gc_eps, gc_coords, gc_seed, gc_tol);
        }
        if (inspect->parsed()) return run_inspect(ins_ckpt, ins_strip, ins_views, ins_out);
    } catch (const vige::NumericError& e) {
        std::cerr << "numerical abort: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return 0;
}
