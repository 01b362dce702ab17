#include "vige/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace vige {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct WalkerParams {
    double height_scale;  // person height as a fraction of the canvas
    double thigh_len, shin_len;
    double torso_radius, torso_top, hip_y;
    double head_radius, head_y;
    double upper_arm, forearm, arm_radius;
    double thigh_radius, shin_radius;
    double stride_amp;    // hip swing amplitude, radians
    double knee_flex;
    double arm_amp;
    double period_frames;
    double bob_amp;
};

WalkerParams subject_params(Rng rng) {
    WalkerParams p;
    p.height_scale = rng.uniform(0.82, 0.92);
    p.thigh_len = rng.uniform(0.24, 0.28);
    p.shin_len = rng.uniform(0.22, 0.26);
    p.torso_radius = rng.uniform(0.075, 0.105);
    p.hip_y = 0.50;
    p.torso_top = rng.uniform(0.76, 0.80);
    p.head_radius = rng.uniform(0.075, 0.10);
    p.head_y = p.torso_top + p.head_radius * rng.uniform(1.0, 1.2);
    p.upper_arm = rng.uniform(0.16, 0.20);
    p.forearm = rng.uniform(0.14, 0.18);
    p.arm_radius = rng.uniform(0.028, 0.038);
    p.thigh_radius = rng.uniform(0.040, 0.055);
    p.shin_radius = rng.uniform(0.030, 0.042);
    p.stride_amp = rng.uniform(0.45, 0.70);
    p.knee_flex = rng.uniform(0.25, 0.55);
    p.arm_amp = rng.uniform(0.4, 0.8);
    p.period_frames = rng.uniform(16.0, 26.0);
    p.bob_amp = rng.uniform(0.008, 0.02);
    return p;
}

struct Capsule {
    double x1, y1, x2, y2, r;
};

void leg_segments(const WalkerParams& p, double phase, std::vector<Capsule>& out) {
    const double thigh_angle = p.stride_amp * std::sin(phase);
    const double flex = p.knee_flex * (0.5 - 0.5 * std::cos(phase));
    const double shin_angle = thigh_angle - flex;

    const double knee_x = p.thigh_len * std::sin(thigh_angle);
    const double knee_y = p.hip_y - p.thigh_len * std::cos(thigh_angle);
    const double foot_x = knee_x + p.shin_len * std::sin(shin_angle);
    const double foot_y = knee_y - p.shin_len * std::cos(shin_angle);
    out.push_back({0.0, p.hip_y, knee_x, knee_y, p.thigh_radius});
    out.push_back({knee_x, knee_y, foot_x, foot_y, p.shin_radius});
}

void arm_segments(const WalkerParams& p, double phase, std::vector<Capsule>& out) {
    const double swing = -p.arm_amp * p.stride_amp * std::sin(phase);
    const double elbow_bend = 0.35;
    const double sx = 0.0, sy = p.torso_top;
    const double ex = sx + p.upper_arm * std::sin(swing);
    const double ey = sy - p.upper_arm * std::cos(swing);
    const double hx = ex + p.forearm * std::sin(swing + elbow_bend);
    const double hy = ey - p.forearm * std::cos(swing + elbow_bend);
    out.push_back({sx, sy, ex, ey, p.arm_radius});
    out.push_back({ex, ey, hx, hy, p.arm_radius * 0.9});
}

// Profile-plane body at gait phase `phase`, in person units (y up, feet ~0).
std::vector<Capsule> body_at(const WalkerParams& p, double phase) {
    std::vector<Capsule> caps;
    const double bob = p.bob_amp * std::sin(2.0 * phase);
    leg_segments(p, phase, caps);
    leg_segments(p, phase + kPi, caps);
    arm_segments(p, phase + kPi, caps);
    arm_segments(p, phase, caps);
    caps.push_back({0.0, p.hip_y, 0.0, p.torso_top, p.torso_radius});
    caps.push_back({0.0, p.head_y, 0.0, p.head_y, p.head_radius});
    for (auto& c : caps) {
        c.y1 += bob;
        c.y2 += bob;
    }
    return caps;
}

double dist_sq_to_segment(double px, double py, const Capsule& c) {
    const double vx = c.x2 - c.x1, vy = c.y2 - c.y1;
    const double wx = px - c.x1, wy = py - c.y1;
    const double vv = vx * vx + vy * vy;
    double t = vv > 0.0 ? (wx * vx + wy * vy) / vv : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = px - (c.x1 + t * vx), dy = py - (c.y1 + t * vy);
    return dx * dx + dy * dy;
}

// Azimuth projection: the sagittal (walking-direction) axis forshortens with
// sin(angle) down to a frontal floor, and a cos-signed shear tilts the figure
// so that mirrored azimuths (a, 180-a) stay distinguishable.
struct ViewTransform {
    double width_scale;
    double shear;
    double hip_y;
};

ViewTransform view_transform(const WalkerParams& p, int angle_deg) {
    constexpr double kFrontalFloor = 0.40;
    constexpr double kShearMax = 0.12;
    const double rad = angle_deg * kPi / 180.0;
    return {kFrontalFloor + (1.0 - kFrontalFloor) * std::fabs(std::sin(rad)),
            kShearMax * std::cos(rad), p.hip_y};
}

}  // namespace

std::vector<int> evenly_spaced_angles(int count) {
    if (count < 1) throw ValueError("angle count must be >= 1");
    std::vector<int> out;
    for (int i = 0; i < count; ++i) {
        out.push_back(static_cast<int>(std::llround(i * 180.0 / count)));
    }
    return out;
}

Frame render_walker_frame(const SynthConfig& cfg, int subject, int seq, int frame,
                          int angle_deg) {
    // Pure function of (seed, subject, seq, frame, angle): per-subject body
    // parameters and a per-sequence phase/gait jitter shared by all views, so
    // one walk is observed from every camera.
    const Rng master(cfg.seed);
    const Rng subject_stream = master.split(1000 + static_cast<std::uint64_t>(subject));
    WalkerParams p = subject_params(subject_stream.split(1));

    Rng seq_stream = subject_stream.split(2000 + static_cast<std::uint64_t>(seq));
    const double phase0 = seq_stream.uniform(0.0, 2.0 * kPi);
    p.stride_amp *= seq_stream.uniform(0.95, 1.05);
    p.period_frames *= seq_stream.uniform(0.95, 1.05);

    const double phase = phase0 + 2.0 * kPi * frame / p.period_frames;
    auto caps = body_at(p, phase);
    const auto vt = view_transform(p, angle_deg);
    for (auto& c : caps) {
        c.x1 = c.x1 * vt.width_scale + vt.shear * (c.y1 - vt.hip_y);
        c.x2 = c.x2 * vt.width_scale + vt.shear * (c.y2 - vt.hip_y);
    }

    Frame out;
    out.h = cfg.render_h;
    out.w = cfg.render_w;
    out.pixels.assign(static_cast<std::size_t>(out.h) * out.w, 0);
    const double px_per_unit = p.height_scale * cfg.render_h / (p.head_y + p.head_radius);
    const double feet_row = 0.96 * cfg.render_h;
    const double center_col = 0.5 * cfg.render_w;
    for (const auto& c : caps) {
        // Pixel bounding box of the capsule.
        const double x_lo = std::min(c.x1, c.x2) - c.r, x_hi = std::max(c.x1, c.x2) + c.r;
        const double y_lo = std::min(c.y1, c.y2) - c.r, y_hi = std::max(c.y1, c.y2) + c.r;
        const int c_lo = std::max(0, static_cast<int>(std::floor(center_col + x_lo * px_per_unit)));
        const int c_hi = std::min(out.w - 1,
                                  static_cast<int>(std::ceil(center_col + x_hi * px_per_unit)));
        const int r_lo = std::max(0, static_cast<int>(std::floor(feet_row - y_hi * px_per_unit)));
        const int r_hi = std::min(out.h - 1,
                                  static_cast<int>(std::ceil(feet_row - y_lo * px_per_unit)));
        const double rr = c.r * c.r;
        for (int r = r_lo; r <= r_hi; ++r) {
            const double py = (feet_row - (r + 0.5)) / px_per_unit;
            for (int col = c_lo; col <= c_hi; ++col) {
                const double px = (col + 0.5 - center_col) / px_per_unit;
                if (dist_sq_to_segment(px, py, c) <= rr) out.set(r, col, 255);
            }
        }
    }
    return out;
}

void generate_dataset(const std::filesystem::path& root, const SynthConfig& cfg) {
    if (cfg.subjects < 1 || cfg.seqs_per_view < 1 || cfg.frames < 1) {
        throw ValueError("generator: subjects, seqs and frames must all be >= 1");
    }
    if (cfg.angles_deg.empty()) throw ValueError("generator: at least one view angle required");
    if (cfg.render_h < 16 || cfg.render_w < 16) {
        throw ValueError("generator: render canvas too small");
    }

    namespace fs = std::filesystem;
    fs::create_directories(root);
    std::ofstream manifest(root / "manifest.tsv", std::ios::trunc);
    if (!manifest) throw IoError("cannot write manifest under " + root.string());
    manifest << "subject\tcondition\tangle\tseq\tframe_count\n";

    char buf[32];
    for (int s = 0; s < cfg.subjects; ++s) {
        std::snprintf(buf, sizeof(buf), "%s%03d", cfg.subject_prefix.c_str(), s);
        const std::string subject_name = buf;
        for (const int angle : cfg.angles_deg) {
            std::snprintf(buf, sizeof(buf), "%03d", angle);
            const std::string angle_name = buf;
            for (int q = 0; q < cfg.seqs_per_view; ++q) {
                std::snprintf(buf, sizeof(buf), "%02d", q);
                const fs::path seq_dir = root / subject_name / cfg.condition / angle_name / buf;
                fs::create_directories(seq_dir);
                for (int t = 0; t < cfg.frames; ++t) {
                    std::snprintf(buf, sizeof(buf), "%04d.pgm", t);
                    write_pgm(seq_dir / buf, render_walker_frame(cfg, s, q, t, angle));
                }
                manifest << subject_name << '\t' << cfg.condition << '\t' << angle << '\t' << q
                         << '\t' << cfg.frames << '\n';
            }
        }
    }
    if (!manifest) throw IoError("manifest write failed under " + root.string());
}

}  // namespace vige
