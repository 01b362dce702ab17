#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vige/image.hpp"
#include "vige/rng.hpp"

namespace vige {

struct SynthConfig {
    int subjects = 10;
    std::vector<int> angles_deg;  // discrete camera azimuths
    int seqs_per_view = 4;
    int frames = 24;
    std::string condition = "nm";
    std::uint64_t seed = 0;
    int render_h = 96;  // raw frame size; alignment rescales to 64x44 downstream
    int render_w = 72;
    std::string subject_prefix;  // distinguishes roots generated for splits
};

// `count` azimuths evenly spaced over [0, 180).
std::vector<int> evenly_spaced_angles(int count);

// Renders a parametric 2D articulated walker per subject (limb lengths,
// torso width, gait frequency and phase drawn from seeded distributions) as
// filled silhouettes, projects each frame per view angle by horizontal shear
// plus width scaling, and writes the dataset directory layout along with
// manifest.tsv. Deterministic per seed.
void generate_dataset(const std::filesystem::path& root, const SynthConfig& cfg);

// One rendered raw frame (exposed for the generator's own tests).
Frame render_walker_frame(const SynthConfig& cfg, int subject, int seq, int frame,
                          int angle_deg);

}  // namespace vige
