#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "vige/errors.hpp"

namespace vige {

// Grayscale image, row-major, one byte per pixel.
struct Frame {
    int h = 0;
    int w = 0;
    std::vector<std::uint8_t> pixels;

    std::uint8_t at(int r, int c) const { return pixels[static_cast<std::size_t>(r) * w + c]; }
    void set(int r, int c, std::uint8_t v) { pixels[static_cast<std::size_t>(r) * w + c] = v; }

    bool operator==(const Frame& other) const = default;
};

// Aligned silhouette size used throughout the pipeline.
inline constexpr int kFrameH = 64;
inline constexpr int kFrameW = 44;

// Binary PGM (P5, maxval 255).
Frame read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Frame& frame);

// 8-bit grayscale non-interlaced PNG.
Frame read_png(const std::filesystem::path& path);

// Dispatch on extension (.pgm / .png).
Frame read_image(const std::filesystem::path& path);

// Binarize (threshold 128), crop to the foreground's vertical extent, scale
// the height to 64 preserving aspect ratio, center on the silhouette's
// column centroid and pad/crop the width to 44. Idempotent on its own
// output. Returns nullopt for an all-background frame (caller drops it).
std::optional<Frame> preprocess_frame(const Frame& raw);

}  // namespace vige
