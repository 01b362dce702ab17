#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "vige/tensor.hpp"

namespace vige {

// Binary snapshot: magic "VIGE", u32 little-endian version, length-prefixed
// UTF-8 config text, then one record per tensor (u32 name length, name bytes,
// u32 rank, u64 dims, f64 little-endian payload), closed by a CRC32 of all
// prior bytes. Writes are atomic (temp file + rename), loads are bit-exact.
struct Checkpoint {
    static constexpr std::uint32_t kVersion = 1;

    std::string config_text;
    std::vector<std::pair<std::string, TensorPtr>> tensors;

    const TensorPtr& find(const std::string& name) const;
    bool contains(const std::string& name) const;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::uint32_t crc32_bytes(const std::uint8_t* data, std::size_t len);

}  // namespace vige
