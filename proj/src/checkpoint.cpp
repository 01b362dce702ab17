#include "vige/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>

namespace vige {

namespace {

constexpr char kMagic[4] = {'V', 'I', 'G', 'E'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    put_u64(out, bits);
}

struct Reader {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos = 0;
    std::string origin;

    void need(std::size_t n) const {
        if (pos + n > size) throw FormatError(origin + ": truncated checkpoint");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(data[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(data[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }
    std::string str(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(data + pos), n);
        pos += n;
        return s;
    }
};

}  // namespace

std::uint32_t crc32_bytes(const std::uint8_t* data, std::size_t len) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    std::uint32_t crc = 0xffffffffu;
    for (std::size_t i = 0; i < len; ++i) crc = table[(crc ^ data[i]) & 0xffu] ^ (crc >> 8);
    return crc ^ 0xffffffffu;
}

const TensorPtr& Checkpoint::find(const std::string& name) const {
    for (const auto& [n, t] : tensors) {
        if (n == name) return t;
    }
    throw FormatError("checkpoint has no record named '" + name + "'");
}

bool Checkpoint::contains(const std::string& name) const {
    for (const auto& [n, t] : tensors) {
        if (n == name) return true;
    }
    return false;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    std::vector<std::uint8_t> bytes;
    bytes.insert(bytes.end(), kMagic, kMagic + 4);
    put_u32(bytes, Checkpoint::kVersion);
    put_u32(bytes, static_cast<std::uint32_t>(ckpt.config_text.size()));
    bytes.insert(bytes.end(), ckpt.config_text.begin(), ckpt.config_text.end());
    for (const auto& [name, t] : ckpt.tensors) {
        put_u32(bytes, static_cast<std::uint32_t>(name.size()));
        bytes.insert(bytes.end(), name.begin(), name.end());
        put_u32(bytes, static_cast<std::uint32_t>(t->shape.size()));
        for (const auto d : t->shape) put_u64(bytes, static_cast<std::uint64_t>(d));
        for (const double v : t->data) put_f64(bytes, v);
    }
    put_u32(bytes, crc32_bytes(bytes.data(), bytes.size()));

    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write checkpoint " + path.string());
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("checkpoint write failed for " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (bytes.size() < 12) throw FormatError(path.string() + ": truncated checkpoint");

    Reader r{bytes.data(), bytes.size() - 4, 0, path.string()};
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw FormatError(path.string() + ": bad checkpoint magic");
    }
    const std::uint32_t stored_crc = [&] {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(bytes[bytes.size() - 4 + i]) << (8 * i);
        return v;
    }();
    if (crc32_bytes(bytes.data(), bytes.size() - 4) != stored_crc) {
        throw FormatError(path.string() + ": checkpoint CRC mismatch");
    }

    r.pos = 4;
    const std::uint32_t version = r.u32();
    if (version != Checkpoint::kVersion) {
        throw FormatError(path.string() + ": unsupported checkpoint version " +
                          std::to_string(version));
    }
    Checkpoint ckpt;
    ckpt.config_text = r.str(r.u32());
    while (r.pos < r.size) {
        const auto name = r.str(r.u32());
        const std::uint32_t rank = r.u32();
        Shape shape;
        std::int64_t numel = 1;
        for (std::uint32_t i = 0; i < rank; ++i) {
            shape.push_back(static_cast<std::int64_t>(r.u64()));
            numel *= shape.back();
        }
        std::vector<double> values(static_cast<std::size_t>(numel));
        for (auto& v : values) v = r.f64();
        ckpt.tensors.emplace_back(name, tensor(std::move(shape), std::move(values)));
    }
    return ckpt;
}

}  // namespace vige
