#include "mimbfd/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "mimbfd/errors.hpp"

namespace mimbfd {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint container is defined little-endian");

constexpr char kMagic[4] = {'M', 'F', 'D', '1'};

template <typename T>
void write_raw(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in, const std::string& file) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw FormatError(file + ": truncated checkpoint");
    return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& file,
                     const std::vector<std::pair<std::string, Tensor*>>& params,
                     const std::string& config_json) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw FormatError("cannot write " + file.string());
    out.write(kMagic, 4);
    write_raw<std::uint64_t>(out, config_json.size());
    out.write(config_json.data(), static_cast<std::streamsize>(config_json.size()));
    write_raw<std::uint64_t>(out, params.size());
    for (const auto& [name, t] : params) {
        write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_raw<std::uint64_t>(out, static_cast<std::uint64_t>(t->rows));
        write_raw<std::uint64_t>(out, static_cast<std::uint64_t>(t->cols));
        out.write(reinterpret_cast<const char*>(t->v.data()),
                  static_cast<std::streamsize>(t->v.size() * sizeof(double)));
    }
    if (!out) throw FormatError("write failed for " + file.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw FormatError("cannot open " + file.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError(file.string() + ": not a MFD1 checkpoint");
    Checkpoint ckpt;
    const auto cfg_len = read_raw<std::uint64_t>(in, file.string());
    ckpt.config_json.resize(cfg_len);
    in.read(ckpt.config_json.data(), static_cast<std::streamsize>(cfg_len));
    const auto count = read_raw<std::uint64_t>(in, file.string());
    for (std::uint64_t k = 0; k < count; ++k) {
        const auto name_len = read_raw<std::uint32_t>(in, file.string());
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        const auto rows = read_raw<std::uint64_t>(in, file.string());
        const auto cols = read_raw<std::uint64_t>(in, file.string());
        Tensor t(static_cast<std::int64_t>(rows), static_cast<std::int64_t>(cols));
        in.read(reinterpret_cast<char*>(t.v.data()),
                static_cast<std::streamsize>(t.v.size() * sizeof(double)));
        if (!in) throw FormatError(file.string() + ": truncated parameter block '" + name + "'");
        ckpt.tensors.emplace(std::move(name), std::move(t));
    }
    return ckpt;
}

void restore_params(const Checkpoint& ckpt,
                    const std::vector<std::pair<std::string, Tensor*>>& params) {
    if (ckpt.tensors.size() != params.size())
        throw FormatError("checkpoint holds " + std::to_string(ckpt.tensors.size()) +
                          " tensors, model expects " + std::to_string(params.size()));
    for (const auto& [name, slot] : params) {
        const auto it = ckpt.tensors.find(name);
        if (it == ckpt.tensors.end())
            throw FormatError("checkpoint missing parameter '" + name + "'");
        if (!it->second.same_shape(*slot))
            throw FormatError("checkpoint parameter '" + name + "' has shape " +
                              shape_str(it->second) + ", model expects " + shape_str(*slot));
        *slot = it->second;
    }
}

}  // namespace mimbfd
