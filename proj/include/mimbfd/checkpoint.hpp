#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mimbfd/tensor.hpp"

namespace mimbfd {

// Binary container: magic "MFD1", then a config JSON blob and shape-prefixed
// named parameter blocks of little-endian 64-bit floats.
struct Checkpoint {
    std::string config_json;
    std::map<std::string, Tensor> tensors;
};

void save_checkpoint(const std::filesystem::path& file,
                     const std::vector<std::pair<std::string, Tensor*>>& params,
                     const std::string& config_json);

Checkpoint load_checkpoint(const std::filesystem::path& file);

// Copies checkpoint tensors into the named parameter slots; every name must
// match in both directions and shapes must agree.
void restore_params(const Checkpoint& ckpt,
                    const std::vector<std::pair<std::string, Tensor*>>& params);

}  // namespace mimbfd
