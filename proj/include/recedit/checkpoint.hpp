#pragma once

#include <string>

#include "recedit/tensor.hpp"

namespace recedit::nn {

// Binary checkpoint: magic + format version + a JSON metadata blob
// (architecture plus whatever the model needs to rebuild its vocabularies)
// followed by named little-endian float64 parameter blobs in sorted name
// order. save(load(f)) is byte-identical.
inline constexpr char kCheckpointMagic[8] = {'R', 'E', 'C', 'K', 'P', 'T', '0', '\n'};
inline constexpr uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const ParameterStore& params,
                     const std::string& metadata_json);

// Returns the metadata blob; fills `params` (config must be parsed by the
// caller from the metadata).
std::string load_checkpoint(const std::string& path, ParameterStore& params);

}  // namespace recedit::nn
