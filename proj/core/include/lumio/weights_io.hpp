#pragma once

#include <filesystem>

#include "lumio/vonet.hpp"

namespace lumio::vonet {

/// Weight file layout: a flat little-endian float64 array plus a sidecar
/// JSON manifest (at bin_path + ".json") listing tensor names, shapes, and
/// element offsets along with the model configuration.
void save_weights(const ModelWeights& w, const std::filesystem::path& bin_path);

ModelWeights load_weights(const std::filesystem::path& bin_path);

std::filesystem::path manifest_path_for(const std::filesystem::path& bin_path);

}  // namespace lumio::vonet
