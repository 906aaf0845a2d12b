#pragma once

#include "stochdef/classifier.hpp"

#include <filesystem>

namespace stochdef {

// A checkpoint is a directory holding manifest.json plus one raw tensor file
// per parameter tensor. Each tensor is stored as a single rows x cols x 1
// record; the manifest lists its role, file, and shape.
void save_checkpoint(const std::filesystem::path& dir, const ClassifierParams& params);
ClassifierParams load_checkpoint(const std::filesystem::path& dir);

} // namespace stochdef
