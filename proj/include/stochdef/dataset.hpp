#pragma once

#include "stochdef/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace stochdef {

struct Dataset {
    std::vector<ImageTensor> images;
    std::vector<int> labels;

    std::size_t size() const { return images.size(); }
    bool empty() const { return images.empty(); }
    /// Throws if lengths disagree or image shapes differ.
    void validate() const;
    Dataset head(std::size_t n) const;
};

struct SplitSizes {
    int train_per_class = 200;
    int val_per_class = 20;
    int test_per_class = 20;
};

struct SyntheticSplits {
    Dataset train;
    Dataset val;
    Dataset test;
};

inline constexpr int kSyntheticClasses = 10;
inline constexpr int kSyntheticSide = 16;

/// Ten classes of 16x16x1 glyphs (disk, ring, cross, square outline,
/// horizontal bar, vertical bar pair, diagonal pair, checker patch, L-corner,
/// T-shape), each jittered by up to +/-2 px (sub-pixel, anti-aliased) and
/// perturbed by N(0, 0.05^2) pixel noise, clamped to [0, 1]. Each split is
/// drawn from its own stream; examples are interleaved by class.
SyntheticSplits generate_synthetic_dataset(std::uint64_t seed, SplitSizes sizes);

/// Renders one glyph of class `label` with its top-left offset by (dx, dy).
ImageTensor render_glyph(int label, double dx, double dy);

void save_dataset(const std::filesystem::path& images, const std::filesystem::path& labels, const Dataset& data);
Dataset load_dataset(const std::filesystem::path& images, const std::filesystem::path& labels);

} // namespace stochdef
