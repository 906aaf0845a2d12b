#include "stochdef/dataset.hpp"

#include "stochdef/rng.hpp"
#include "stochdef/tensor_io.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stochdef {

namespace {

constexpr double kBackground = 0.1;
constexpr double kForeground = 0.9;
constexpr double kPixelNoise = 0.05;
constexpr double kMaxJitter = 2.0;
constexpr int kSupersample = 4;

bool in_box(double u, double v, double half_u, double half_v) {
    return std::abs(u) <= half_u && std::abs(v) <= half_v;
}

// Glyph membership for a point relative to the glyph center.
bool glyph_contains(int label, double u, double v) {
    const double r = std::hypot(u, v);
    switch (label) {
    case 0: // disk
        return r <= 4.5;
    case 1: // ring
        return r >= 3.0 && r <= 5.5;
    case 2: // cross
        return in_box(u, v, 1.25, 5.5) || in_box(u, v, 5.5, 1.25);
    case 3: { // square outline
        const double m = std::max(std::abs(u), std::abs(v));
        return m >= 3.5 && m <= 5.5;
    }
    case 4: // horizontal bar
        return in_box(u, v, 6.0, 1.5);
    case 5: // vertical bar pair
        return in_box(u + 3.0, v, 1.25, 5.5) || in_box(u - 3.0, v, 1.25, 5.5);
    case 6: { // diagonal pair
        if (!in_box(u, v, 5.5, 5.5)) {
            return false;
        }
        const double d1 = std::abs(u - v - 3.0) / std::numbers::sqrt2;
        const double d2 = std::abs(u - v + 3.0) / std::numbers::sqrt2;
        return d1 <= 1.0 || d2 <= 1.0;
    }
    case 7: { // checker patch
        if (!in_box(u, v, 5.0, 5.0)) {
            return false;
        }
        const int cu = static_cast<int>(std::floor((u + 5.0) / 2.5));
        const int cv = static_cast<int>(std::floor((v + 5.0) / 2.5));
        return (cu + cv) % 2 == 0;
    }
    case 8: // L-corner
        return in_box(u + 3.5, v, 1.25, 5.5) || in_box(u, v - 4.0, 5.5, 1.25);
    case 9: // T-shape
        return in_box(u, v + 4.0, 5.5, 1.25) || in_box(u, v, 1.25, 5.5);
    default:
        throw std::invalid_argument("render_glyph: label must be in [0, 9]");
    }
}

Dataset generate_split(SeededRng rng, int per_class) {
    Dataset out;
    out.images.reserve(static_cast<std::size_t>(per_class) * kSyntheticClasses);
    for (int i = 0; i < per_class; ++i) {
        for (int label = 0; label < kSyntheticClasses; ++label) {
            const double dx = rng.uniform(-kMaxJitter, kMaxJitter);
            const double dy = rng.uniform(-kMaxJitter, kMaxJitter);
            ImageTensor img = render_glyph(label, dx, dy);
            for (double& v : img.values()) {
                v += kPixelNoise * rng.normal();
            }
            out.images.push_back(clamp01(std::move(img)));
            out.labels.push_back(label);
        }
    }
    return out;
}

} // namespace

void Dataset::validate() const {
    if (images.size() != labels.size()) {
        throw std::invalid_argument("Dataset: " + std::to_string(images.size()) + " images but " +
                                    std::to_string(labels.size()) + " labels");
    }
    for (const auto& img : images) {
        if (img.shape() != images.front().shape()) {
            throw std::invalid_argument("Dataset: mixed image shapes");
        }
    }
}

Dataset Dataset::head(std::size_t n) const {
    n = std::min(n, size());
    Dataset out;
    out.images.assign(images.begin(), images.begin() + static_cast<std::ptrdiff_t>(n));
    out.labels.assign(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n));
    return out;
}

ImageTensor render_glyph(int label, double dx, double dy) {
    ImageTensor img(Shape{kSyntheticSide, kSyntheticSide, 1});
    const double center = 0.5 * kSyntheticSide;
    for (int y = 0; y < kSyntheticSide; ++y) {
        for (int x = 0; x < kSyntheticSide; ++x) {
            int covered = 0;
            for (int sy = 0; sy < kSupersample; ++sy) {
                for (int sx = 0; sx < kSupersample; ++sx) {
                    const double u = x + (sx + 0.5) / kSupersample - center - dx;
                    const double v = y + (sy + 0.5) / kSupersample - center - dy;
                    covered += glyph_contains(label, u, v) ? 1 : 0;
                }
            }
            const double frac = static_cast<double>(covered) / (kSupersample * kSupersample);
            img.at(y, x, 0) = kBackground + (kForeground - kBackground) * frac;
        }
    }
    return img;
}

SyntheticSplits generate_synthetic_dataset(std::uint64_t seed, SplitSizes sizes) {
    if (sizes.train_per_class < 1 || sizes.val_per_class < 1 || sizes.test_per_class < 1) {
        throw std::invalid_argument("generate_synthetic_dataset: per-class counts must be at least 1");
    }
    const SeededRng root(seed, 0x5EED);
    return {generate_split(root.derive(1), sizes.train_per_class),
            generate_split(root.derive(2), sizes.val_per_class),
            generate_split(root.derive(3), sizes.test_per_class)};
}

void save_dataset(const std::filesystem::path& images, const std::filesystem::path& labels, const Dataset& data) {
    data.validate();
    save_tensors(images, data.images);
    save_labels(labels, data.labels);
}

Dataset load_dataset(const std::filesystem::path& images, const std::filesystem::path& labels) {
    Dataset d{load_tensors(images), load_labels(labels)};
    d.validate();
    return d;
}

} // namespace stochdef
