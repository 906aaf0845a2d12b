#pragma once

#include "stochdef/image_ops.hpp"
#include "stochdef/rng.hpp"
#include "stochdef/tensor.hpp"

#include <optional>
#include <string>
#include <vector>

namespace stochdef {

struct ClassifierParams;

enum class TransformKind {
    identity,
    gaussian_noise,
    random_rotation,
    noise_injection,
    quantize,
    fft_perturb,
    gaussian_blur,
    median_blur,
    swirl,
    random_crop,
    rescale_pad,
    bart_composite,
};

/// How attack gradients pass through a transform.
enum class BackwardRule { differentiable, bpda_identity };

enum class NoiseKind { gaussian, salt_pepper, speckle };

std::string to_string(TransformKind kind);
TransformKind transform_kind_from_string(const std::string& name);
std::string to_string(NoiseKind kind);

struct RealRange {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double v) const { return v >= lo && v <= hi; }
};

struct IntRange {
    int lo = 0;
    int hi = 0;
    bool contains(int v) const { return v >= lo && v <= hi; }
};

/// A stochastic pre-processor t_theta together with its randomization space.
/// Only the fields relevant to `kind` are read. Defaults are the desk-scale
/// ranges for 16x16 inputs.
struct PreprocessorSpec {
    TransformKind kind = TransformKind::identity;

    double noise_sigma = 0.25;                   // gaussian_noise
    RealRange rotation_degrees{-90.0, 90.0};     // random_rotation
    RealRange injection_gaussian_std{0.01, 0.1}; // noise_injection
    RealRange injection_salt_pepper{0.01, 0.05};
    RealRange injection_speckle_std{0.01, 0.1};
    IntRange quantize_bins{8, 200};              // quantize
    RealRange fft_fraction{0.0, 0.95};           // fft_perturb
    IntRange blur_kernel{3, 7};                  // gaussian_blur, odd sizes only
    RealRange blur_sigma{0.1, 3.1};
    IntRange median_kernel{3, 7};                // median_blur, odd sizes only
    RealRange swirl_strength{0.1, 2.0};          // swirl
    RealRange swirl_radius{2.0, 12.0};
    int crop_size = 10;                          // random_crop
    IntRange rescale_size{12, 20};               // rescale_pad
    int pad_size = 22;
    int bart_kappa = 1;                          // bart_composite, 1..6

    static PreprocessorSpec identity();
    static PreprocessorSpec gaussian(double sigma);
    static PreprocessorSpec rotation(double max_degrees = 90.0);
    static PreprocessorSpec bart(int kappa);
    static PreprocessorSpec of(TransformKind kind);

    BackwardRule backward_rule() const;
    /// Throws std::invalid_argument when a range is empty or malformed.
    void validate() const;
    Shape output_shape(Shape input) const;
    /// Short parameter label used in reports, e.g. "sigma=0.25" or "kappa=3".
    std::string param_label() const;
};

/// The first kappa transforms of this list make up bart_composite.
const std::vector<TransformKind>& bart_transform_order();

/// One draw theta from the randomization space. Only the fields for the
/// drawn kind are populated.
struct ThetaDraw {
    TransformKind kind = TransformKind::identity;

    std::vector<double> noise;           // per-pixel field (gaussian_noise, noise_injection)
    NoiseKind noise_kind = NoiseKind::gaussian;
    double noise_param = 0.0;            // std or salt-and-pepper amount
    double degrees = 0.0;                // random_rotation
    int bins = 0;                        // quantize
    double fraction = 0.0;               // fft_perturb
    std::vector<unsigned char> keep;     // fft_perturb: 1 keeps a coefficient
    int kernel_size = 0;                 // gaussian_blur, median_blur
    double kernel_sigma = 0.0;
    double swirl_strength = 0.0;         // swirl
    double swirl_radius = 0.0;
    double swirl_cx = 0.0;
    double swirl_cy = 0.0;
    int offset_y = 0;                    // random_crop, rescale_pad
    int offset_x = 0;
    int rescale = 0;                     // rescale_pad
    std::vector<ThetaDraw> stages;       // bart_composite, in application order
};

/// Draws theta for an input of the given shape. Ranges are sampled uniformly.
ThetaDraw sample(const PreprocessorSpec& spec, Shape input, SeededRng& rng);

/// Applies t_theta. Output is clamped to [0, 1]; its shape is
/// spec.output_shape(img.shape()).
ImageTensor apply(const PreprocessorSpec& spec, const ThetaDraw& draw, const ImageTensor& img);

/// Vector-Jacobian product of `apply` at (draw, img). bpda_identity kinds
/// return the upstream gradient (un-cropped with zeros for random_crop).
/// For differentiable kinds the final [0, 1] clamp is part of the product:
/// pixels whose unclamped value falls outside [0, 1] get zero gradient.
ImageTensor backward(const PreprocessorSpec& spec, const ThetaDraw& draw, const ImageTensor& img,
                     const ImageTensor& upstream);

/// Logits of f(t_theta(img)) with a fresh draw from `rng`.
std::vector<double> defended_forward(const PreprocessorSpec& spec, const ClassifierParams& params,
                                     const ImageTensor& img, SeededRng& rng);

} // namespace stochdef
