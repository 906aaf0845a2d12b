#include "stochdef/preprocessors.hpp"

#include "stochdef/classifier.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace stochdef {

namespace {

constexpr std::array<std::pair<TransformKind, const char*>, 12> kKindNames{{
    {TransformKind::identity, "identity"},
    {TransformKind::gaussian_noise, "gaussian_noise"},
    {TransformKind::random_rotation, "random_rotation"},
    {TransformKind::noise_injection, "noise_injection"},
    {TransformKind::quantize, "quantize"},
    {TransformKind::fft_perturb, "fft_perturb"},
    {TransformKind::gaussian_blur, "gaussian_blur"},
    {TransformKind::median_blur, "median_blur"},
    {TransformKind::swirl, "swirl"},
    {TransformKind::random_crop, "random_crop"},
    {TransformKind::rescale_pad, "rescale_pad"},
    {TransformKind::bart_composite, "bart_composite"},
}};

void check_range(const RealRange& r, const char* name) {
    if (!(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
        throw std::invalid_argument(std::string("PreprocessorSpec: empty range for ") + name);
    }
}

void check_range(const IntRange& r, const char* name) {
    if (r.lo > r.hi) {
        throw std::invalid_argument(std::string("PreprocessorSpec: empty range for ") + name);
    }
}

void check_odd_range(const IntRange& r, const char* name) {
    check_range(r, name);
    if (r.lo < 1) {
        throw std::invalid_argument(std::string("PreprocessorSpec: ") + name + " must be positive");
    }
    const int first_odd = r.lo % 2 == 1 ? r.lo : r.lo + 1;
    if (first_odd > r.hi) {
        throw std::invalid_argument(std::string("PreprocessorSpec: ") + name + " contains no odd size");
    }
}

int sample_odd(const IntRange& r, SeededRng& rng) {
    const int first_odd = r.lo % 2 == 1 ? r.lo : r.lo + 1;
    const int count = (r.hi - first_odd) / 2;
    return first_odd + 2 * rng.uniform_int(0, count);
}

PreprocessorSpec stage_spec(const PreprocessorSpec& spec, TransformKind kind) {
    PreprocessorSpec s = spec;
    s.kind = kind;
    return s;
}

// Resize into an r x r block, then place it at (offset_y, offset_x) on a
// zero canvas of pad x pad. One warp covers both steps.
WarpField rescale_pad_field(Shape input, const ThetaDraw& d, int pad) {
    const WarpField inner = resize_field(input, d.rescale, d.rescale);
    WarpField f{input, pad, pad, {}, {}};
    const std::size_t n = static_cast<std::size_t>(pad) * pad;
    constexpr double kOutside = -1e9;
    f.src_x.assign(n, kOutside);
    f.src_y.assign(n, kOutside);
    for (int y = 0; y < d.rescale; ++y) {
        for (int x = 0; x < d.rescale; ++x) {
            const std::size_t src = static_cast<std::size_t>(y) * d.rescale + x;
            const std::size_t dst = static_cast<std::size_t>(y + d.offset_y) * pad + (x + d.offset_x);
            f.src_x[dst] = inner.src_x[src];
            f.src_y[dst] = inner.src_y[src];
        }
    }
    return f;
}

WarpField swirl_draw_field(Shape shape, const ThetaDraw& d) {
    return swirl_field(shape, d.swirl_cx, d.swirl_cy, d.swirl_strength, d.swirl_radius);
}

void require_kind(const PreprocessorSpec& spec, const ThetaDraw& draw) {
    if (spec.kind != draw.kind) {
        throw std::invalid_argument("preprocessor: draw of kind " + to_string(draw.kind) +
                                    " does not match spec kind " + to_string(spec.kind));
    }
}

void require_field(const ThetaDraw& draw, std::size_t expected, const char* what) {
    if (draw.noise.size() != expected) {
        throw std::invalid_argument(std::string(what) + ": noise field size does not match image");
    }
}

ImageTensor fft_backward(const ThetaDraw& draw, const ImageTensor& upstream) {
    // apply is y = Re(A x) with A = F^-1 M F, so the transpose is
    // Re(A^T g) = Re(F M F^-1 g) for real g.
    ComplexGrid spectrum{upstream.shape(), std::vector<std::complex<double>>(upstream.size())};
    for (std::size_t i = 0; i < upstream.size(); ++i) {
        spectrum.data[i] = upstream[i];
    }
    ComplexGrid inv = idft2_complex(spectrum);
    for (std::size_t i = 0; i < inv.data.size(); ++i) {
        if (!draw.keep[i]) {
            inv.data[i] = 0.0;
        }
    }
    const ComplexGrid fwd = dft2(inv);
    ImageTensor grad(upstream.shape());
    for (std::size_t i = 0; i < grad.size(); ++i) {
        grad[i] = fwd.data[i].real();
    }
    return grad;
}

} // namespace

std::string to_string(TransformKind kind) {
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) {
            return name;
        }
    }
    return "unknown";
}

TransformKind transform_kind_from_string(const std::string& name) {
    for (const auto& [k, n] : kKindNames) {
        if (name == n) {
            return k;
        }
    }
    throw std::invalid_argument("unknown preprocessor kind '" + name + "'");
}

std::string to_string(NoiseKind kind) {
    switch (kind) {
    case NoiseKind::gaussian:
        return "gaussian";
    case NoiseKind::salt_pepper:
        return "salt_pepper";
    case NoiseKind::speckle:
        return "speckle";
    }
    return "unknown";
}

PreprocessorSpec PreprocessorSpec::identity() {
    return of(TransformKind::identity);
}

PreprocessorSpec PreprocessorSpec::gaussian(double sigma) {
    PreprocessorSpec s = of(TransformKind::gaussian_noise);
    s.noise_sigma = sigma;
    return s;
}

PreprocessorSpec PreprocessorSpec::rotation(double max_degrees) {
    PreprocessorSpec s = of(TransformKind::random_rotation);
    s.rotation_degrees = {-max_degrees, max_degrees};
    return s;
}

PreprocessorSpec PreprocessorSpec::bart(int kappa) {
    PreprocessorSpec s = of(TransformKind::bart_composite);
    s.bart_kappa = kappa;
    return s;
}

PreprocessorSpec PreprocessorSpec::of(TransformKind kind) {
    PreprocessorSpec s;
    s.kind = kind;
    return s;
}

BackwardRule PreprocessorSpec::backward_rule() const {
    switch (kind) {
    case TransformKind::median_blur:
    case TransformKind::swirl:
    case TransformKind::quantize:
    case TransformKind::random_crop:
        return BackwardRule::bpda_identity;
    default:
        return BackwardRule::differentiable;
    }
}

void PreprocessorSpec::validate() const {
    switch (kind) {
    case TransformKind::identity:
        break;
    case TransformKind::gaussian_noise:
        if (!(noise_sigma >= 0.0)) {
            throw std::invalid_argument("PreprocessorSpec: noise_sigma must be non-negative");
        }
        break;
    case TransformKind::random_rotation:
        check_range(rotation_degrees, "rotation_degrees");
        if (rotation_degrees.lo < -180.0 || rotation_degrees.hi > 180.0) {
            throw std::invalid_argument("PreprocessorSpec: rotation_degrees must lie in [-180, 180]");
        }
        break;
    case TransformKind::noise_injection:
        check_range(injection_gaussian_std, "injection_gaussian_std");
        check_range(injection_salt_pepper, "injection_salt_pepper");
        check_range(injection_speckle_std, "injection_speckle_std");
        break;
    case TransformKind::quantize:
        check_range(quantize_bins, "quantize_bins");
        if (quantize_bins.lo < 1) {
            throw std::invalid_argument("PreprocessorSpec: quantize_bins must be at least 1");
        }
        break;
    case TransformKind::fft_perturb:
        check_range(fft_fraction, "fft_fraction");
        if (fft_fraction.lo < 0.0 || fft_fraction.hi > 1.0) {
            throw std::invalid_argument("PreprocessorSpec: fft_fraction must lie in [0, 1]");
        }
        break;
    case TransformKind::gaussian_blur:
        check_odd_range(blur_kernel, "blur_kernel");
        check_range(blur_sigma, "blur_sigma");
        if (!(blur_sigma.lo > 0.0)) {
            throw std::invalid_argument("PreprocessorSpec: blur_sigma must be positive");
        }
        break;
    case TransformKind::median_blur:
        check_odd_range(median_kernel, "median_kernel");
        break;
    case TransformKind::swirl:
        check_range(swirl_strength, "swirl_strength");
        check_range(swirl_radius, "swirl_radius");
        if (!(swirl_radius.lo > 0.0)) {
            throw std::invalid_argument("PreprocessorSpec: swirl_radius must be positive");
        }
        break;
    case TransformKind::random_crop:
        if (crop_size < 1) {
            throw std::invalid_argument("PreprocessorSpec: crop_size must be positive");
        }
        break;
    case TransformKind::rescale_pad:
        check_range(rescale_size, "rescale_size");
        if (rescale_size.lo < 1 || rescale_size.hi > pad_size) {
            throw std::invalid_argument("PreprocessorSpec: rescale_size must lie in [1, pad_size]");
        }
        break;
    case TransformKind::bart_composite: {
        const int max_kappa = static_cast<int>(bart_transform_order().size());
        if (bart_kappa < 1 || bart_kappa > max_kappa) {
            throw std::invalid_argument("PreprocessorSpec: bart_kappa must lie in [1, " +
                                        std::to_string(max_kappa) + "]");
        }
        for (int i = 0; i < bart_kappa; ++i) {
            stage_spec(*this, bart_transform_order()[static_cast<std::size_t>(i)]).validate();
        }
        break;
    }
    }
}

Shape PreprocessorSpec::output_shape(Shape input) const {
    switch (kind) {
    case TransformKind::random_crop:
        return {crop_size, crop_size, input.channels};
    case TransformKind::rescale_pad:
        return {pad_size, pad_size, input.channels};
    default:
        return input;
    }
}

std::string PreprocessorSpec::param_label() const {
    std::ostringstream os;
    switch (kind) {
    case TransformKind::gaussian_noise:
        os << "sigma=" << noise_sigma;
        break;
    case TransformKind::random_rotation:
        os << "degrees=" << rotation_degrees.lo << ":" << rotation_degrees.hi;
        break;
    case TransformKind::bart_composite:
        os << "kappa=" << bart_kappa;
        break;
    default:
        os << "default";
        break;
    }
    return os.str();
}

const std::vector<TransformKind>& bart_transform_order() {
    static const std::vector<TransformKind> order{
        TransformKind::noise_injection, TransformKind::gaussian_blur, TransformKind::median_blur,
        TransformKind::swirl,           TransformKind::quantize,      TransformKind::fft_perturb,
    };
    return order;
}

ThetaDraw sample(const PreprocessorSpec& spec, Shape input, SeededRng& rng) {
    ThetaDraw d;
    d.kind = spec.kind;
    switch (spec.kind) {
    case TransformKind::identity:
        break;
    case TransformKind::gaussian_noise:
        d.noise.resize(input.size());
        for (double& v : d.noise) {
            v = spec.noise_sigma * rng.normal();
        }
        break;
    case TransformKind::random_rotation:
        d.degrees = rng.uniform(spec.rotation_degrees.lo, spec.rotation_degrees.hi);
        break;
    case TransformKind::noise_injection: {
        d.noise_kind = static_cast<NoiseKind>(rng.uniform_int(0, 2));
        d.noise.resize(input.size());
        if (d.noise_kind == NoiseKind::salt_pepper) {
            d.noise_param = rng.uniform(spec.injection_salt_pepper.lo, spec.injection_salt_pepper.hi);
            // -1 forces a pixel to 0, +1 forces it to 1, 0 leaves it.
            for (double& v : d.noise) {
                const double u = rng.uniform();
                v = u < 0.5 * d.noise_param ? -1.0 : (u < d.noise_param ? 1.0 : 0.0);
            }
        } else {
            const RealRange& r = d.noise_kind == NoiseKind::gaussian ? spec.injection_gaussian_std
                                                                     : spec.injection_speckle_std;
            d.noise_param = rng.uniform(r.lo, r.hi);
            for (double& v : d.noise) {
                v = d.noise_param * rng.normal();
            }
        }
        break;
    }
    case TransformKind::quantize:
        d.bins = rng.uniform_int(spec.quantize_bins.lo, spec.quantize_bins.hi);
        break;
    case TransformKind::fft_perturb: {
        d.fraction = rng.uniform(spec.fft_fraction.lo, spec.fft_fraction.hi);
        d.keep.resize(input.size());
        for (auto& k : d.keep) {
            k = rng.bernoulli(d.fraction) ? 0 : 1;
        }
        for (int c = 0; c < input.channels; ++c) {
            d.keep[static_cast<std::size_t>(c)] = 1; // DC of every channel
        }
        break;
    }
    case TransformKind::gaussian_blur:
        d.kernel_size = sample_odd(spec.blur_kernel, rng);
        d.kernel_sigma = rng.uniform(spec.blur_sigma.lo, spec.blur_sigma.hi);
        break;
    case TransformKind::median_blur:
        d.kernel_size = sample_odd(spec.median_kernel, rng);
        break;
    case TransformKind::swirl:
        d.swirl_strength = rng.uniform(spec.swirl_strength.lo, spec.swirl_strength.hi);
        d.swirl_radius = rng.uniform(spec.swirl_radius.lo, spec.swirl_radius.hi);
        d.swirl_cx = rng.uniform(0.0, input.width - 1.0);
        d.swirl_cy = rng.uniform(0.0, input.height - 1.0);
        break;
    case TransformKind::random_crop:
        if (spec.crop_size > input.height || spec.crop_size > input.width) {
            throw std::invalid_argument("random_crop: crop larger than input " + input.str());
        }
        d.offset_y = rng.uniform_int(0, input.height - spec.crop_size);
        d.offset_x = rng.uniform_int(0, input.width - spec.crop_size);
        break;
    case TransformKind::rescale_pad:
        d.rescale = rng.uniform_int(spec.rescale_size.lo, spec.rescale_size.hi);
        d.offset_y = rng.uniform_int(0, spec.pad_size - d.rescale);
        d.offset_x = rng.uniform_int(0, spec.pad_size - d.rescale);
        break;
    case TransformKind::bart_composite: {
        std::vector<TransformKind> kinds(bart_transform_order().begin(),
                                         bart_transform_order().begin() + spec.bart_kappa);
        for (int i = static_cast<int>(kinds.size()) - 1; i > 0; --i) {
            std::swap(kinds[static_cast<std::size_t>(i)], kinds[static_cast<std::size_t>(rng.uniform_int(0, i))]);
        }
        for (TransformKind k : kinds) {
            d.stages.push_back(sample(stage_spec(spec, k), input, rng));
        }
        break;
    }
    }
    return d;
}

namespace {

// Output of the transform before the final clamp to [0, 1].
ImageTensor apply_unclamped(const PreprocessorSpec& spec, const ThetaDraw& draw, const ImageTensor& img) {
    require_kind(spec, draw);
    switch (spec.kind) {
    case TransformKind::identity:
        return img;
    case TransformKind::gaussian_noise: {
        require_field(draw, img.size(), "gaussian_noise");
        ImageTensor out = img;
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] += draw.noise[i];
        }
        return out;
    }
    case TransformKind::random_rotation:
        return warp(img, rotation_field(img.shape(), draw.degrees), Interpolation::bilinear);
    case TransformKind::noise_injection: {
        require_field(draw, img.size(), "noise_injection");
        ImageTensor out = img;
        for (std::size_t i = 0; i < out.size(); ++i) {
            switch (draw.noise_kind) {
            case NoiseKind::gaussian:
                out[i] += draw.noise[i];
                break;
            case NoiseKind::speckle:
                out[i] += out[i] * draw.noise[i];
                break;
            case NoiseKind::salt_pepper:
                if (draw.noise[i] < 0.0) {
                    out[i] = 0.0;
                } else if (draw.noise[i] > 0.0) {
                    out[i] = 1.0;
                }
                break;
            }
        }
        return out;
    }
    case TransformKind::quantize: {
        if (draw.bins < 1) {
            throw std::invalid_argument("quantize: bin count must be at least 1");
        }
        ImageTensor out = clamp01(img);
        const double b = draw.bins;
        for (double& v : out.values()) {
            // Nearest level; exact ties go to the lower level.
            v = std::ceil(v * b - 0.5) / b;
        }
        return out;
    }
    case TransformKind::fft_perturb: {
        if (draw.keep.size() != img.size()) {
            throw std::invalid_argument("fft_perturb: mask size does not match image");
        }
        ComplexGrid spectrum = dft2(img);
        for (std::size_t i = 0; i < spectrum.data.size(); ++i) {
            if (!draw.keep[i]) {
                spectrum.data[i] = 0.0;
            }
        }
        return idft2(spectrum);
    }
    case TransformKind::gaussian_blur:
        return convolve2(img, gaussian_kernel(draw.kernel_size, draw.kernel_sigma));
    case TransformKind::median_blur:
        return median_filter(img, draw.kernel_size);
    case TransformKind::swirl:
        return warp(img, swirl_draw_field(img.shape(), draw), Interpolation::bilinear);
    case TransformKind::random_crop: {
        const Shape out_shape = spec.output_shape(img.shape());
        if (draw.offset_y + out_shape.height > img.height() || draw.offset_x + out_shape.width > img.width()) {
            throw std::invalid_argument("random_crop: crop window exceeds input");
        }
        ImageTensor out(out_shape);
        for (int y = 0; y < out_shape.height; ++y) {
            for (int x = 0; x < out_shape.width; ++x) {
                for (int c = 0; c < out_shape.channels; ++c) {
                    out.at(y, x, c) = img.at(y + draw.offset_y, x + draw.offset_x, c);
                }
            }
        }
        return out;
    }
    case TransformKind::rescale_pad:
        return warp(img, rescale_pad_field(img.shape(), draw, spec.pad_size), Interpolation::bilinear);
    case TransformKind::bart_composite: {
        ImageTensor out = img;
        for (const ThetaDraw& stage : draw.stages) {
            out = apply(stage_spec(spec, stage.kind), stage, out);
        }
        return out;
    }
    }
    throw std::logic_error("apply: unhandled preprocessor kind");
}

} // namespace

ImageTensor apply(const PreprocessorSpec& spec, const ThetaDraw& draw, const ImageTensor& img) {
    return clamp01(apply_unclamped(spec, draw, img));
}

ImageTensor backward(const PreprocessorSpec& spec, const ThetaDraw& draw, const ImageTensor& img,
                     const ImageTensor& upstream) {
    require_kind(spec, draw);
    const Shape out_shape = spec.output_shape(img.shape());
    if (upstream.shape() != out_shape) {
        throw std::invalid_argument("backward: upstream shape " + upstream.shape().str() +
                                    " does not match output shape " + out_shape.str());
    }
    if (spec.backward_rule() == BackwardRule::bpda_identity && spec.kind != TransformKind::random_crop) {
        return upstream;
    }
    if (spec.kind == TransformKind::bart_composite) {
        // Replay the stages to recover each stage's input.
        std::vector<ImageTensor> inputs{img};
        for (std::size_t i = 0; i + 1 < draw.stages.size(); ++i) {
            inputs.push_back(apply(stage_spec(spec, draw.stages[i].kind), draw.stages[i], inputs.back()));
        }
        ImageTensor grad = upstream;
        for (std::size_t i = draw.stages.size(); i-- > 0;) {
            grad = backward(stage_spec(spec, draw.stages[i].kind), draw.stages[i], inputs[i], grad);
        }
        return grad;
    }
    // The final clamp passes gradient only where its input lies in [0, 1].
    ImageTensor g = upstream;
    const ImageTensor raw = apply_unclamped(spec, draw, img);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (raw[i] < 0.0 || raw[i] > 1.0) {
            g[i] = 0.0;
        }
    }
    switch (spec.kind) {
    case TransformKind::identity:
    case TransformKind::gaussian_noise:
    case TransformKind::quantize:
    case TransformKind::median_blur:
    case TransformKind::swirl:
        return g;
    case TransformKind::random_rotation:
        return rotate_backward(g, draw.degrees, Interpolation::bilinear);
    case TransformKind::noise_injection: {
        ImageTensor grad = g;
        if (draw.noise_kind == NoiseKind::speckle) {
            for (std::size_t i = 0; i < grad.size(); ++i) {
                grad[i] *= 1.0 + draw.noise[i];
            }
        } else if (draw.noise_kind == NoiseKind::salt_pepper) {
            for (std::size_t i = 0; i < grad.size(); ++i) {
                if (draw.noise[i] != 0.0) {
                    grad[i] = 0.0;
                }
            }
        }
        return grad;
    }
    case TransformKind::fft_perturb:
        return fft_backward(draw, g);
    case TransformKind::gaussian_blur:
        return convolve2_adjoint(g, gaussian_kernel(draw.kernel_size, draw.kernel_sigma));
    case TransformKind::random_crop: {
        ImageTensor grad(img.shape());
        for (int y = 0; y < out_shape.height; ++y) {
            for (int x = 0; x < out_shape.width; ++x) {
                for (int c = 0; c < out_shape.channels; ++c) {
                    grad.at(y + draw.offset_y, x + draw.offset_x, c) = g.at(y, x, c);
                }
            }
        }
        return grad;
    }
    case TransformKind::rescale_pad:
        return warp_adjoint(g, rescale_pad_field(img.shape(), draw, spec.pad_size), Interpolation::bilinear);
    case TransformKind::bart_composite:
        break;
    }
    throw std::logic_error("backward: unhandled preprocessor kind");
}

std::vector<double> defended_forward(const PreprocessorSpec& spec, const ClassifierParams& params,
                                     const ImageTensor& img, SeededRng& rng) {
    const ThetaDraw draw = sample(spec, img.shape(), rng);
    return forward(params, apply(spec, draw, img));
}

} // namespace stochdef
