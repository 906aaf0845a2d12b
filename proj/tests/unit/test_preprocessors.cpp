#include "stochdef/preprocessors.hpp"
#include "stochdef/rng.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

using namespace stochdef;

namespace {

const Shape kShape{16, 16, 1};

ImageTensor random_image(std::uint64_t seed, Shape s = kShape) {
    SeededRng r(seed, 1);
    ImageTensor t(s);
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = r.uniform(0.05, 0.95);
    }
    return t;
}

ImageTensor random_unit(std::uint64_t seed, Shape s) {
    SeededRng r(seed, 2);
    ImageTensor t(s);
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = r.normal();
    }
    return (1.0 / l2_norm(t)) * t;
}

std::vector<TransformKind> all_kinds() {
    return {TransformKind::identity,      TransformKind::gaussian_noise, TransformKind::random_rotation,
            TransformKind::noise_injection, TransformKind::quantize,     TransformKind::fft_perturb,
            TransformKind::gaussian_blur, TransformKind::median_blur,    TransformKind::swirl,
            TransformKind::random_crop,   TransformKind::rescale_pad,    TransformKind::bart_composite};
}

// Worst relative error between <backward(u), d> and the central difference
// of <u, apply(.)> along d, over `probes` random (draw, x, u, d).
double worst_backward_error(const PreprocessorSpec& spec, int probes, std::uint64_t seed) {
    double worst = 0.0;
    for (int p = 0; p < probes; ++p) {
        SeededRng rng(seed, static_cast<std::uint64_t>(p));
        const ImageTensor x = random_image(seed * 1000 + p);
        const ThetaDraw draw = sample(spec, kShape, rng);
        const ImageTensor u = random_unit(seed * 1000 + p, spec.output_shape(kShape));
        const ImageTensor d = random_unit(seed * 2000 + p, kShape);
        const double analytic = dot(backward(spec, draw, x, u), d);
        const double fd = oracle::directional_fd([&](const ImageTensor& z) { return dot(u, apply(spec, draw, z)); },
                                                 x, d, 1e-6);
        worst = std::max(worst, oracle::relative_error(analytic, fd, 1e-6));
    }
    return worst;
}

} // namespace

TEST(Preprocessors, NamesRoundTrip) {
    for (TransformKind k : all_kinds()) {
        EXPECT_EQ(transform_kind_from_string(to_string(k)), k);
    }
    EXPECT_THROW(transform_kind_from_string("jpeg"), std::invalid_argument);
}

TEST(Preprocessors, BackwardRules) {
    const std::set<TransformKind> bpda{TransformKind::median_blur, TransformKind::swirl, TransformKind::quantize,
                                       TransformKind::random_crop};
    for (TransformKind k : all_kinds()) {
        EXPECT_EQ(PreprocessorSpec::of(k).backward_rule() == BackwardRule::bpda_identity, bpda.count(k) == 1)
            << to_string(k);
    }
}

TEST(Preprocessors, OutputsStayInUnitRangeWithDeclaredShape) {
    for (TransformKind k : all_kinds()) {
        PreprocessorSpec spec = PreprocessorSpec::of(k);
        if (k == TransformKind::bart_composite) {
            spec.bart_kappa = 6;
        }
        for (int i = 0; i < 20; ++i) {
            SeededRng rng(5, static_cast<std::uint64_t>(i));
            const ImageTensor x = random_image(i);
            const ImageTensor y = apply(spec, sample(spec, kShape, rng), x);
            EXPECT_EQ(y.shape(), spec.output_shape(kShape)) << to_string(k);
            EXPECT_TRUE(within_unit_range(y)) << to_string(k);
        }
    }
    EXPECT_EQ(PreprocessorSpec::of(TransformKind::random_crop).output_shape(kShape), (Shape{10, 10, 1}));
    EXPECT_EQ(PreprocessorSpec::of(TransformKind::rescale_pad).output_shape(kShape), (Shape{22, 22, 1}));
}

TEST(Preprocessors, SamplingIsDeterministicPerStream) {
    for (TransformKind k : all_kinds()) {
        const PreprocessorSpec spec = PreprocessorSpec::of(k);
        SeededRng a(9, 4);
        SeededRng b(9, 4);
        const ImageTensor x = random_image(3);
        EXPECT_EQ(apply(spec, sample(spec, kShape, a), x), apply(spec, sample(spec, kShape, b), x)) << to_string(k);
    }
}

TEST(Preprocessors, IdentityIsExact) {
    const ImageTensor x = random_image(1);
    SeededRng rng(1, 1);
    const auto spec = PreprocessorSpec::identity();
    EXPECT_EQ(apply(spec, sample(spec, kShape, rng), x), x);
}

TEST(Preprocessors, DrawsRespectRanges) {
    SeededRng rng(2, 0);
    const auto rot = PreprocessorSpec::rotation(30.0);
    const auto q = PreprocessorSpec::of(TransformKind::quantize);
    const auto blur = PreprocessorSpec::of(TransformKind::gaussian_blur);
    const auto crop = PreprocessorSpec::of(TransformKind::random_crop);
    const auto rp = PreprocessorSpec::of(TransformKind::rescale_pad);
    for (int i = 0; i < 500; ++i) {
        const double deg = sample(rot, kShape, rng).degrees;
        EXPECT_GE(deg, -30.0);
        EXPECT_LE(deg, 30.0);
        const int bins = sample(q, kShape, rng).bins;
        EXPECT_TRUE(q.quantize_bins.contains(bins));
        const ThetaDraw b = sample(blur, kShape, rng);
        EXPECT_EQ(b.kernel_size % 2, 1);
        EXPECT_TRUE(blur.blur_kernel.contains(b.kernel_size));
        const ThetaDraw c = sample(crop, kShape, rng);
        EXPECT_GE(c.offset_y, 0);
        EXPECT_LE(c.offset_y, 6);
        const ThetaDraw r = sample(rp, kShape, rng);
        EXPECT_TRUE(rp.rescale_size.contains(r.rescale));
        EXPECT_LE(r.offset_x + r.rescale, rp.pad_size);
    }
}

TEST(Preprocessors, BartUsesAPermutationOfTheFirstKappaTransforms) {
    for (int kappa = 1; kappa <= 6; ++kappa) {
        const auto spec = PreprocessorSpec::bart(kappa);
        SeededRng rng(3, static_cast<std::uint64_t>(kappa));
        for (int i = 0; i < 10; ++i) {
            const ThetaDraw d = sample(spec, kShape, rng);
            ASSERT_EQ(d.stages.size(), static_cast<std::size_t>(kappa));
            std::multiset<TransformKind> got;
            for (const auto& s : d.stages) {
                got.insert(s.kind);
            }
            const auto& order = bart_transform_order();
            EXPECT_EQ(got, std::multiset<TransformKind>(order.begin(), order.begin() + kappa));
        }
    }
    EXPECT_THROW(PreprocessorSpec::bart(0).validate(), std::invalid_argument);
    EXPECT_THROW(PreprocessorSpec::bart(7).validate(), std::invalid_argument);
}

TEST(Preprocessors, QuantizeRoundsToNearestLevel) {
    const auto spec = PreprocessorSpec::of(TransformKind::quantize);
    ThetaDraw d;
    d.kind = TransformKind::quantize;
    d.bins = 4;
    ImageTensor x({1, 5, 1}, std::vector<double>{0.0, 0.1, 0.125, 0.3, 1.0});
    const ImageTensor y = apply(spec, d, x);
    EXPECT_DOUBLE_EQ(y[0], 0.0);
    EXPECT_DOUBLE_EQ(y[1], 0.0);
    EXPECT_DOUBLE_EQ(y[2], 0.0);  // tie goes to the lower level
    EXPECT_DOUBLE_EQ(y[3], 0.25);
    EXPECT_DOUBLE_EQ(y[4], 1.0);
}

TEST(Preprocessors, FftWithFullMaskIsIdentity) {
    const auto spec = PreprocessorSpec::of(TransformKind::fft_perturb);
    SeededRng rng(4, 0);
    ThetaDraw d = sample(spec, kShape, rng);
    std::fill(d.keep.begin(), d.keep.end(), 1);
    const ImageTensor x = random_image(8);
    EXPECT_LE(max_abs_diff(apply(spec, d, x), x), 1e-12);
}

TEST(Preprocessors, GaussianNoiseAddsTheDrawnField) {
    const auto spec = PreprocessorSpec::gaussian(0.05);
    SeededRng rng(6, 0);
    const ThetaDraw d = sample(spec, kShape, rng);
    const ImageTensor x = random_image(9);
    const ImageTensor y = apply(spec, d, x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_DOUBLE_EQ(y[i], std::clamp(x[i] + d.noise[i], 0.0, 1.0));
    }
}

TEST(Preprocessors, DifferentiableBackwardsMatchFiniteDifferences) {
    std::vector<PreprocessorSpec> specs{PreprocessorSpec::identity(),
                                        PreprocessorSpec::gaussian(0.25),
                                        PreprocessorSpec::rotation(90.0),
                                        PreprocessorSpec::of(TransformKind::noise_injection),
                                        PreprocessorSpec::of(TransformKind::fft_perturb),
                                        PreprocessorSpec::of(TransformKind::gaussian_blur),
                                        PreprocessorSpec::of(TransformKind::rescale_pad),
                                        PreprocessorSpec::bart(2)};
    std::uint64_t seed = 1;
    for (const auto& spec : specs) {
        ASSERT_EQ(spec.backward_rule(), BackwardRule::differentiable);
        EXPECT_LT(worst_backward_error(spec, 24, seed++), 1e-3) << to_string(spec.kind);
    }
}

TEST(Preprocessors, ClampedPixelsGetNoGradient) {
    const auto spec = PreprocessorSpec::gaussian(0.0);
    ThetaDraw d;
    d.kind = TransformKind::gaussian_noise;
    d.noise = {0.5, 0.5, -0.5, 0.0};
    ImageTensor x({1, 4, 1}, std::vector<double>{0.7, 0.2, 0.3, 0.4});
    const ImageTensor g = backward(spec, d, x, ImageTensor({1, 4, 1}, 1.0));
    EXPECT_EQ(g[0], 0.0);
    EXPECT_EQ(g[1], 1.0);
    EXPECT_EQ(g[2], 0.0);
    EXPECT_EQ(g[3], 1.0);
}

TEST(Preprocessors, BpdaKindsPassTheGradientThrough) {
    for (TransformKind k : {TransformKind::median_blur, TransformKind::swirl, TransformKind::quantize}) {
        const auto spec = PreprocessorSpec::of(k);
        SeededRng rng(7, 0);
        const ImageTensor x = random_image(10);
        const ImageTensor u = random_unit(11, kShape);
        EXPECT_EQ(backward(spec, sample(spec, kShape, rng), x, u), u) << to_string(k);
    }
    const auto crop = PreprocessorSpec::of(TransformKind::random_crop);
    SeededRng rng(8, 0);
    const ThetaDraw d = sample(crop, kShape, rng);
    const ImageTensor u = random_unit(12, crop.output_shape(kShape));
    const ImageTensor g = backward(crop, d, random_image(13), u);
    ASSERT_EQ(g.shape(), kShape);
    double total = 0.0;
    for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
            const bool inside = y >= d.offset_y && y < d.offset_y + 10 && x >= d.offset_x && x < d.offset_x + 10;
            if (inside) {
                EXPECT_EQ(g.at(y, x, 0), u.at(y - d.offset_y, x - d.offset_x, 0));
            } else {
                EXPECT_EQ(g.at(y, x, 0), 0.0);
            }
            total += g.at(y, x, 0);
        }
    }
    double expected = 0.0;
    for (double v : u.values()) {
        expected += v;
    }
    EXPECT_NEAR(total, expected, 1e-12);
}

TEST(Preprocessors, ValidationRejectsMalformedRanges) {
    auto s = PreprocessorSpec::of(TransformKind::gaussian_blur);
    s.blur_kernel = {4, 4};
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s = PreprocessorSpec::rotation(90.0);
    s.rotation_degrees = {10.0, -10.0};
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s = PreprocessorSpec::gaussian(-1.0);
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s = PreprocessorSpec::of(TransformKind::random_crop);
    s.crop_size = 0;
    EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Preprocessors, ParamLabels) {
    EXPECT_EQ(PreprocessorSpec::gaussian(0.25).param_label(), "sigma=0.25");
    EXPECT_EQ(PreprocessorSpec::bart(3).param_label(), "kappa=3");
}
