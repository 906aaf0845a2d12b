#include "stochdef/image_ops.hpp"
#include "stochdef/rng.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace stochdef;

namespace {

ImageTensor random_image(Shape s, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
    SeededRng r(seed, 0);
    ImageTensor t(s);
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = r.uniform(lo, hi);
    }
    return t;
}

std::vector<std::complex<double>> channel(const ImageTensor& img, int c) {
    std::vector<std::complex<double>> out;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            out.emplace_back(img.at(y, x, c), 0.0);
        }
    }
    return out;
}

} // namespace

TEST(Dft, MatchesNaiveTransform) {
    const ImageTensor img = random_image({6, 5, 2}, 1);
    const ComplexGrid g = dft2(img);
    for (int c = 0; c < 2; ++c) {
        const auto ref = oracle::naive_dft2(channel(img, c), 6, 5, false);
        for (int y = 0; y < 6; ++y) {
            for (int x = 0; x < 5; ++x) {
                EXPECT_NEAR(std::abs(g.at(y, x, c) - ref[static_cast<std::size_t>(y * 5 + x)]), 0.0, 1e-10);
            }
        }
    }
}

TEST(Dft, InverseRoundTrip) {
    const ImageTensor img = random_image({16, 16, 1}, 2);
    EXPECT_LE(max_abs_diff(idft2(dft2(img)), img), 1e-12);
    const ComplexGrid g = dft2(img);
    const ComplexGrid back = dft2(idft2_complex(g));
    for (std::size_t i = 0; i < g.data.size(); ++i) {
        EXPECT_NEAR(std::abs(back.data[i] - g.data[i]), 0.0, 1e-10);
    }
}

TEST(Convolution, MatchesNaiveReflectCorrelation) {
    const ImageTensor img = random_image({9, 7, 2}, 3);
    for (int size : {3, 5, 7}) {
        const Kernel2D k = gaussian_kernel(size, 0.3 + size * 0.2);
        const ImageTensor ref = oracle::naive_correlate(img, k.weights, k.rows, k.cols);
        EXPECT_LE(max_abs_diff(convolve2(img, k), ref), 1e-12) << size;
    }
    Kernel2D asym{3, 3, {0.1, 0.2, 0.3, 0.0, -0.4, 0.5, 0.6, 0.7, -0.8}};
    EXPECT_LE(max_abs_diff(convolve2(img, asym), oracle::naive_correlate(img, asym.weights, 3, 3)), 1e-12);
}

TEST(Convolution, AdjointIdentity) {
    const ImageTensor x = random_image({8, 8, 1}, 4);
    const ImageTensor y = random_image({8, 8, 1}, 5, -1.0, 1.0);
    Kernel2D asym{5, 5, {}};
    SeededRng r(6, 0);
    for (int i = 0; i < 25; ++i) {
        asym.weights.push_back(r.uniform(-1, 1));
    }
    EXPECT_NEAR(dot(convolve2(x, asym), y), dot(x, convolve2_adjoint(y, asym)), 1e-10);
}

TEST(Convolution, GaussianKernelIsNormalized) {
    const Kernel2D k = gaussian_kernel(5, 1.2);
    double s = 0.0;
    for (double w : k.weights) {
        s += w;
        EXPECT_GT(w, 0.0);
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
    EXPECT_NEAR(k.at(0, 1), k.at(1, 0), 1e-15);
    EXPECT_THROW(gaussian_kernel(4, 1.0), std::invalid_argument);
}

TEST(ReflectIndex, MirrorsWithoutRepeatingEdge) {
    EXPECT_EQ(reflect_index(-1, 5), 1);
    EXPECT_EQ(reflect_index(-2, 5), 2);
    EXPECT_EQ(reflect_index(5, 5), 3);
    EXPECT_EQ(reflect_index(6, 5), 2);
    EXPECT_EQ(reflect_index(3, 5), 3);
    for (int i = -20; i < 25; ++i) {
        EXPECT_EQ(reflect_index(i, 5), oracle::mirror(i, 5));
    }
}

TEST(Median, MatchesSortedWindow) {
    const ImageTensor img = random_image({10, 9, 1}, 7);
    for (int size : {3, 5, 7}) {
        EXPECT_EQ(median_filter(img, size), oracle::naive_median(img, size)) << size;
    }
}

TEST(Rotation, ZeroDegreesIsIdentity) {
    const ImageTensor img = random_image({16, 16, 1}, 8);
    EXPECT_LE(max_abs_diff(rotate(img, 0.0), img), 1e-12);
}

TEST(Rotation, MatchesScalarReference) {
    const ImageTensor img = random_image({12, 15, 2}, 9);
    for (double deg : {-90.0, -33.0, 17.5, 45.0, 180.0}) {
        const ImageTensor ref = clamp01(oracle::naive_rotate(img, deg));
        EXPECT_LE(max_abs_diff(rotate(img, deg), ref), 1e-12) << deg;
    }
}

TEST(Rotation, QuarterTurnPermutesPixels) {
    ImageTensor img({4, 4, 1});
    img.at(0, 3, 0) = 1.0;
    const ImageTensor r = rotate(img, 90.0);
    double total = 0.0;
    for (double v : r.values()) {
        total += v;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Rotation, RejectsOutOfRangeAngles) {
    const ImageTensor img({4, 4, 1});
    EXPECT_THROW(rotate(img, 181.0), std::invalid_argument);
    EXPECT_THROW(rotate(img, -200.0), std::invalid_argument);
}

TEST(Warp, AdjointIdentityForEveryField) {
    const Shape s{11, 9, 1};
    const ImageTensor x = random_image(s, 10);
    const std::vector<WarpField> fields{rotation_field(s, 37.0), swirl_field(s, 4.0, 5.0, 1.5, 6.0),
                                        resize_field(s, 14, 6)};
    for (const auto& f : fields) {
        const ImageTensor y = random_image(f.output_shape(), 11, -1.0, 1.0);
        for (auto interp : {Interpolation::bilinear, Interpolation::nearest}) {
            EXPECT_NEAR(dot(warp(x, f, interp), y), dot(x, warp_adjoint(y, f, interp)), 1e-10);
        }
    }
}

TEST(Warp, ResizeToSameSizeIsIdentity) {
    const ImageTensor img = random_image({7, 5, 1}, 12);
    EXPECT_LE(max_abs_diff(warp(img, resize_field(img.shape(), 7, 5), Interpolation::bilinear), img), 1e-12);
}

TEST(Warp, ZeroStrengthSwirlIsIdentity) {
    const ImageTensor img = random_image({8, 8, 1}, 13);
    EXPECT_LE(max_abs_diff(warp(img, swirl_field(img.shape(), 3.5, 3.5, 0.0, 5.0), Interpolation::bilinear), img),
              1e-12);
}

TEST(TensorOps, ClampAndNorms) {
    ImageTensor t({1, 3, 1}, std::vector<double>{-0.5, 0.4, 1.7});
    EXPECT_FALSE(within_unit_range(t));
    const ImageTensor c = clamp01(t);
    EXPECT_TRUE(within_unit_range(c));
    EXPECT_DOUBLE_EQ(c[0], 0.0);
    EXPECT_DOUBLE_EQ(c[2], 1.0);
    EXPECT_DOUBLE_EQ(linf_norm(t), 1.7);
    EXPECT_NEAR(l2_norm(t), std::sqrt(0.25 + 0.16 + 2.89), 1e-15);
    EXPECT_THROW(require_same_shape(t, ImageTensor({3, 1, 1}), "test"), std::invalid_argument);
}
