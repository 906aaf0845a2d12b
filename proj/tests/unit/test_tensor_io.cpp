#include "stochdef/dataset.hpp"
#include "stochdef/tensor_io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

using namespace stochdef;

namespace {

ImageTensor ramp(Shape s, double offset) {
    ImageTensor t(s);
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = offset + 0.001 * static_cast<double>(i);
    }
    return t;
}

} // namespace

TEST(TensorIo, RoundTripIsFloat32Exact) {
    const std::vector<ImageTensor> recs{ramp({3, 4, 2}, 0.1), ramp({3, 4, 2}, 0.5)};
    std::stringstream buf;
    write_tensors(buf, recs);
    const auto back = read_tensors(buf);
    ASSERT_EQ(back.size(), 2u);
    for (std::size_t r = 0; r < 2; ++r) {
        ASSERT_EQ(back[r].shape(), recs[r].shape());
        for (std::size_t i = 0; i < recs[r].size(); ++i) {
            EXPECT_EQ(back[r][i], static_cast<double>(static_cast<float>(recs[r][i])));
        }
    }
}

TEST(TensorIo, HeaderLayout) {
    std::stringstream buf;
    write_tensors(buf, {ramp({2, 3, 1}, 0.0)});
    const std::string bytes = buf.str();
    ASSERT_EQ(bytes.size(), 16u + 6u * 4u);
    EXPECT_EQ(bytes.substr(0, 4), "STDB");
    EXPECT_EQ(bytes[4], 1);
    EXPECT_EQ(bytes[5], 1);
    EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 2);
    EXPECT_EQ(static_cast<unsigned char>(bytes[10]), 3);
    EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 1);
    EXPECT_EQ(static_cast<unsigned char>(bytes[14]), 1);
}

TEST(TensorIo, RejectsBadMagicAndTruncation) {
    std::stringstream buf;
    write_tensors(buf, {ramp({2, 2, 1}, 0.0)});
    std::string bytes = buf.str();
    std::string bad = bytes;
    bad[0] = 'X';
    std::stringstream b1(bad);
    EXPECT_THROW(read_tensors(b1), std::runtime_error);
    std::stringstream b2(bytes.substr(0, bytes.size() - 3));
    EXPECT_THROW(read_tensors(b2), std::runtime_error);
    std::stringstream b3(bytes.substr(0, 10));
    EXPECT_THROW(read_tensors(b3), std::runtime_error);
}

TEST(TensorIo, LabelsAndDatasetFiles) {
    const auto dir = std::filesystem::temp_directory_path() / "stochdef_io_test";
    std::filesystem::create_directories(dir);
    const SyntheticSplits s = generate_synthetic_dataset(3, {2, 1, 1});
    save_dataset(dir / "imgs.stdb", dir / "labels.stdb", s.train);
    const Dataset back = load_dataset(dir / "imgs.stdb", dir / "labels.stdb");
    EXPECT_EQ(back.labels, s.train.labels);
    ASSERT_EQ(back.size(), s.train.size());
    EXPECT_LE(max_abs_diff(back.images[0], s.train.images[0]), 1e-7);
    save_labels(dir / "l.stdb", {0, 9, 65535});
    EXPECT_EQ(load_labels(dir / "l.stdb"), (std::vector<int>{0, 9, 65535}));
    EXPECT_THROW(load_tensors(dir / "missing.stdb"), std::runtime_error);
    std::filesystem::remove_all(dir);
}

TEST(SyntheticData, DeterministicAndWellFormed) {
    const SyntheticSplits a = generate_synthetic_dataset(11, {3, 2, 2});
    const SyntheticSplits b = generate_synthetic_dataset(11, {3, 2, 2});
    ASSERT_EQ(a.train.size(), 30u);
    ASSERT_EQ(a.val.size(), 20u);
    ASSERT_EQ(a.test.size(), 20u);
    for (std::size_t i = 0; i < a.train.size(); ++i) {
        ASSERT_EQ(a.train.images[i], b.train.images[i]);
        EXPECT_TRUE(within_unit_range(a.train.images[i]));
        EXPECT_EQ(a.train.images[i].shape(), (Shape{16, 16, 1}));
    }
    EXPECT_EQ(a.train.labels, b.train.labels);
    for (int c = 0; c < kSyntheticClasses; ++c) {
        EXPECT_EQ(std::count(a.test.labels.begin(), a.test.labels.end(), c), 2);
    }
    EXPECT_NE(a.train.images[0], generate_synthetic_dataset(12, {3, 2, 2}).train.images[0]);
    EXPECT_THROW(generate_synthetic_dataset(1, {0, 1, 1}), std::invalid_argument);
}

TEST(SyntheticData, GlyphsAreDistinct) {
    for (int a = 0; a < kSyntheticClasses; ++a) {
        for (int b = a + 1; b < kSyntheticClasses; ++b) {
            EXPECT_GT(l2_norm(render_glyph(a, 0, 0) - render_glyph(b, 0, 0)), 1.0) << a << " vs " << b;
        }
    }
}
