#include "stochdef/aggregation.hpp"
#include "stochdef/dataset.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

using namespace stochdef;

namespace {

std::vector<std::vector<double>> one_hot_rows(const std::vector<int>& winners, int classes = 4) {
    std::vector<std::vector<double>> rows;
    for (int w : winners) {
        std::vector<double> r(static_cast<std::size_t>(classes), 0.0);
        r[static_cast<std::size_t>(w)] = 1.0;
        rows.push_back(r);
    }
    return rows;
}

} // namespace

TEST(Vote, PluralityWithLowestIndexTiebreak) {
    EXPECT_EQ(vote_tiebreak(std::vector<int>{1, 3, 3, 0}), 1);
    EXPECT_EQ(aggregate_logits(AggregationKind::vote, one_hot_rows({2, 2, 1})).label, 2);
    EXPECT_EQ(aggregate_logits(AggregationKind::vote, one_hot_rows({3, 1, 3, 1})).label, 1);
    const auto h = aggregate_logits(AggregationKind::vote, one_hot_rows({0, 0, 3})).vote_histogram;
    EXPECT_EQ(h, (std::vector<int>{2, 0, 0, 1}));
}

TEST(MatchAll, RejectsDisagreement) {
    EXPECT_EQ(aggregate_logits(AggregationKind::match_all, one_hot_rows({2, 2, 2})).label, 2);
    EXPECT_EQ(aggregate_logits(AggregationKind::match_all, one_hot_rows({2, 2, 1})).label, kRejected);
}

TEST(AvgLogits, ArgmaxOfMeanLogits) {
    const std::vector<std::vector<double>> rows{{3.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 1.0, 0.0}};
    const auto out = aggregate_logits(AggregationKind::avg_logits, rows);
    EXPECT_EQ(out.label, 0);  // the vote would say 1
    EXPECT_EQ(aggregate_logits(AggregationKind::vote, rows).label, 1);
    EXPECT_NEAR(out.mean_logits[1], 2.0 / 3.0, 1e-15);
}

TEST(Aggregation, PermutingDrawsNeverChangesTheResult) {
    std::vector<int> winners{0, 3, 3, 1, 0, 2, 3, 0, 1};
    const auto rows = one_hot_rows(winners);
    for (auto kind : {AggregationKind::vote, AggregationKind::match_all, AggregationKind::avg_logits}) {
        const int expected = aggregate_logits(kind, rows).label;
        std::vector<std::size_t> perm(rows.size());
        std::iota(perm.begin(), perm.end(), 0);
        int checked = 0;
        do {
            std::vector<std::vector<double>> p;
            for (std::size_t i : perm) {
                p.push_back(rows[i]);
            }
            ASSERT_EQ(aggregate_logits(kind, p).label, expected);
        } while (std::next_permutation(perm.begin(), perm.end()) && ++checked < 2000);
    }
}

TEST(Aggregation, InvalidInputs) {
    EXPECT_THROW(aggregate_logits(AggregationKind::vote, {}), std::invalid_argument);
    EXPECT_THROW(aggregate_logits(AggregationKind::vote, {{1.0, 0.0}, {1.0}}), std::invalid_argument);
    EXPECT_THROW((AggregationRule{AggregationKind::vote, 0}).validate(), std::invalid_argument);
    EXPECT_THROW(aggregation_kind_from_string("median"), std::invalid_argument);
    EXPECT_EQ(aggregation_kind_from_string("avg_logits"), AggregationKind::avg_logits);
}

TEST(Aggregation, DefendedVoteOverDraws) {
    const auto params = ClassifierParams::initialize({16, 16, 1}, 16, 10, 3);
    const ImageTensor img = render_glyph(4, 0.0, 0.0);
    SeededRng rng(1, 0);
    const auto out = aggregate({AggregationKind::vote, 101}, PreprocessorSpec::identity(), params, img, rng);
    EXPECT_EQ(out.label, predict(params, img));
    EXPECT_EQ(std::accumulate(out.vote_histogram.begin(), out.vote_histogram.end(), 0), 101);
    SeededRng a(2, 0);
    SeededRng b(2, 0);
    const auto spec = PreprocessorSpec::gaussian(0.5);
    EXPECT_EQ(aggregate({AggregationKind::vote, 11}, spec, params, img, a).vote_histogram,
              aggregate({AggregationKind::vote, 11}, spec, params, img, b).vote_histogram);
}
