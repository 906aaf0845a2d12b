#pragma once

#include "stochdef/classifier.hpp"
#include "stochdef/preprocessors.hpp"
#include "stochdef/rng.hpp"

#include <span>
#include <string>
#include <vector>

namespace stochdef {

enum class AggregationKind { vote, match_all, avg_logits };

std::string to_string(AggregationKind kind);
AggregationKind aggregation_kind_from_string(const std::string& s);

struct AggregationRule {
    AggregationKind kind = AggregationKind::vote;
    int n = 101;

    void validate() const;
};

inline constexpr int kRejected = -1;

struct AggregatedPrediction {
    int label = kRejected;            // kRejected only under match_all
    std::vector<int> vote_histogram;  // per-class counts; sums to n
    std::vector<double> mean_logits;  // filled for avg_logits
};

/// Lowest class index among the maximal counts.
int vote_tiebreak(std::span<const int> histogram);

/// Aggregates per-draw logits (one row per draw) under the rule.
AggregatedPrediction aggregate_logits(AggregationKind kind, const std::vector<std::vector<double>>& logits);

/// n defended inferences with fresh draws from `rng`, aggregated per rule.
AggregatedPrediction aggregate(const AggregationRule& rule, const PreprocessorSpec& spec,
                               const ClassifierParams& params, const ImageTensor& img, SeededRng& rng);

} // namespace stochdef
