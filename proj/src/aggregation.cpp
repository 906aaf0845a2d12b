#include "stochdef/aggregation.hpp"

#include <algorithm>
#include <stdexcept>

namespace stochdef {

std::string to_string(AggregationKind kind) {
    switch (kind) {
    case AggregationKind::vote:
        return "vote";
    case AggregationKind::match_all:
        return "match_all";
    case AggregationKind::avg_logits:
        return "avg_logits";
    }
    return "unknown";
}

AggregationKind aggregation_kind_from_string(const std::string& s) {
    if (s == "vote") {
        return AggregationKind::vote;
    }
    if (s == "match_all") {
        return AggregationKind::match_all;
    }
    if (s == "avg_logits") {
        return AggregationKind::avg_logits;
    }
    throw std::invalid_argument("unknown aggregation rule '" + s + "'");
}

void AggregationRule::validate() const {
    if (n < 1) {
        throw std::invalid_argument("AggregationRule: n must be at least 1");
    }
}

int vote_tiebreak(std::span<const int> histogram) {
    if (histogram.empty()) {
        throw std::invalid_argument("vote_tiebreak: empty histogram");
    }
    return static_cast<int>(std::max_element(histogram.begin(), histogram.end()) - histogram.begin());
}

AggregatedPrediction aggregate_logits(AggregationKind kind, const std::vector<std::vector<double>>& logits) {
    if (logits.empty() || logits.front().empty()) {
        throw std::invalid_argument("aggregate: no inferences to aggregate");
    }
    const std::size_t classes = logits.front().size();
    AggregatedPrediction out;
    out.vote_histogram.assign(classes, 0);
    for (const auto& row : logits) {
        if (row.size() != classes) {
            throw std::invalid_argument("aggregate: inconsistent logit lengths");
        }
        ++out.vote_histogram[static_cast<std::size_t>(argmax(row))];
    }
    const int n = static_cast<int>(logits.size());
    switch (kind) {
    case AggregationKind::vote:
        out.label = vote_tiebreak(out.vote_histogram);
        break;
    case AggregationKind::match_all: {
        const auto it = std::find(out.vote_histogram.begin(), out.vote_histogram.end(), n);
        out.label = it == out.vote_histogram.end() ? kRejected : static_cast<int>(it - out.vote_histogram.begin());
        break;
    }
    case AggregationKind::avg_logits: {
        out.mean_logits.assign(classes, 0.0);
        for (const auto& row : logits) {
            for (std::size_t c = 0; c < classes; ++c) {
                out.mean_logits[c] += row[c];
            }
        }
        for (double& v : out.mean_logits) {
            v /= n;
        }
        out.label = argmax(out.mean_logits);
        break;
    }
    }
    return out;
}

AggregatedPrediction aggregate(const AggregationRule& rule, const PreprocessorSpec& spec,
                               const ClassifierParams& params, const ImageTensor& img, SeededRng& rng) {
    rule.validate();
    std::vector<std::vector<double>> logits;
    logits.reserve(static_cast<std::size_t>(rule.n));
    for (int i = 0; i < rule.n; ++i) {
        logits.push_back(defended_forward(spec, params, img, rng));
    }
    return aggregate_logits(rule.kind, logits);
}

} // namespace stochdef
