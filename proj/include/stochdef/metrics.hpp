#pragma once

#include "stochdef/aggregation.hpp"
#include "stochdef/attacks.hpp"
#include "stochdef/classifier.hpp"
#include "stochdef/dataset.hpp"
#include "stochdef/preprocessors.hpp"
#include "stochdef/rng.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace stochdef {

/// A rate together with the counts it was computed from.
struct RateCount {
    long hits = 0;
    long total = 0;

    double rate() const { return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total); }
    RateCount& operator+=(const RateCount& o) {
        hits += o.hits;
        total += o.total;
        return *this;
    }
};

/// Fraction of (item, draw) pairs where the defended prediction matches the
/// undefended one. Item i draws from rng.derive(i), so the result does not
/// depend on `workers`.
RateCount invariance_agreement(std::size_t items, int n_draws, const SeededRng& rng, int workers,
                               const std::function<int(std::size_t)>& clean_label,
                               const std::function<int(std::size_t, SeededRng&)>& defended_label);

/// Empirical invariance of the classifier to the pre-processor: agreement of
/// argmax f(t_theta(x)) with argmax f(x) over the dataset and n_draws draws.
double measure_invariance(const PreprocessorSpec& spec, const ClassifierParams& params, const Dataset& dataset,
                          int n_draws, const SeededRng& rng, int workers = 0);
RateCount measure_invariance_counts(const PreprocessorSpec& spec, const ClassifierParams& params,
                                    const Dataset& dataset, int n_draws, const SeededRng& rng, int workers = 0);

/// Aggregated (e.g. majority-vote) predictions for every example; example i
/// uses rng.derive(i).
std::vector<int> aggregated_labels(const AggregationRule& rule, const PreprocessorSpec& spec,
                                   const ClassifierParams& params, const Dataset& dataset, const SeededRng& rng,
                                   int workers = 0);

RateCount accuracy_of(const std::vector<int>& predicted, const std::vector<int>& labels);

struct AttackOutcome {
    RateCount success;              // denominator: examples eligible for the attack
    std::vector<int> post_labels;   // aggregated label after the attack, kRejected if skipped
    std::vector<unsigned char> eligible;
};

/// Attacks every eligible example and re-evaluates it with the aggregation
/// rule. Untargeted: eligible when the pre-attack prediction is the true
/// label, successful when the post-attack prediction differs from it.
/// Targeted: eligible when the pre-attack prediction is not the target,
/// successful when the post-attack prediction equals it. Example i attacks
/// on stream i of config.seed and re-votes on post_rng.derive(i).
AttackOutcome evaluate_attack(const PreprocessorSpec& spec, const ClassifierParams& params, const Dataset& dataset,
                              const std::vector<int>& pre_labels, const AttackConfig& config,
                              const AggregationRule& rule, const SeededRng& post_rng, int workers = 0);

} // namespace stochdef
