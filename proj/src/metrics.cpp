#include "stochdef/metrics.hpp"

#include "stochdef/parallel.hpp"

#include <stdexcept>

namespace stochdef {

RateCount invariance_agreement(std::size_t items, int n_draws, const SeededRng& rng, int workers,
                               const std::function<int(std::size_t)>& clean_label,
                               const std::function<int(std::size_t, SeededRng&)>& defended_label) {
    if (n_draws < 1) {
        throw std::invalid_argument("measure_invariance: n_draws must be at least 1");
    }
    std::vector<long> agree(items, 0);
    parallel_for(items, workers, [&](std::size_t i) {
        SeededRng item_rng = rng.derive(i);
        const int clean = clean_label(i);
        long a = 0;
        for (int d = 0; d < n_draws; ++d) {
            a += defended_label(i, item_rng) == clean ? 1 : 0;
        }
        agree[i] = a;
    });
    RateCount out;
    for (long a : agree) {
        out.hits += a;
    }
    out.total = static_cast<long>(items) * n_draws;
    return out;
}

RateCount measure_invariance_counts(const PreprocessorSpec& spec, const ClassifierParams& params,
                                    const Dataset& dataset, int n_draws, const SeededRng& rng, int workers) {
    dataset.validate();
    return invariance_agreement(
        dataset.size(), n_draws, rng, workers, [&](std::size_t i) { return predict(params, dataset.images[i]); },
        [&](std::size_t i, SeededRng& r) { return argmax(defended_forward(spec, params, dataset.images[i], r)); });
}

double measure_invariance(const PreprocessorSpec& spec, const ClassifierParams& params, const Dataset& dataset,
                          int n_draws, const SeededRng& rng, int workers) {
    return measure_invariance_counts(spec, params, dataset, n_draws, rng, workers).rate();
}

std::vector<int> aggregated_labels(const AggregationRule& rule, const PreprocessorSpec& spec,
                                   const ClassifierParams& params, const Dataset& dataset, const SeededRng& rng,
                                   int workers) {
    dataset.validate();
    std::vector<int> labels(dataset.size(), kRejected);
    parallel_for(dataset.size(), workers, [&](std::size_t i) {
        SeededRng r = rng.derive(i);
        labels[i] = aggregate(rule, spec, params, dataset.images[i], r).label;
    });
    return labels;
}

RateCount accuracy_of(const std::vector<int>& predicted, const std::vector<int>& labels) {
    if (predicted.size() != labels.size()) {
        throw std::invalid_argument("accuracy_of: length mismatch");
    }
    RateCount rc{0, static_cast<long>(labels.size())};
    for (std::size_t i = 0; i < labels.size(); ++i) {
        rc.hits += predicted[i] == labels[i] ? 1 : 0;
    }
    return rc;
}

AttackOutcome evaluate_attack(const PreprocessorSpec& spec, const ClassifierParams& params, const Dataset& dataset,
                              const std::vector<int>& pre_labels, const AttackConfig& config,
                              const AggregationRule& rule, const SeededRng& post_rng, int workers) {
    dataset.validate();
    config.validate();
    if (pre_labels.size() != dataset.size()) {
        throw std::invalid_argument("evaluate_attack: pre_labels length does not match dataset");
    }
    const bool targeted = config.mode == AttackMode::targeted;
    AttackOutcome out;
    out.post_labels.assign(dataset.size(), kRejected);
    out.eligible.assign(dataset.size(), 0);
    std::vector<unsigned char> success(dataset.size(), 0);
    parallel_for(dataset.size(), workers, [&](std::size_t i) {
        const int y = dataset.labels[i];
        const bool eligible = targeted ? pre_labels[i] != *config.target_label : pre_labels[i] == y;
        if (!eligible) {
            return;
        }
        out.eligible[i] = 1;
        const AttackTrace trace = run_attack(spec, params, dataset.images[i], y, config, i);
        SeededRng r = post_rng.derive(i);
        const int post = aggregate(rule, spec, params, trace.adversarial, r).label;
        out.post_labels[i] = post;
        success[i] = targeted ? (post == *config.target_label) : (post != y);
    });
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        out.success.total += out.eligible[i];
        out.success.hits += success[i];
    }
    return out;
}

} // namespace stochdef
