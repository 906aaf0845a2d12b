#pragma once

#include "stochdef/aggregation.hpp"
#include "stochdef/attacks.hpp"
#include "stochdef/classifier.hpp"
#include "stochdef/dataset.hpp"
#include "stochdef/preprocessors.hpp"
#include "stochdef/report.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace stochdef {

enum class ExperimentKind { e1, e2, e3 };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& s);

/// Either the synthetic generator or raw tensor files.
struct DatasetSource {
    std::uint64_t synthetic_seed = 1;
    SplitSizes sizes;
    std::optional<std::filesystem::path> train_images, train_labels, test_images, test_labels;
    int test_size = 200; // leading examples of the test split that are evaluated

    bool synthetic() const { return !train_images.has_value(); }
};

struct ModelSource {
    std::optional<std::filesystem::path> checkpoint; // skips base training when set
    int hidden_width = 128;
    TrainConfig train;                               // base training; seed derived from the global seed
};

/// Fine-tuning on defense-augmented training data. Snapshot epoch 0 is the
/// base model itself.
struct FinetuneConfig {
    std::vector<int> snapshots{0};
    int batch_size = 32;
    double learning_rate = 0.05;
    double weight_decay = 0.0;
};

struct AttackCell {
    int k = 10;
    int m = 1;
};

struct AttackGrid {
    Norm norm = Norm::linf;
    double epsilon = 8.0 / 255.0;
    AttackMode mode = AttackMode::untargeted;
    int target_label = 9;
    std::vector<AttackCell> cells;
    std::vector<double> alphas;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::e1;
    std::uint64_t seed = 7;
    DatasetSource dataset;
    ModelSource model;
    std::vector<PreprocessorSpec> defenses;
    AttackGrid attack;
    AggregationRule aggregation;
    FinetuneConfig finetune;
    int invariance_draws = 10;
    int workers = 0;
    std::optional<std::filesystem::path> output;

    /// Throws std::invalid_argument describing the first violated rule.
    void validate() const;
};

/// Desk-scale defaults for each experiment.
ExperimentConfig default_experiment_config(ExperimentKind kind);

struct ExperimentData {
    Dataset train;
    Dataset test;
};

ExperimentData load_experiment_data(const DatasetSource& source);

/// Trains (or loads) the undefended base model.
ClassifierParams base_model(const ExperimentConfig& config, const Dataset& train);

using ProgressFn = std::function<void(const std::string&)>;

/// E1 and E2: every (defense, snapshot, cell, alpha) is evaluated, followed
/// by one "<experiment>_best" row per (defense, snapshot, cell) holding the
/// step size with the highest success rate (ties go to the earlier alpha).
/// E3: the step size is chosen once on the first snapshot for the single
/// configured cell and reused for every later snapshot.
/// Rows come out in loop order: defense, snapshot, cell, alpha.
std::vector<EvalReport> run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {});

std::vector<EvalReport> run_e1_ablation(const ExperimentConfig& config, const ProgressFn& progress = {});
std::vector<EvalReport> run_e2_eot_grid(const ExperimentConfig& config, const ProgressFn& progress = {});
std::vector<EvalReport> run_e3_tradeoff(const ExperimentConfig& config, const ProgressFn& progress = {});

/// Same as run_experiment but with precomputed data and base model.
std::vector<EvalReport> run_experiment(const ExperimentConfig& config, const ExperimentData& data,
                                       const ClassifierParams& base, const ProgressFn& progress = {});

} // namespace stochdef
