#pragma once

#include "stochdef/dataset.hpp"
#include "stochdef/preprocessors.hpp"
#include "stochdef/tensor.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace stochdef {

/// flatten -> dense(hidden) -> ReLU -> dense(num_classes). Weight matrices
/// are row-major with one row per output unit.
struct ClassifierParams {
    Shape input_shape{16, 16, 1};
    int hidden_width = 128;
    int num_classes = 10;
    std::vector<double> w1; // hidden_width x input_size
    std::vector<double> b1; // hidden_width
    std::vector<double> w2; // num_classes x hidden_width
    std::vector<double> b2; // num_classes

    int input_size() const { return static_cast<int>(input_shape.size()); }

    static ClassifierParams zeros(Shape input_shape, int hidden_width, int num_classes);
    /// Uniform fan-in initialization: layer l weights ~ U(-b, b) with
    /// b = sqrt(6 / fan_in) before the ReLU and sqrt(1 / fan_in) after it;
    /// biases start at zero.
    static ClassifierParams initialize(Shape input_shape, int hidden_width, int num_classes, std::uint64_t seed);

    /// Throws on inconsistent sizes or non-finite entries.
    void validate() const;
    bool operator==(const ClassifierParams&) const = default;
};

std::vector<double> forward(const ClassifierParams& params, const ImageTensor& img);
/// Argmax of the logits; ties go to the lowest index.
int predict(const ClassifierParams& params, const ImageTensor& img);
int argmax(std::span<const double> values);
std::vector<double> softmax(std::span<const double> logits);

struct LossAndGrad {
    double loss = 0.0;
    ImageTensor grad;
};

/// Cross-entropy of softmax(logits) against `label` and its exact gradient
/// with respect to every input pixel. Targeted attacks pass the target class
/// as `label` and descend instead of ascend.
LossAndGrad loss_and_input_grad(const ClassifierParams& params, const ImageTensor& img, int label);

struct TrainConfig {
    int epochs = 30;
    /// Index of the first epoch run. Training 0..a and then a..b with
    /// first_epoch = a matches one run over 0..b.
    int first_epoch = 0;
    int batch_size = 32;
    double learning_rate = 0.05;
    double weight_decay = 0.0;
    std::uint64_t seed = 0;
    /// When set, every example is passed through a fresh draw each epoch.
    std::optional<PreprocessorSpec> augment;
};

struct TrainLog {
    std::vector<double> epoch_loss; // mean training loss per epoch
};

/// Mini-batch gradient descent with decoupled weight decay. Works on a copy
/// of `params`; the result depends only on (params, dataset, config).
ClassifierParams train(ClassifierParams params, const Dataset& dataset, const TrainConfig& config,
                       TrainLog* log = nullptr);

double clean_accuracy(const ClassifierParams& params, const Dataset& dataset);

} // namespace stochdef
