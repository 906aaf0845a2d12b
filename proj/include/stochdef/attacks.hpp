#pragma once

#include "stochdef/classifier.hpp"
#include "stochdef/preprocessors.hpp"
#include "stochdef/rng.hpp"
#include "stochdef/tensor.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace stochdef {

enum class Norm { linf, l2 };
enum class AttackMode { untargeted, targeted };

std::string to_string(Norm norm);
std::string to_string(AttackMode mode);
Norm norm_from_string(const std::string& s);
AttackMode attack_mode_from_string(const std::string& s);

/// PGD-k with EOT-m. No random start: iteration 0 is the clean input.
struct AttackConfig {
    Norm norm = Norm::linf;
    double epsilon = 8.0 / 255.0;
    double alpha = 1.0 / 255.0;
    int pgd_steps = 10;
    int eot_samples = 1;
    AttackMode mode = AttackMode::untargeted;
    std::optional<int> target_label;
    std::uint64_t seed = 0;

    /// Total gradient computations, k * m.
    long strength() const { return static_cast<long>(pgd_steps) * eot_samples; }
    void validate() const;
};

struct AttackTrace {
    std::vector<double> step_loss; // mean EOT loss at each iterate before stepping
    ImageTensor adversarial;
    long gradient_queries = 0;
    int zero_gradient_steps = 0;   // L2 steps skipped because the estimate was 0
};

/// x + direction * alpha * sign(grad), projected onto the L-inf ball around
/// x0 and clamped to [0, 1]. sign(0) = 0.
ImageTensor pgd_step_linf(const ImageTensor& x, const ImageTensor& x0, const ImageTensor& grad, double alpha,
                          double epsilon, int direction);

/// x + direction * alpha * grad / |grad|_2, radially projected onto the L2
/// ball around x0 and clamped to [0, 1]. A zero gradient leaves x in place.
ImageTensor pgd_step_l2(const ImageTensor& x, const ImageTensor& x0, const ImageTensor& grad, double alpha,
                        double epsilon, int direction);

struct EotEstimate {
    ImageTensor grad;
    double mean_loss = 0.0;
};

/// Average over m fresh draws theta_j of backward(t_theta_j) applied to the
/// input gradient of the classifier loss at t_theta_j(x). Summation runs in
/// draw order.
EotEstimate eot_gradient(const PreprocessorSpec& spec, const ClassifierParams& params, const ImageTensor& x,
                         int label, int m, SeededRng& rng);

/// Runs the configured attack from x0. `label` is the true class; targeted
/// attacks descend the loss toward config.target_label instead. Draws come
/// from the stream (config.seed, stream).
AttackTrace run_attack(const PreprocessorSpec& spec, const ClassifierParams& params, const ImageTensor& x0,
                       int label, const AttackConfig& config, std::uint64_t stream = 0);

} // namespace stochdef
