#include "stochdef/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stochdef {

std::string to_string(Norm norm) {
    return norm == Norm::linf ? "linf" : "l2";
}

std::string to_string(AttackMode mode) {
    return mode == AttackMode::untargeted ? "untargeted" : "targeted";
}

Norm norm_from_string(const std::string& s) {
    if (s == "linf" || s == "Linf") {
        return Norm::linf;
    }
    if (s == "l2" || s == "L2") {
        return Norm::l2;
    }
    throw std::invalid_argument("unknown norm '" + s + "' (expected linf or l2)");
}

AttackMode attack_mode_from_string(const std::string& s) {
    if (s == "untargeted") {
        return AttackMode::untargeted;
    }
    if (s == "targeted") {
        return AttackMode::targeted;
    }
    throw std::invalid_argument("unknown attack mode '" + s + "' (expected untargeted or targeted)");
}

void AttackConfig::validate() const {
    if (!(epsilon > 0.0) || !(alpha > 0.0)) {
        throw std::invalid_argument("AttackConfig: epsilon and alpha must be positive");
    }
    if (pgd_steps < 0 || eot_samples < 1) {
        throw std::invalid_argument("AttackConfig: pgd_steps must be >= 0 and eot_samples >= 1");
    }
    if (mode == AttackMode::targeted && !target_label) {
        throw std::invalid_argument("AttackConfig: targeted mode requires target_label");
    }
}

ImageTensor pgd_step_linf(const ImageTensor& x, const ImageTensor& x0, const ImageTensor& grad, double alpha,
                          double epsilon, int direction) {
    require_same_shape(x, x0, "pgd_step_linf");
    require_same_shape(x, grad, "pgd_step_linf");
    ImageTensor next = x;
    for (std::size_t i = 0; i < next.size(); ++i) {
        const double g = grad[i];
        const double s = g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0);
        const double moved = x[i] + direction * alpha * s;
        next[i] = std::clamp(std::clamp(moved, x0[i] - epsilon, x0[i] + epsilon), 0.0, 1.0);
    }
    return next;
}

ImageTensor pgd_step_l2(const ImageTensor& x, const ImageTensor& x0, const ImageTensor& grad, double alpha,
                        double epsilon, int direction) {
    require_same_shape(x, x0, "pgd_step_l2");
    require_same_shape(x, grad, "pgd_step_l2");
    const double gnorm = l2_norm(grad);
    ImageTensor delta = x - x0;
    if (gnorm > 0.0) {
        const double scale = direction * alpha / gnorm;
        for (std::size_t i = 0; i < delta.size(); ++i) {
            delta[i] += scale * grad[i];
        }
    }
    const double dnorm = l2_norm(delta);
    if (dnorm > epsilon) {
        const double shrink = epsilon / dnorm;
        for (double& v : delta.values()) {
            v *= shrink;
        }
    }
    ImageTensor next = x0;
    for (std::size_t i = 0; i < next.size(); ++i) {
        next[i] = std::clamp(x0[i] + delta[i], 0.0, 1.0);
    }
    return next;
}

EotEstimate eot_gradient(const PreprocessorSpec& spec, const ClassifierParams& params, const ImageTensor& x,
                         int label, int m, SeededRng& rng) {
    if (m < 1) {
        throw std::invalid_argument("eot_gradient: m must be at least 1");
    }
    EotEstimate est{ImageTensor(x.shape()), 0.0};
    for (int j = 0; j < m; ++j) {
        const ThetaDraw draw = sample(spec, x.shape(), rng);
        const ImageTensor transformed = apply(spec, draw, x);
        const LossAndGrad lg = loss_and_input_grad(params, transformed, label);
        est.grad += backward(spec, draw, x, lg.grad);
        est.mean_loss += lg.loss;
    }
    const double inv = 1.0 / m;
    for (double& v : est.grad.values()) {
        v *= inv;
    }
    est.mean_loss *= inv;
    return est;
}

AttackTrace run_attack(const PreprocessorSpec& spec, const ClassifierParams& params, const ImageTensor& x0,
                       int label, const AttackConfig& config, std::uint64_t stream) {
    config.validate();
    if (!within_unit_range(x0)) {
        throw std::invalid_argument("run_attack: x0 must lie in [0, 1]");
    }
    const bool targeted = config.mode == AttackMode::targeted;
    const int loss_label = targeted ? *config.target_label : label;
    const int direction = targeted ? -1 : 1;
    SeededRng rng(config.seed, stream);

    AttackTrace trace;
    trace.step_loss.reserve(static_cast<std::size_t>(config.pgd_steps));
    ImageTensor x = x0;
    for (int step = 0; step < config.pgd_steps; ++step) {
        const EotEstimate est = eot_gradient(spec, params, x, loss_label, config.eot_samples, rng);
        trace.gradient_queries += config.eot_samples;
        trace.step_loss.push_back(est.mean_loss);
        if (config.norm == Norm::linf) {
            x = pgd_step_linf(x, x0, est.grad, config.alpha, config.epsilon, direction);
        } else {
            if (l2_norm(est.grad) == 0.0) {
                ++trace.zero_gradient_steps;
            }
            x = pgd_step_l2(x, x0, est.grad, config.alpha, config.epsilon, direction);
        }
    }
    trace.adversarial = std::move(x);
    return trace;
}

} // namespace stochdef
