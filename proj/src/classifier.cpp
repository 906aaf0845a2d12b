#include "stochdef/classifier.hpp"

#include "stochdef/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace stochdef {

namespace {

struct Activations {
    std::vector<double> pre;    // hidden pre-activation
    std::vector<double> hidden; // ReLU output
    std::vector<double> logits;
};

void check_input(const ClassifierParams& p, const ImageTensor& img) {
    if (img.shape() != p.input_shape) {
        throw std::invalid_argument("classifier: input shape " + img.shape().str() + " does not match " +
                                    p.input_shape.str());
    }
}

void run_forward(const ClassifierParams& p, std::span<const double> x, Activations& act) {
    const std::size_t in = x.size();
    const std::size_t hw = static_cast<std::size_t>(p.hidden_width);
    act.pre.resize(hw);
    act.hidden.resize(hw);
    act.logits.resize(static_cast<std::size_t>(p.num_classes));
    for (std::size_t j = 0; j < hw; ++j) {
        const double* row = &p.w1[j * in];
        double acc = p.b1[j];
        for (std::size_t i = 0; i < in; ++i) {
            acc += row[i] * x[i];
        }
        act.pre[j] = acc;
        act.hidden[j] = acc > 0.0 ? acc : 0.0;
    }
    for (std::size_t c = 0; c < act.logits.size(); ++c) {
        const double* row = &p.w2[c * hw];
        double acc = p.b2[c];
        for (std::size_t j = 0; j < hw; ++j) {
            acc += row[j] * act.hidden[j];
        }
        act.logits[c] = acc;
    }
}

double log_sum_exp(std::span<const double> v) {
    const double m = *std::max_element(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) {
        s += std::exp(x - m);
    }
    return m + std::log(s);
}

// Returns the loss and fills dlogits = softmax - onehot(label).
double cross_entropy(std::span<const double> logits, int label, std::vector<double>& dlogits) {
    const double lse = log_sum_exp(logits);
    dlogits.resize(logits.size());
    for (std::size_t c = 0; c < logits.size(); ++c) {
        dlogits[c] = std::exp(logits[c] - lse);
    }
    dlogits[static_cast<std::size_t>(label)] -= 1.0;
    return lse - logits[static_cast<std::size_t>(label)];
}

// dL/dpre for the hidden layer given dL/dlogits.
void hidden_delta(const ClassifierParams& p, const Activations& act, const std::vector<double>& dlogits,
                  std::vector<double>& dpre) {
    const std::size_t hw = static_cast<std::size_t>(p.hidden_width);
    dpre.assign(hw, 0.0);
    for (std::size_t c = 0; c < dlogits.size(); ++c) {
        const double g = dlogits[c];
        const double* row = &p.w2[c * hw];
        for (std::size_t j = 0; j < hw; ++j) {
            dpre[j] += row[j] * g;
        }
    }
    for (std::size_t j = 0; j < hw; ++j) {
        if (act.pre[j] <= 0.0) {
            dpre[j] = 0.0;
        }
    }
}

void check_label(const ClassifierParams& p, int label) {
    if (label < 0 || label >= p.num_classes) {
        throw std::invalid_argument("classifier: label " + std::to_string(label) + " outside [0, " +
                                    std::to_string(p.num_classes) + ")");
    }
}

} // namespace

ClassifierParams ClassifierParams::zeros(Shape input_shape, int hidden_width, int num_classes) {
    if (hidden_width < 1 || num_classes < 1 || input_shape.size() == 0) {
        throw std::invalid_argument("ClassifierParams: sizes must be positive");
    }
    ClassifierParams p;
    p.input_shape = input_shape;
    p.hidden_width = hidden_width;
    p.num_classes = num_classes;
    const std::size_t in = input_shape.size();
    p.w1.assign(static_cast<std::size_t>(hidden_width) * in, 0.0);
    p.b1.assign(static_cast<std::size_t>(hidden_width), 0.0);
    p.w2.assign(static_cast<std::size_t>(num_classes) * hidden_width, 0.0);
    p.b2.assign(static_cast<std::size_t>(num_classes), 0.0);
    return p;
}

ClassifierParams ClassifierParams::initialize(Shape input_shape, int hidden_width, int num_classes,
                                              std::uint64_t seed) {
    ClassifierParams p = zeros(input_shape, hidden_width, num_classes);
    SeededRng rng(seed, 0x1417);
    const double b1 = std::sqrt(6.0 / static_cast<double>(input_shape.size()));
    for (double& w : p.w1) {
        w = rng.uniform(-b1, b1);
    }
    const double b2 = std::sqrt(1.0 / hidden_width);
    for (double& w : p.w2) {
        w = rng.uniform(-b2, b2);
    }
    return p;
}

void ClassifierParams::validate() const {
    const std::size_t in = input_shape.size();
    if (hidden_width < 1 || num_classes < 1 || in == 0) {
        throw std::invalid_argument("ClassifierParams: sizes must be positive");
    }
    if (w1.size() != static_cast<std::size_t>(hidden_width) * in || b1.size() != static_cast<std::size_t>(hidden_width) ||
        w2.size() != static_cast<std::size_t>(num_classes) * hidden_width ||
        b2.size() != static_cast<std::size_t>(num_classes)) {
        throw std::invalid_argument("ClassifierParams: tensor sizes do not match the declared architecture");
    }
    for (const auto* v : {&w1, &b1, &w2, &b2}) {
        if (!std::all_of(v->begin(), v->end(), [](double x) { return std::isfinite(x); })) {
            throw std::invalid_argument("ClassifierParams: non-finite parameter");
        }
    }
}

std::vector<double> forward(const ClassifierParams& params, const ImageTensor& img) {
    check_input(params, img);
    Activations act;
    run_forward(params, img.values(), act);
    return act.logits;
}

int argmax(std::span<const double> values) {
    if (values.empty()) {
        throw std::invalid_argument("argmax: empty input");
    }
    return static_cast<int>(std::max_element(values.begin(), values.end()) - values.begin());
}

int predict(const ClassifierParams& params, const ImageTensor& img) {
    return argmax(forward(params, img));
}

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) {
        throw std::invalid_argument("softmax: empty logits");
    }
    const double top = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - top);
        total += out[i];
    }
    for (double& v : out) {
        v /= total;
    }
    return out;
}

LossAndGrad loss_and_input_grad(const ClassifierParams& params, const ImageTensor& img, int label) {
    check_input(params, img);
    check_label(params, label);
    Activations act;
    run_forward(params, img.values(), act);
    std::vector<double> dlogits;
    const double loss = cross_entropy(act.logits, label, dlogits);
    std::vector<double> dpre;
    hidden_delta(params, act, dlogits, dpre);

    ImageTensor grad(img.shape());
    auto g = grad.values();
    const std::size_t in = g.size();
    for (std::size_t j = 0; j < dpre.size(); ++j) {
        const double d = dpre[j];
        if (d == 0.0) {
            continue;
        }
        const double* row = &params.w1[j * in];
        for (std::size_t i = 0; i < in; ++i) {
            g[i] += row[i] * d;
        }
    }
    return {loss, std::move(grad)};
}

ClassifierParams train(ClassifierParams params, const Dataset& dataset, const TrainConfig& config, TrainLog* log) {
    params.validate();
    dataset.validate();
    if (config.epochs < 0 || config.first_epoch < 0 || config.batch_size < 1 || !(config.learning_rate > 0.0) ||
        !(config.weight_decay >= 0.0)) {
        throw std::invalid_argument("train: invalid TrainConfig");
    }
    if (config.epochs > 0 && dataset.empty()) {
        throw std::invalid_argument("train: dataset is empty");
    }
    if (config.augment) {
        config.augment->validate();
    }

    const std::size_t n = dataset.size();
    const std::size_t in = params.input_shape.size();
    const std::size_t hw = static_cast<std::size_t>(params.hidden_width);
    const std::size_t nc = static_cast<std::size_t>(params.num_classes);
    std::vector<std::size_t> order(n);
    std::vector<double> gw1(params.w1.size()), gb1(hw), gw2(params.w2.size()), gb2(nc);
    Activations act;
    std::vector<double> dlogits, dpre;
    const SeededRng shuffle_root(config.seed, 0x5AFF1E);
    const SeededRng augment_root(config.seed, 0xA06);

    for (int epoch = config.first_epoch; epoch < config.first_epoch + config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        SeededRng shuffle = shuffle_root.derive(static_cast<std::uint64_t>(epoch));
        for (std::size_t i = n; i > 1; --i) {
            std::swap(order[i - 1], order[static_cast<std::size_t>(shuffle.uniform_int(0, static_cast<int>(i - 1)))]);
        }
        const SeededRng epoch_aug = augment_root.derive(static_cast<std::uint64_t>(epoch));
        double epoch_loss = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(config.batch_size), ++batch_index) {
            const std::size_t stop = std::min(n, start + static_cast<std::size_t>(config.batch_size));
            std::fill(gw1.begin(), gw1.end(), 0.0);
            std::fill(gb1.begin(), gb1.end(), 0.0);
            std::fill(gw2.begin(), gw2.end(), 0.0);
            std::fill(gb2.begin(), gb2.end(), 0.0);
            double batch_loss = 0.0;
            for (std::size_t b = start; b < stop; ++b) {
                const std::size_t idx = order[b];
                const int label = dataset.labels[idx];
                check_label(params, label);
                ImageTensor x;
                if (config.augment) {
                    SeededRng rng = epoch_aug.derive(idx);
                    const ThetaDraw draw = sample(*config.augment, dataset.images[idx].shape(), rng);
                    x = apply(*config.augment, draw, dataset.images[idx]);
                } else {
                    x = dataset.images[idx];
                }
                check_input(params, x);
                const auto xs = x.values();
                run_forward(params, xs, act);
                batch_loss += cross_entropy(act.logits, label, dlogits);
                for (std::size_t c = 0; c < nc; ++c) {
                    gb2[c] += dlogits[c];
                    double* row = &gw2[c * hw];
                    for (std::size_t j = 0; j < hw; ++j) {
                        row[j] += dlogits[c] * act.hidden[j];
                    }
                }
                hidden_delta(params, act, dlogits, dpre);
                for (std::size_t j = 0; j < hw; ++j) {
                    const double d = dpre[j];
                    if (d == 0.0) {
                        continue;
                    }
                    gb1[j] += d;
                    double* row = &gw1[j * in];
                    for (std::size_t i = 0; i < in; ++i) {
                        row[i] += d * xs[i];
                    }
                }
            }
            if (!std::isfinite(batch_loss)) {
                throw std::runtime_error("train: loss diverged (non-finite) at epoch " + std::to_string(epoch) +
                                         ", batch " + std::to_string(batch_index));
            }
            epoch_loss += batch_loss;
            const double scale = config.learning_rate / static_cast<double>(stop - start);
            const double decay = config.learning_rate * config.weight_decay;
            for (std::size_t i = 0; i < params.w1.size(); ++i) {
                params.w1[i] -= scale * gw1[i] + decay * params.w1[i];
            }
            for (std::size_t i = 0; i < hw; ++i) {
                params.b1[i] -= scale * gb1[i];
            }
            for (std::size_t i = 0; i < params.w2.size(); ++i) {
                params.w2[i] -= scale * gw2[i] + decay * params.w2[i];
            }
            for (std::size_t i = 0; i < nc; ++i) {
                params.b2[i] -= scale * gb2[i];
            }
        }
        if (log) {
            log->epoch_loss.push_back(epoch_loss / static_cast<double>(n));
        }
    }
    return params;
}

double clean_accuracy(const ClassifierParams& params, const Dataset& dataset) {
    dataset.validate();
    if (dataset.empty()) {
        throw std::invalid_argument("clean_accuracy: empty dataset");
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        correct += predict(params, dataset.images[i]) == dataset.labels[i] ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

} // namespace stochdef
