#include "stochdef/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stochdef {

std::string Shape::str() const {
    return std::to_string(height) + "x" + std::to_string(width) + "x" + std::to_string(channels);
}

ImageTensor::ImageTensor(Shape shape, double fill) : shape_(shape), data_(shape.size(), fill) {
    if (shape.height <= 0 || shape.width <= 0 || shape.channels <= 0) {
        throw std::invalid_argument("ImageTensor: dimensions must be positive, got " + shape.str());
    }
}

ImageTensor::ImageTensor(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
    if (shape.height <= 0 || shape.width <= 0 || shape.channels <= 0) {
        throw std::invalid_argument("ImageTensor: dimensions must be positive, got " + shape.str());
    }
    if (data_.size() != shape.size()) {
        throw std::invalid_argument("ImageTensor: data length " + std::to_string(data_.size()) +
                                    " does not match shape " + shape.str());
    }
}

ImageTensor clamp01(ImageTensor img) {
    for (double& v : img.values()) {
        v = std::clamp(v, 0.0, 1.0);
    }
    return img;
}

bool within_unit_range(const ImageTensor& img) {
    return std::all_of(img.values().begin(), img.values().end(),
                       [](double v) { return v >= 0.0 && v <= 1.0; });
}

void require_same_shape(const ImageTensor& a, const ImageTensor& b, const char* what) {
    if (a.shape() != b.shape()) {
        throw std::invalid_argument(std::string(what) + ": shape mismatch " + a.shape().str() +
                                    " vs " + b.shape().str());
    }
}

ImageTensor operator+(const ImageTensor& a, const ImageTensor& b) {
    ImageTensor out = a;
    out += b;
    return out;
}

ImageTensor operator-(const ImageTensor& a, const ImageTensor& b) {
    require_same_shape(a, b, "operator-");
    ImageTensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] -= b[i];
    }
    return out;
}

ImageTensor operator*(double s, const ImageTensor& a) {
    ImageTensor out = a;
    for (double& v : out.values()) {
        v *= s;
    }
    return out;
}

ImageTensor& operator+=(ImageTensor& a, const ImageTensor& b) {
    require_same_shape(a, b, "operator+=");
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] += b[i];
    }
    return a;
}

double dot(const ImageTensor& a, const ImageTensor& b) {
    require_same_shape(a, b, "dot");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

double l2_norm(const ImageTensor& a) {
    double acc = 0.0;
    for (double v : a.values()) {
        acc += v * v;
    }
    return std::sqrt(acc);
}

double linf_norm(const ImageTensor& a) {
    double m = 0.0;
    for (double v : a.values()) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

double max_abs_diff(const ImageTensor& a, const ImageTensor& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

} // namespace stochdef
