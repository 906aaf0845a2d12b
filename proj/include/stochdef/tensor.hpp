#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace stochdef {

struct Shape {
    int height = 0;
    int width = 0;
    int channels = 0;

    std::size_t size() const {
        return static_cast<std::size_t>(height) * static_cast<std::size_t>(width) *
               static_cast<std::size_t>(channels);
    }
    bool operator==(const Shape&) const = default;
    std::string str() const;
};

/// Dense H x W x C grid stored row-major with channels innermost.
/// Holds images (values in [0, 1]) as well as unbounded gradients.
class ImageTensor {
public:
    ImageTensor() = default;
    explicit ImageTensor(Shape shape, double fill = 0.0);
    ImageTensor(Shape shape, std::vector<double> data);

    const Shape& shape() const { return shape_; }
    int height() const { return shape_.height; }
    int width() const { return shape_.width; }
    int channels() const { return shape_.channels; }
    std::size_t size() const { return data_.size(); }

    std::size_t index(int y, int x, int c) const {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(shape_.width) +
                static_cast<std::size_t>(x)) *
                   static_cast<std::size_t>(shape_.channels) +
               static_cast<std::size_t>(c);
    }
    double& at(int y, int x, int c) { return data_[index(y, x, c)]; }
    double at(int y, int x, int c) const { return data_[index(y, x, c)]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool operator==(const ImageTensor&) const = default;

private:
    Shape shape_{};
    std::vector<double> data_;
};

/// Per-channel complex coefficient grid, same layout as ImageTensor.
struct ComplexGrid {
    Shape shape{};
    std::vector<std::complex<double>> data;

    std::complex<double>& at(int y, int x, int c) {
        return data[(static_cast<std::size_t>(y) * shape.width + x) * shape.channels + c];
    }
    const std::complex<double>& at(int y, int x, int c) const {
        return data[(static_cast<std::size_t>(y) * shape.width + x) * shape.channels + c];
    }
};

ImageTensor clamp01(ImageTensor img);
bool within_unit_range(const ImageTensor& img);

ImageTensor operator+(const ImageTensor& a, const ImageTensor& b);
ImageTensor operator-(const ImageTensor& a, const ImageTensor& b);
ImageTensor operator*(double s, const ImageTensor& a);
ImageTensor& operator+=(ImageTensor& a, const ImageTensor& b);

double dot(const ImageTensor& a, const ImageTensor& b);
double l2_norm(const ImageTensor& a);
double linf_norm(const ImageTensor& a);
double max_abs_diff(const ImageTensor& a, const ImageTensor& b);

void require_same_shape(const ImageTensor& a, const ImageTensor& b, const char* what);

} // namespace stochdef
