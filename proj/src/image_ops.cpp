#include "stochdef/image_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stochdef {

namespace {

struct Tap {
    int x;
    int y;
    double weight;
};

// Up to four in-bounds taps for one sample position.
int sample_taps(double sx, double sy, int width, int height, Interpolation interp, Tap* taps) {
    int count = 0;
    if (interp == Interpolation::nearest) {
        const int ix = static_cast<int>(std::floor(sx + 0.5));
        const int iy = static_cast<int>(std::floor(sy + 0.5));
        if (ix >= 0 && ix < width && iy >= 0 && iy < height) {
            taps[count++] = {ix, iy, 1.0};
        }
        return count;
    }
    const double fx0 = std::floor(sx);
    const double fy0 = std::floor(sy);
    const int x0 = static_cast<int>(fx0);
    const int y0 = static_cast<int>(fy0);
    const double ax = sx - fx0;
    const double ay = sy - fy0;
    const int xs[2] = {x0, x0 + 1};
    const int ys[2] = {y0, y0 + 1};
    const double wx[2] = {1.0 - ax, ax};
    const double wy[2] = {1.0 - ay, ay};
    for (int j = 0; j < 2; ++j) {
        if (ys[j] < 0 || ys[j] >= height || wy[j] == 0.0) {
            continue;
        }
        for (int i = 0; i < 2; ++i) {
            if (xs[i] < 0 || xs[i] >= width || wx[i] == 0.0) {
                continue;
            }
            taps[count++] = {xs[i], ys[j], wx[i] * wy[j]};
        }
    }
    return count;
}

void check_field(const WarpField& field) {
    const std::size_t n = static_cast<std::size_t>(field.out_height) * field.out_width;
    if (field.src_x.size() != n || field.src_y.size() != n) {
        throw std::invalid_argument("WarpField: coordinate arrays do not match output size");
    }
}

std::vector<std::complex<double>> twiddles(int n, double sign) {
    std::vector<std::complex<double>> t(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(k) / n;
        t[static_cast<std::size_t>(k)] = {std::cos(angle), std::sin(angle)};
    }
    return t;
}

// Separable direct transform: rows then columns, per channel.
ComplexGrid direct_dft2(const ComplexGrid& in, double sign) {
    const int h = in.shape.height;
    const int w = in.shape.width;
    const int ch = in.shape.channels;
    const auto tw = twiddles(w, sign);
    const auto th = twiddles(h, sign);

    ComplexGrid rows{in.shape, std::vector<std::complex<double>>(in.data.size())};
    for (int c = 0; c < ch; ++c) {
        for (int y = 0; y < h; ++y) {
            for (int v = 0; v < w; ++v) {
                std::complex<double> acc = 0.0;
                for (int x = 0; x < w; ++x) {
                    acc += in.at(y, x, c) * tw[static_cast<std::size_t>((v * x) % w)];
                }
                rows.at(y, v, c) = acc;
            }
        }
    }
    ComplexGrid out{in.shape, std::vector<std::complex<double>>(in.data.size())};
    for (int c = 0; c < ch; ++c) {
        for (int v = 0; v < w; ++v) {
            for (int u = 0; u < h; ++u) {
                std::complex<double> acc = 0.0;
                for (int y = 0; y < h; ++y) {
                    acc += rows.at(y, v, c) * th[static_cast<std::size_t>((u * y) % h)];
                }
                out.at(u, v, c) = acc;
            }
        }
    }
    return out;
}

void check_kernel(const Kernel2D& kernel) {
    if (kernel.rows <= 0 || kernel.cols <= 0 || kernel.rows % 2 == 0 || kernel.cols % 2 == 0) {
        throw std::invalid_argument("convolve2: kernel dimensions must be odd and positive");
    }
    if (kernel.weights.size() != static_cast<std::size_t>(kernel.rows) * kernel.cols) {
        throw std::invalid_argument("convolve2: kernel weight count does not match its dimensions");
    }
}

} // namespace

ImageTensor warp(const ImageTensor& img, const WarpField& field, Interpolation interp) {
    check_field(field);
    if (img.shape() != field.input_shape) {
        throw std::invalid_argument("warp: image shape " + img.shape().str() +
                                    " does not match field input " + field.input_shape.str());
    }
    ImageTensor out(field.output_shape());
    const int ch = img.channels();
    Tap taps[4];
    for (int y = 0; y < field.out_height; ++y) {
        for (int x = 0; x < field.out_width; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * field.out_width + x;
            const int n = sample_taps(field.src_x[p], field.src_y[p], img.width(), img.height(), interp, taps);
            for (int c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (int t = 0; t < n; ++t) {
                    acc += taps[t].weight * img.at(taps[t].y, taps[t].x, c);
                }
                out.at(y, x, c) = acc;
            }
        }
    }
    return out;
}

ImageTensor warp_adjoint(const ImageTensor& upstream, const WarpField& field, Interpolation interp) {
    check_field(field);
    if (upstream.shape() != field.output_shape()) {
        throw std::invalid_argument("warp_adjoint: upstream shape " + upstream.shape().str() +
                                    " does not match field output " + field.output_shape().str());
    }
    ImageTensor grad(field.input_shape);
    const int ch = grad.channels();
    Tap taps[4];
    for (int y = 0; y < field.out_height; ++y) {
        for (int x = 0; x < field.out_width; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * field.out_width + x;
            const int n = sample_taps(field.src_x[p], field.src_y[p], grad.width(), grad.height(), interp, taps);
            for (int t = 0; t < n; ++t) {
                for (int c = 0; c < ch; ++c) {
                    grad.at(taps[t].y, taps[t].x, c) += taps[t].weight * upstream.at(y, x, c);
                }
            }
        }
    }
    return grad;
}

WarpField rotation_field(Shape shape, double degrees) {
    if (!(degrees >= -180.0 && degrees <= 180.0)) {
        throw std::invalid_argument("rotate: degrees must lie in [-180, 180]");
    }
    WarpField f{shape, shape.height, shape.width, {}, {}};
    const std::size_t n = static_cast<std::size_t>(shape.height) * shape.width;
    f.src_x.resize(n);
    f.src_y.resize(n);
    const double rad = degrees * std::numbers::pi / 180.0;
    const double c = std::cos(rad);
    const double s = std::sin(rad);
    const double cx = 0.5 * (shape.width - 1);
    const double cy = 0.5 * (shape.height - 1);
    for (int y = 0; y < shape.height; ++y) {
        for (int x = 0; x < shape.width; ++x) {
            const double dx = x - cx;
            const double dy = y - cy;
            const std::size_t p = static_cast<std::size_t>(y) * shape.width + x;
            f.src_x[p] = cx + c * dx - s * dy;
            f.src_y[p] = cy + s * dx + c * dy;
        }
    }
    return f;
}

ImageTensor rotate(const ImageTensor& img, double degrees, Interpolation interp) {
    return clamp01(warp(img, rotation_field(img.shape(), degrees), interp));
}

ImageTensor rotate_backward(const ImageTensor& upstream, double degrees, Interpolation interp) {
    return warp_adjoint(upstream, rotation_field(upstream.shape(), degrees), interp);
}

WarpField swirl_field(Shape shape, double center_x, double center_y, double strength, double radius) {
    if (!(radius > 0.0)) {
        throw std::invalid_argument("swirl: radius must be positive");
    }
    WarpField f{shape, shape.height, shape.width, {}, {}};
    const std::size_t n = static_cast<std::size_t>(shape.height) * shape.width;
    f.src_x.resize(n);
    f.src_y.resize(n);
    const double decay = radius / 5.0 * std::numbers::ln2;
    for (int y = 0; y < shape.height; ++y) {
        for (int x = 0; x < shape.width; ++x) {
            const double dx = x - center_x;
            const double dy = y - center_y;
            const double rho = std::hypot(dx, dy);
            const double angle = strength * std::exp(-rho / decay) + std::atan2(dy, dx);
            const std::size_t p = static_cast<std::size_t>(y) * shape.width + x;
            f.src_x[p] = center_x + rho * std::cos(angle);
            f.src_y[p] = center_y + rho * std::sin(angle);
        }
    }
    return f;
}

WarpField resize_field(Shape input, int out_height, int out_width) {
    if (out_height <= 0 || out_width <= 0) {
        throw std::invalid_argument("resize: output size must be positive");
    }
    WarpField f{input, out_height, out_width, {}, {}};
    const std::size_t n = static_cast<std::size_t>(out_height) * out_width;
    f.src_x.resize(n);
    f.src_y.resize(n);
    const double scale_x = static_cast<double>(input.width) / out_width;
    const double scale_y = static_cast<double>(input.height) / out_height;
    for (int y = 0; y < out_height; ++y) {
        const double sy = std::clamp((y + 0.5) * scale_y - 0.5, 0.0, input.height - 1.0);
        for (int x = 0; x < out_width; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * out_width + x;
            f.src_x[p] = std::clamp((x + 0.5) * scale_x - 0.5, 0.0, input.width - 1.0);
            f.src_y[p] = sy;
        }
    }
    return f;
}

ComplexGrid dft2(const ImageTensor& img) {
    ComplexGrid in{img.shape(), std::vector<std::complex<double>>(img.size())};
    for (std::size_t i = 0; i < img.size(); ++i) {
        in.data[i] = img[i];
    }
    return direct_dft2(in, -1.0);
}

ComplexGrid dft2(const ComplexGrid& grid) {
    return direct_dft2(grid, -1.0);
}

ComplexGrid idft2_complex(const ComplexGrid& coeffs) {
    ComplexGrid out = direct_dft2(coeffs, 1.0);
    const double norm = 1.0 / (static_cast<double>(coeffs.shape.height) * coeffs.shape.width);
    for (auto& v : out.data) {
        v *= norm;
    }
    return out;
}

ImageTensor idft2(const ComplexGrid& coeffs) {
    const ComplexGrid full = idft2_complex(coeffs);
    ImageTensor out(coeffs.shape);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = full.data[i].real();
    }
    return out;
}

Kernel2D gaussian_kernel(int size, double sigma) {
    if (size <= 0 || size % 2 == 0) {
        throw std::invalid_argument("gaussian_kernel: size must be odd and positive");
    }
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("gaussian_kernel: sigma must be positive");
    }
    const int half = size / 2;
    std::vector<double> line(static_cast<std::size_t>(size));
    double total = 0.0;
    for (int i = -half; i <= half; ++i) {
        const double v = std::exp(-0.5 * i * i / (sigma * sigma));
        line[static_cast<std::size_t>(i + half)] = v;
        total += v;
    }
    for (double& v : line) {
        v /= total;
    }
    Kernel2D k{size, size, std::vector<double>(static_cast<std::size_t>(size) * size)};
    for (int r = 0; r < size; ++r) {
        for (int c = 0; c < size; ++c) {
            k.weights[static_cast<std::size_t>(r) * size + c] =
                line[static_cast<std::size_t>(r)] * line[static_cast<std::size_t>(c)];
        }
    }
    return k;
}

Kernel2D box_kernel(int size) {
    if (size <= 0 || size % 2 == 0) {
        throw std::invalid_argument("box_kernel: size must be odd and positive");
    }
    const double v = 1.0 / (static_cast<double>(size) * size);
    return {size, size, std::vector<double>(static_cast<std::size_t>(size) * size, v)};
}

int reflect_index(int i, int n) {
    if (n == 1) {
        return 0;
    }
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0) {
        i += period;
    }
    return i < n ? i : period - i;
}

ImageTensor convolve2(const ImageTensor& img, const Kernel2D& kernel) {
    check_kernel(kernel);
    ImageTensor out(img.shape());
    const int hr = kernel.rows / 2;
    const int hc = kernel.cols / 2;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            for (int c = 0; c < img.channels(); ++c) {
                double acc = 0.0;
                for (int r = 0; r < kernel.rows; ++r) {
                    const int sy = reflect_index(y + r - hr, img.height());
                    for (int q = 0; q < kernel.cols; ++q) {
                        const int sx = reflect_index(x + q - hc, img.width());
                        acc += kernel.at(r, q) * img.at(sy, sx, c);
                    }
                }
                out.at(y, x, c) = acc;
            }
        }
    }
    return out;
}

ImageTensor convolve2_adjoint(const ImageTensor& upstream, const Kernel2D& kernel) {
    check_kernel(kernel);
    ImageTensor grad(upstream.shape());
    const int hr = kernel.rows / 2;
    const int hc = kernel.cols / 2;
    for (int y = 0; y < upstream.height(); ++y) {
        for (int x = 0; x < upstream.width(); ++x) {
            for (int c = 0; c < upstream.channels(); ++c) {
                const double g = upstream.at(y, x, c);
                for (int r = 0; r < kernel.rows; ++r) {
                    const int sy = reflect_index(y + r - hr, upstream.height());
                    for (int q = 0; q < kernel.cols; ++q) {
                        const int sx = reflect_index(x + q - hc, upstream.width());
                        grad.at(sy, sx, c) += kernel.at(r, q) * g;
                    }
                }
            }
        }
    }
    return grad;
}

ImageTensor median_filter(const ImageTensor& img, int size) {
    if (size <= 0 || size % 2 == 0) {
        throw std::invalid_argument("median_filter: size must be odd and positive");
    }
    ImageTensor out(img.shape());
    const int half = size / 2;
    std::vector<double> window(static_cast<std::size_t>(size) * size);
    const auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            for (int c = 0; c < img.channels(); ++c) {
                std::size_t k = 0;
                for (int r = -half; r <= half; ++r) {
                    const int sy = reflect_index(y + r, img.height());
                    for (int q = -half; q <= half; ++q) {
                        window[k++] = img.at(sy, reflect_index(x + q, img.width()), c);
                    }
                }
                std::nth_element(window.begin(), mid, window.end());
                out.at(y, x, c) = *mid;
            }
        }
    }
    return out;
}

} // namespace stochdef
