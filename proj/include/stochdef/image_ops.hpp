#pragma once

#include "stochdef/tensor.hpp"

#include <vector>

namespace stochdef {

enum class Interpolation { nearest, bilinear };

/// Source sampling position for every output pixel of a geometric warp.
/// Positions are in input pixel coordinates (pixel centers at integers).
struct WarpField {
    Shape input_shape{};
    int out_height = 0;
    int out_width = 0;
    std::vector<double> src_x;
    std::vector<double> src_y;

    Shape output_shape() const { return {out_height, out_width, input_shape.channels}; }
};

/// Samples `img` at the field positions. Samples that fall outside the
/// input read as 0.
ImageTensor warp(const ImageTensor& img, const WarpField& field, Interpolation interp);
/// Transpose of `warp` with respect to its input pixels.
ImageTensor warp_adjoint(const ImageTensor& upstream, const WarpField& field, Interpolation interp);

/// Field for a counter-clockwise rotation (as displayed, rows growing
/// downward) about the image center.
WarpField rotation_field(Shape shape, double degrees);
/// Rotates about the image center with zero fill. Degrees must lie in
/// [-180, 180]. Output is clamped to [0, 1].
ImageTensor rotate(const ImageTensor& img, double degrees, Interpolation interp = Interpolation::bilinear);
/// Vector-Jacobian product of `rotate` (the clamp is treated as identity).
ImageTensor rotate_backward(const ImageTensor& upstream, double degrees,
                            Interpolation interp = Interpolation::bilinear);

/// Swirl deformation with the usual radius-to-decay convention
/// (decay length = radius * ln 2 / 5).
WarpField swirl_field(Shape shape, double center_x, double center_y, double strength, double radius);

/// Bilinear resize with edge-clamped sampling (pixel-center alignment).
WarpField resize_field(Shape input, int out_height, int out_width);

ComplexGrid dft2(const ImageTensor& img);
ComplexGrid dft2(const ComplexGrid& grid);
/// Inverse transform, normalized by 1/(H W).
ComplexGrid idft2_complex(const ComplexGrid& coeffs);
/// Real part of the inverse transform.
ImageTensor idft2(const ComplexGrid& coeffs);

/// Odd-sized 2-D real kernel, row-major.
struct Kernel2D {
    int rows = 0;
    int cols = 0;
    std::vector<double> weights;

    double at(int r, int c) const { return weights[static_cast<std::size_t>(r) * cols + c]; }
};

Kernel2D gaussian_kernel(int size, double sigma);
Kernel2D box_kernel(int size);

/// Index into [0, n) with mirror reflection that does not repeat the edge
/// sample (d c b | a b c d -> ... c b a b c ...).
int reflect_index(int i, int n);

/// Per-channel correlation with reflect padding; output has the input shape.
ImageTensor convolve2(const ImageTensor& img, const Kernel2D& kernel);
/// Transpose of `convolve2` with respect to the image.
ImageTensor convolve2_adjoint(const ImageTensor& upstream, const Kernel2D& kernel);

/// Per-channel median over an odd size x size window with reflect padding.
ImageTensor median_filter(const ImageTensor& img, int size);

} // namespace stochdef
