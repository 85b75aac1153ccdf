#pragma once

#include <Eigen/Core>

#include <cstddef>

namespace vessel {

/// Row-major raster indexed as (row, col) == (y, x).
template <typename Scalar>
using Raster = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Grayscale intensities in [0, 1].
using Image2D = Raster<double>;

/// Per-pixel vessel likelihood in [0, 1]; same shape as its paired Image2D.
using SoftSegmentation = Raster<double>;

using BinaryMask = Raster<bool>;

struct PixelRect {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;

    bool contains(int px, int py) const noexcept {
        return px >= x && px < x + width && py >= y && py < y + height;
    }
    bool empty() const noexcept { return width <= 0 || height <= 0; }
};

/// Throws InvalidArgument unless `img` is non-empty with finite values in [0, 1].
void validate_unit_image(const Image2D& img, const char* what = "image");

template <typename A, typename B>
bool same_shape(const Eigen::ArrayBase<A>& a, const Eigen::ArrayBase<B>& b) {
    return a.rows() == b.rows() && a.cols() == b.cols();
}

}  // namespace vessel
