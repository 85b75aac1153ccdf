#pragma once

#include <Eigen/Core>

#include <complex>

namespace vessel {

using ComplexGrid = Eigen::Array<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// In-place 2D DFT (rows then columns). The inverse is scaled by 1/(rows*cols).
void fft2(ComplexGrid& grid, bool inverse = false);

/// Smallest n' >= n whose prime factors are all in {2, 3, 5}.
int fft_friendly_size(int n);

}  // namespace vessel
