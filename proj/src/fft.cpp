#include "vessel/fft.hpp"

#include <unsupported/Eigen/FFT>

#include <vector>

namespace vessel {

void fft2(ComplexGrid& grid, bool inverse) {
    Eigen::FFT<double> fft;
    const Eigen::Index rows = grid.rows(), cols = grid.cols();

    std::vector<std::complex<double>> in(cols), out(cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) in[c] = grid(r, c);
        inverse ? fft.inv(out, in) : fft.fwd(out, in);
        for (Eigen::Index c = 0; c < cols; ++c) grid(r, c) = out[c];
    }
    in.resize(rows);
    out.resize(rows);
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) in[r] = grid(r, c);
        inverse ? fft.inv(out, in) : fft.fwd(out, in);
        for (Eigen::Index r = 0; r < rows; ++r) grid(r, c) = out[r];
    }
}

int fft_friendly_size(int n) {
    for (int m = std::max(n, 1);; ++m) {
        int k = m;
        for (int p : {2, 3, 5})
            while (k % p == 0) k /= p;
        if (k == 1) return m;
    }
}

}  // namespace vessel
