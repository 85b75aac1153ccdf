#pragma once

#include "vessel/fft.hpp"
#include "vessel/image.hpp"

#include <vector>

namespace vessel {

struct CakeWaveletParams {
    int n_orientations = 24;
    int size = 21;            // odd spatial support, pixels
    int spline_order = 3;     // angular B-spline order
    double inflection = 0.8;  // radial window inflection point, fraction of Nyquist
    int radial_order = 8;     // order of the Taylor-truncated Gaussian radial window
    double angle_offset = 0.0;
    int oversample = 8;         // frequency grid side = oversample * size (at least 64)
    double window_sigma = 0.4;  // spatial Gaussian window, fraction of size; 0 disables
};

/// π-periodic stack of orientation-selective wavelets. Orientation k sits at
/// angle offset + k·π/N, measured from +x towards +y in pixel coordinates.
class WaveletStack {
public:
    WaveletStack(std::vector<ComplexGrid> spatial, std::vector<ComplexGrid> fourier, double angle_offset,
                 double annulus_high);

    int n_orientations() const noexcept { return static_cast<int>(spatial_.size()); }
    int size() const noexcept { return static_cast<int>(spatial_.front().rows()); }
    int radius() const noexcept { return size() / 2; }
    double orientation(int k) const noexcept;

    /// Spatial kernel, centred: element (r + dy, r + dx) holds psi(dx, dy).
    const ComplexGrid& spatial(int k) const { return spatial_.at(k); }
    /// DFT of the spatial kernel on the centred frequency grid (same indexing).
    const ComplexGrid& fourier(int k) const { return fourier_.at(k); }

    /// Upper radius (fraction of Nyquist) of the band where the stack tiles the
    /// Fourier plane; the band starts at DC.
    double annulus_high() const noexcept { return annulus_high_; }

private:
    std::vector<ComplexGrid> spatial_;
    std::vector<ComplexGrid> fourier_;
    double angle_offset_;
    double annulus_high_;
};

WaveletStack build_cake_wavelets(const CakeWaveletParams& params);

inline WaveletStack build_cake_wavelets(int n_orientations, int size, int spline_order = 3,
                                        double inflection = 0.8) {
    return build_cake_wavelets(CakeWaveletParams{n_orientations, size, spline_order, inflection});
}

/// Gabor comparison stack (ridge-tuned carrier across the orientation). Not
/// part of the validated path; offered for side-by-side inspection only.
WaveletStack build_gabor_wavelets(int n_orientations, int size, double wavelength, double envelope_sigma);

/// Sum over orientations of the frequency response of each kernel's real
/// (even) part, on the centred frequency grid. Equals 1 where the stack tiles.
Eigen::ArrayXXd fourier_coverage(const WaveletStack& stack);

/// Largest |coverage - 1| over the band [0, annulus_high].
double coverage_deviation(const WaveletStack& stack);

/// Cardinal centred B-spline of the given order.
double bspline(int order, double x);

struct OrientationScore {
    std::vector<ComplexGrid> slices;  // one (height x width) grid per orientation
    int n_orientations() const noexcept { return static_cast<int>(slices.size()); }
    Eigen::Index height() const { return slices.empty() ? 0 : slices.front().rows(); }
    Eigen::Index width() const { return slices.empty() ? 0 : slices.front().cols(); }
};

/// Correlates the image with every (conjugated) kernel of the stack, using
/// reflect-101 padding and FFTs. Requires both image sides >= the kernel size.
OrientationScore lift(const Image2D& img, const WaveletStack& stack);

struct LiftedPoint {
    int x = 0;
    int y = 0;
    int orientation = 0;  // index on the N_theta grid
    double theta = 0.0;   // radians in [0, pi)
    double intensity = 0.0;
};

struct LiftedPointSet {
    std::vector<LiftedPoint> points;
    int n_orientations = 0;

    std::size_t size() const noexcept { return points.size(); }
    bool empty() const noexcept { return points.empty(); }
};

/// Per mask pixel (row-major order): theta_d = argmax_k Re(-U(x, y, k)),
/// ties towards the smaller k; intensity read from `img`.
LiftedPointSet dominant_orientations(const OrientationScore& score, const BinaryMask& mask, const Image2D& img);

}  // namespace vessel
