#include "vessel/lifting.hpp"

#include "vessel/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace vessel {

using std::numbers::pi;

namespace {

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Angle wrapped into [-pi, pi).
double wrap_angle(double a) {
    a = std::fmod(a + pi, 2.0 * pi);
    if (a < 0) a += 2.0 * pi;
    return a - pi;
}

// Taylor-truncated Gaussian: exp(-x) * sum_{i<=order} x^i / i!, x = rho^2 / t.
double radial_window(double rho, double inflection, int order) {
    const double t = 2.0 * inflection * inflection / (2.0 * order + 1.0);
    const double x = rho * rho / t;
    double term = 1.0, sum = 1.0;
    for (int i = 1; i <= order; ++i) {
        term *= x / i;
        sum += term;
    }
    return std::exp(-x) * sum;
}

// Moves a centred grid into DFT order (index 0 = DC) and back.
ComplexGrid centred_to_dft(const ComplexGrid& c) {
    const Eigen::Index n = c.rows(), r = n / 2;
    ComplexGrid out(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) out((i - r + n) % n, (j - r + n) % n) = c(i, j);
    return out;
}

ComplexGrid dft_to_centred(const ComplexGrid& d) {
    const Eigen::Index n = d.rows(), r = n / 2;
    ComplexGrid out(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) out(i, j) = d((i - r + n) % n, (j - r + n) % n);
    return out;
}

// Frequency radius in Nyquist units for centred index offsets (u, v) on an n-grid.
double nyquist_radius(Eigen::Index u, Eigen::Index v, Eigen::Index n) {
    const double wx = 2.0 * static_cast<double>(u) / static_cast<double>(n);
    const double wy = 2.0 * static_cast<double>(v) / static_cast<double>(n);
    return std::hypot(wx, wy);
}

// Largest band [0, rho] over which the radial window stays within 1e-3 of one.
double tiling_band(double inflection, int order) {
    double lo = 0.0, hi = inflection;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (1.0 - radial_window(mid, inflection, order) <= 5e-4 ? lo : hi) = mid;
    }
    return lo;
}

// Smallest odd n' >= n whose prime factors are all in {3, 5, 7}. An odd
// centred grid is closed under quarter turns, so the stack is exactly
// covariant under 90 degree rotations.
Eigen::Index odd_fft_size(Eigen::Index n) {
    for (Eigen::Index m = n | 1;; m += 2) {
        Eigen::Index r = m;
        for (Eigen::Index f : {3, 5, 7})
            while (r % f == 0) r /= f;
        if (r == 1) return m;
    }
}

int reflect101(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * n - 2;
    int m = i % period;
    if (m < 0) m += period;
    return m >= n ? period - m : m;
}

}  // namespace

double bspline(int order, double x) {
    const double half = 0.5 * (order + 1);
    if (order == 0) return x >= -0.5 && x < 0.5 ? 1.0 : 0.0;
    if (x <= -half || x >= half) return 0.0;
    double sum = 0.0;
    double fact = 1.0;
    for (int i = 2; i <= order; ++i) fact *= i;
    for (int i = 0; i <= order + 1; ++i) {
        const double t = x + half - i;
        if (t > 0) sum += ((i % 2) ? -1.0 : 1.0) * binomial(order + 1, i) * std::pow(t, order);
    }
    return sum / fact;
}

WaveletStack::WaveletStack(std::vector<ComplexGrid> spatial, std::vector<ComplexGrid> fourier, double angle_offset,
                           double annulus_high)
    : spatial_(std::move(spatial)),
      fourier_(std::move(fourier)),
      angle_offset_(angle_offset),
      annulus_high_(annulus_high) {}

double WaveletStack::orientation(int k) const noexcept { return angle_offset_ + k * pi / n_orientations(); }

WaveletStack build_cake_wavelets(const CakeWaveletParams& p) {
    if (p.n_orientations < 4 || p.n_orientations % 2 != 0)
        throw InvalidArgument("must be even and >= 4", "n_orientations");
    if (p.size % 2 == 0) throw InvalidArgument("must be odd", "size");
    if (p.size < 7) throw InvalidArgument("too small to hold the angular wedge (< 7)", "size");
    if (p.spline_order < 0 || 0.5 * (p.spline_order + 1) >= p.n_orientations)
        throw InvalidArgument("wedge support exceeds half the circle", "spline_order");
    if (!(p.inflection > 0.0)) throw InvalidArgument("must be positive", "inflection");
    if (p.radial_order < 1) throw InvalidArgument("must be >= 1", "radial_order");

    const int n = p.n_orientations;
    const Eigen::Index size = p.size, r = size / 2;
    const double step = pi / n;
    // Wedges are drawn on an oversampled frequency grid so that low
    // frequencies are resolved in angle, then cut to size in space under a
    // Gaussian window.
    const Eigen::Index big = odd_fft_size(std::max<int>(p.oversample * p.size, 64));
    const Eigen::Index br = big / 2;
    const double ws = p.window_sigma * static_cast<double>(size);

    std::vector<ComplexGrid> spatial, fourier;
    spatial.reserve(n);
    fourier.reserve(n);
    for (int k = 0; k < n; ++k) {
        // The Fourier wedge sits perpendicular to the kernel's spatial orientation.
        const double centre = p.angle_offset + k * step + 0.5 * pi;
        ComplexGrid hat(big, big);
        for (Eigen::Index i = 0; i < big; ++i) {
            for (Eigen::Index j = 0; j < big; ++j) {
                const Eigen::Index v = i - br, u = j - br;
                if (u == 0 && v == 0) {
                    hat(i, j) = 1.0 / n;
                    continue;
                }
                const double phi = std::atan2(static_cast<double>(v), static_cast<double>(u));
                const double wedge = bspline(p.spline_order, wrap_angle(phi - centre) / step);
                hat(i, j) = 2.0 * wedge * radial_window(nyquist_radius(u, v, big), p.inflection, p.radial_order);
            }
        }
        ComplexGrid psi = centred_to_dft(hat);
        fft2(psi, true);
        const ComplexGrid full = dft_to_centred(psi);
        ComplexGrid cut(size, size);
        Eigen::ArrayXXd window(size, size);
        for (Eigen::Index i = 0; i < size; ++i)
            for (Eigen::Index j = 0; j < size; ++j) {
                const double d2 = static_cast<double>((i - r) * (i - r) + (j - r) * (j - r));
                window(i, j) = ws > 0.0 ? std::exp(-0.5 * d2 / (ws * ws)) : 1.0;
                cut(i, j) = full(br - r + i, br - r + j) * window(i, j);
            }
        // Cropping shifts the DC gain slightly; restore it to exactly 1/N with
        // a multiple of the window so flat regions tie across orientations.
        const std::complex<double> dc_error = 1.0 / n - cut.sum();
        cut += dc_error * (window / window.sum()).cast<std::complex<double>>();
        ComplexGrid cut_hat = centred_to_dft(cut);
        fft2(cut_hat, false);
        fourier.push_back(dft_to_centred(cut_hat));
        spatial.push_back(std::move(cut));
    }
    return WaveletStack(std::move(spatial), std::move(fourier), p.angle_offset,
                        tiling_band(p.inflection, p.radial_order));
}

WaveletStack build_gabor_wavelets(int n_orientations, int size, double wavelength, double envelope_sigma) {
    if (n_orientations < 4 || n_orientations % 2 != 0)
        throw InvalidArgument("must be even and >= 4", "n_orientations");
    if (size % 2 == 0 || size < 7) throw InvalidArgument("must be odd and >= 7", "size");
    if (!(wavelength > 0.0) || !(envelope_sigma > 0.0)) throw InvalidArgument("must be positive", "gabor");

    const Eigen::Index r = size / 2;
    std::vector<ComplexGrid> spatial, fourier;
    for (int k = 0; k < n_orientations; ++k) {
        const double theta = k * pi / n_orientations;
        const double c = std::cos(theta), s = std::sin(theta);
        ComplexGrid psi(size, size);
        for (Eigen::Index i = 0; i < size; ++i) {
            for (Eigen::Index j = 0; j < size; ++j) {
                const double x = static_cast<double>(j - r), y = static_cast<double>(i - r);
                const double along = c * x + s * y;
                const double across = -s * x + c * y;
                const double env = std::exp(-(along * along / 4.0 + across * across) /
                                            (2.0 * envelope_sigma * envelope_sigma));
                psi(i, j) = env * std::polar(1.0, 2.0 * pi * across / wavelength);
            }
        }
        psi -= psi.real().mean();
        ComplexGrid hat = centred_to_dft(psi);
        fft2(hat, false);
        spatial.push_back(psi);
        fourier.push_back(dft_to_centred(hat));
    }
    return WaveletStack(std::move(spatial), std::move(fourier), 0.0, 0.0);
}

Eigen::ArrayXXd fourier_coverage(const WaveletStack& stack) {
    const Eigen::Index n = stack.size();
    Eigen::ArrayXXd cover = Eigen::ArrayXXd::Zero(n, n);
    for (int k = 0; k < stack.n_orientations(); ++k) {
        const ComplexGrid& hat = stack.fourier(k);
        // Real part of psi has transform (hat(w) + conj(hat(-w))) / 2.
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                cover(i, j) += 0.5 * (hat(i, j) + std::conj(hat(n - 1 - i, n - 1 - j))).real();
    }
    return cover;
}

double coverage_deviation(const WaveletStack& stack) {
    const Eigen::ArrayXXd cover = fourier_coverage(stack);
    const Eigen::Index n = stack.size(), r = n / 2;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (nyquist_radius(j - r, i - r, n) <= stack.annulus_high())
                worst = std::max(worst, std::abs(cover(i, j) - 1.0));
    return worst;
}

OrientationScore lift(const Image2D& img, const WaveletStack& stack) {
    const int ksize = stack.size(), r = stack.radius();
    const int h = static_cast<int>(img.rows()), w = static_cast<int>(img.cols());
    if (h < ksize || w < ksize)
        throw InvalidArgument("image (" + std::to_string(w) + "x" + std::to_string(h) + ") smaller than kernel size " +
                                  std::to_string(ksize),
                              "image");

    const int ph = fft_friendly_size(h + 2 * r);
    const int pw = fft_friendly_size(w + 2 * r);
    ComplexGrid spectrum(ph, pw);
    for (int y = 0; y < ph; ++y)
        for (int x = 0; x < pw; ++x) spectrum(y, x) = img(reflect101(y - r, h), reflect101(x - r, w));
    fft2(spectrum, false);

    OrientationScore score;
    score.slices.reserve(stack.n_orientations());
    for (int k = 0; k < stack.n_orientations(); ++k) {
        const ComplexGrid& psi = stack.spatial(k);
        ComplexGrid kern = ComplexGrid::Zero(ph, pw);
        for (int dy = -r; dy <= r; ++dy)
            for (int dx = -r; dx <= r; ++dx) kern((dy + ph) % ph, (dx + pw) % pw) = psi(r + dy, r + dx);
        fft2(kern, false);
        ComplexGrid prod = spectrum * kern.conjugate();
        fft2(prod, true);
        score.slices.push_back(prod.block(r, r, h, w));
    }
    return score;
}

LiftedPointSet dominant_orientations(const OrientationScore& score, const BinaryMask& mask, const Image2D& img) {
    if (score.slices.empty()) throw InvalidArgument("empty orientation score", "score");
    if (mask.rows() != score.height() || mask.cols() != score.width() || !same_shape(mask, img))
        throw InvalidArgument("dimension mismatch between score, mask and image", "mask");

    const int n = score.n_orientations();
    LiftedPointSet out;
    out.n_orientations = n;
    std::vector<double> response(n);
    for (Eigen::Index y = 0; y < mask.rows(); ++y) {
        for (Eigen::Index x = 0; x < mask.cols(); ++x) {
            if (!mask(y, x)) continue;
            double best = -std::numeric_limits<double>::infinity(), scale = 0.0;
            for (int k = 0; k < n; ++k) {
                response[k] = -score.slices[k](y, x).real();
                best = std::max(best, response[k]);
                scale = std::max(scale, std::abs(response[k]));
            }
            // Values equal up to round-off count as ties.
            const double tol = 1e-10 * scale + 1e-14;
            int arg = 0;
            while (response[arg] < best - tol) ++arg;
            out.points.push_back({static_cast<int>(x), static_cast<int>(y), arg, arg * pi / n, img(y, x)});
        }
    }
    return out;
}

}  // namespace vessel
