#include "vessel/error.hpp"
#include "vessel/imageio.hpp"

#include <algorithm>
#include <cmath>

namespace vessel {

namespace {

constexpr double kStdFloor = 1e-6;

// Summed-area table over an edge-replicated copy, so every window is full size.
Eigen::ArrayXXd replicated_integral(const Eigen::ArrayXXd& src, int radius) {
    const Eigen::Index h = src.rows(), w = src.cols();
    Eigen::ArrayXXd sat = Eigen::ArrayXXd::Zero(h + 2 * radius + 1, w + 2 * radius + 1);
    for (Eigen::Index y = 0; y < h + 2 * radius; ++y) {
        const Eigen::Index sy = std::clamp<Eigen::Index>(y - radius, 0, h - 1);
        double run = 0.0;
        for (Eigen::Index x = 0; x < w + 2 * radius; ++x) {
            const Eigen::Index sx = std::clamp<Eigen::Index>(x - radius, 0, w - 1);
            run += src(sy, sx);
            sat(y + 1, x + 1) = sat(y, x + 1) + run;
        }
    }
    return sat;
}

double window_sum(const Eigen::ArrayXXd& sat, Eigen::Index y, Eigen::Index x, int window) {
    return sat(y + window, x + window) - sat(y, x + window) - sat(y + window, x) + sat(y, x);
}

}  // namespace

Image2D normalize_luminosity(const Image2D& img, int window) {
    validate_unit_image(img);
    if (window < 3 || window % 2 == 0) throw InvalidArgument("must be odd and >= 3", "window");
    if (window > img.rows() && window > img.cols())
        throw InvalidArgument("larger than both image dimensions", "window");

    // Centering first keeps the result independent of a constant offset.
    const Eigen::ArrayXXd centered = img - img.mean();
    const int radius = window / 2;
    const Eigen::ArrayXXd sum = replicated_integral(centered, radius);
    const Eigen::ArrayXXd sum_sq = replicated_integral(centered.square(), radius);
    const double area = static_cast<double>(window) * window;

    Eigen::ArrayXXd z(img.rows(), img.cols());
    for (Eigen::Index y = 0; y < img.rows(); ++y) {
        for (Eigen::Index x = 0; x < img.cols(); ++x) {
            const double mean = window_sum(sum, y, x, window) / area;
            const double var = std::max(0.0, window_sum(sum_sq, y, x, window) / area - mean * mean);
            z(y, x) = (centered(y, x) - mean) / std::max(std::sqrt(var), kStdFloor);
        }
    }

    // A sample's z-score within its own window never exceeds sqrt(n - 1), so
    // this fixed map lands in [0, 1] and does not depend on distant pixels.
    const double bound = std::sqrt(area - 1.0);
    Image2D out = (0.5 + z / (2.0 * bound)).max(0.0).min(1.0);
    return out;
}

}  // namespace vessel
