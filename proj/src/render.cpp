#include "vessel/render.hpp"

#include "vessel/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace vessel {

namespace {

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

std::array<std::uint8_t, 3> hsv(double h, double s, double v) {
    const double c = v * s;
    const double hp = std::fmod(h, 1.0) * 6.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(hp)) {
        case 0: r = c, g = x; break;
        case 1: r = x, g = c; break;
        case 2: g = c, b = x; break;
        case 3: g = x, b = c; break;
        case 4: r = x, b = c; break;
        default: r = c, b = x; break;
    }
    const double m = v - c;
    return {to_byte(r + m), to_byte(g + m), to_byte(b + m)};
}

void fill_block(RgbImage& out, int x, int y, int scale, const std::array<std::uint8_t, 3>& c) {
    for (int dy = 0; dy < scale; ++dy)
        for (int dx = 0; dx < scale; ++dx) out.set(x * scale + dx, y * scale + dy, c[0], c[1], c[2]);
}

}  // namespace

std::array<std::uint8_t, 3> cluster_colour(int label) {
    static constexpr std::array<std::array<std::uint8_t, 3>, 8> palette = {{
        {230, 25, 75}, {60, 180, 75}, {0, 130, 200}, {245, 130, 48},
        {145, 30, 180}, {70, 240, 240}, {240, 50, 230}, {210, 245, 60},
    }};
    if (label == kNoise) return {128, 128, 128};
    return palette[static_cast<std::size_t>(label - 1) % palette.size()];
}

RgbImage render_overlay(const Image2D& img, const PatchResult& result, int scale) {
    if (scale < 1) throw InvalidArgument("must be >= 1", "scale");
    const PixelRect& r = result.rect;
    RgbImage out(r.width * scale, r.height * scale);
    for (int y = 0; y < r.height; ++y)
        for (int x = 0; x < r.width; ++x) {
            const std::uint8_t g = to_byte(img(r.y + y, r.x + x));
            fill_block(out, x, y, scale, {g, g, g});
        }
    const auto& pts = result.points.points;
    for (std::size_t i = 0; i < pts.size() && i < result.labeling.labels.size(); ++i)
        fill_block(out, pts[i].x - r.x, pts[i].y - r.y, scale, cluster_colour(result.labeling.labels[i]));
    return out;
}

RgbImage render_orientations(const LiftedPointSet& points, const PixelRect& rect, int scale) {
    if (scale < 1) throw InvalidArgument("must be >= 1", "scale");
    RgbImage out(rect.width * scale, rect.height * scale);
    for (const auto& p : points.points)
        fill_block(out, p.x - rect.x, p.y - rect.y, scale, hsv(p.theta / std::numbers::pi, 1.0, 1.0));
    return out;
}

Image2D score_slice(const OrientationScore& score, int k) {
    const Image2D v = -score.slices.at(k).real();
    const double lo = v.minCoeff(), hi = v.maxCoeff();
    if (hi - lo <= 0.0) return Image2D::Constant(v.rows(), v.cols(), 0.5);
    return (v - lo) / (hi - lo);
}

RgbImage render_spectrum(const Eigen::VectorXd& eigenvalues, int tau, double epsilon, int n_show) {
    constexpr int kBar = 12, kGap = 4, kHeight = 240, kMargin = 10;
    const int n = std::min<int>(n_show, static_cast<int>(eigenvalues.size()));
    const int width = std::max(1, n) * (kBar + kGap) + 2 * kMargin;
    RgbImage out(width, kHeight + 2 * kMargin);
    std::fill(out.data.begin(), out.data.end(), std::uint8_t{255});
    auto row_of = [&](double v) { return kMargin + static_cast<int>(std::lround((1.0 - v) * kHeight)); };
    for (int i = 0; i < n; ++i) {
        const double lt = std::pow(std::clamp(eigenvalues(i), 0.0, 1.0), tau);
        const int x0 = kMargin + i * (kBar + kGap);
        for (int y = row_of(lt); y <= row_of(0.0); ++y)
            for (int x = x0; x < x0 + kBar; ++x) out.set(x, y, 0, 90, 180);
    }
    const int line = row_of(1.0 - epsilon);
    for (int x = 0; x < width; ++x) out.set(x, line, 220, 20, 20);
    return out;
}

Image2D kernel_projection(const KernelGrid& grid) {
    Eigen::ArrayXXd proj = grid.max_projection();
    const double peak = proj.maxCoeff();
    Image2D out = proj;
    if (peak > 0.0) out /= peak;
    return out;
}

}  // namespace vessel
