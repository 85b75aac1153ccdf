#include "vessel/synth.hpp"

#include "vessel/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace vessel::synth {

namespace {

double segment_distance(double px, double py, const Bar& b) {
    const double vx = b.x1 - b.x0, vy = b.y1 - b.y0;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? ((px - b.x0) * vx + (py - b.y0) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(px - (b.x0 + t * vx), py - (b.y0 + t * vy));
}

constexpr double kDeg = std::numbers::pi / 180.0;

}  // namespace

Fixture render_bars(int width, int height, double background, const std::vector<Bar>& bars) {
    if (width < 1 || height < 1) throw InvalidArgument("image must be non-empty", "size");
    Fixture f;
    f.image = Image2D::Constant(height, width, background);
    f.seg = SoftSegmentation::Zero(height, width);
    f.truth = Raster<int>::Zero(height, width);
    f.overlap = BinaryMask::Zero(height, width);
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const Bar& b = bars[i];
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                // Linear ramp over one pixel across the bar's edge.
                const double cover = std::clamp(0.5 * b.width + 0.5 - segment_distance(x, y, b), 0.0, 1.0);
                if (cover <= 0.0) continue;
                f.image(y, x) += (b.intensity - f.image(y, x)) * cover;
                if (cover < 0.5) continue;
                f.seg(y, x) = 1.0;
                if (f.truth(y, x) != 0) f.overlap(y, x) = true;
                f.truth(y, x) = static_cast<int>(i) + 1;
            }
    }
    return f;
}

Bar bar_through(double cx, double cy, double angle_deg, double length, double width, double intensity) {
    const double c = std::cos(angle_deg * kDeg), s = std::sin(angle_deg * kDeg);
    const double h = 0.5 * length;
    return {cx - h * c, cy - h * s, cx + h * c, cy + h * s, width, intensity};
}

Fixture crossing(int size, double angle_a, double angle_b, double length, double width, double intensity_a,
                 double intensity_b, double background) {
    const double c = 0.5 * (size - 1);
    return render_bars(size, size, background,
                       {bar_through(c, c, angle_b, length, width, intensity_b),
                        bar_through(c, c, angle_a, length, width, intensity_a)});
}

Fixture bifurcation(int size, double branch_deg, double length, double width, double intensity, double background) {
    const double c = 0.5 * (size - 1);
    const double h = 0.5 * length;
    const double a = (-90.0 + branch_deg) * kDeg;
    return render_bars(size, size, background,
                       {{c, c - h, c, c + h, width, intensity},
                        {c, c, c + h * std::cos(a), c + h * std::sin(a), width, intensity}});
}

Fixture single_bar(int size, double angle, double length, double width, double intensity, double background) {
    const double c = 0.5 * (size - 1);
    return render_bars(size, size, background, {bar_through(c, c, angle, length, width, intensity)});
}

Fixture broken_bar(int gap, int segment, double width, double intensity, double background, int margin) {
    if (gap < 0) throw InvalidArgument("must be >= 0", "gap");
    if (segment < 1) throw InvalidArgument("must be >= 1", "segment");
    const int w = 2 * margin + 2 * segment + gap;
    const int h = 2 * margin + 1 + static_cast<int>(std::ceil(width));
    const double y = 0.5 * (h - 1);
    const double a0 = margin, a1 = margin + segment - 1;
    const double b0 = a1 + gap + 1, b1 = b0 + segment - 1;
    return render_bars(w, h, background, {{a0, y, a1, y, width, intensity}, {b0, y, b1, y, width, intensity}});
}

Fixture parallel_bars(int size, double separation, double angle, double length, double width,
                      double intensity_a, double intensity_b, double background) {
    const double c = 0.5 * (size - 1);
    const double nx = -std::sin(angle * kDeg), ny = std::cos(angle * kDeg);
    const double h = 0.5 * separation;
    return render_bars(size, size, background,
                       {bar_through(c - h * nx, c - h * ny, angle, length, width, intensity_a),
                        bar_through(c + h * nx, c + h * ny, angle, length, width, intensity_b)});
}

Fixture crossing_and_bifurcation() {
    constexpr int w = 120, h = 60;
    const double cx1 = 30, cx2 = 90, cy = 30;
    const double a = (-90.0 + 50.0) * kDeg;
    return render_bars(w, h, 0.9,
                       {bar_through(cx1, cy, 110.0, 40.0, 3.0, 0.6), bar_through(cx1, cy, 20.0, 40.0, 3.0, 0.3),
                        {cx2, cy - 20.0, cx2, cy + 20.0, 3.0, 0.3},
                        {cx2, cy, cx2 + 20.0 * std::cos(a), cy + 20.0 * std::sin(a), 3.0, 0.3}});
}

const std::vector<std::string>& fixture_names() {
    static const std::vector<std::string> names = {"crossing", "bifurcation", "bar", "broken", "parallel", "composite"};
    return names;
}

Fixture by_name(const std::string& name) {
    if (name == "crossing") return crossing();
    if (name == "bifurcation") return bifurcation();
    if (name == "bar") return single_bar();
    if (name == "broken") return broken_bar(3);
    if (name == "parallel") return parallel_bars();
    if (name == "composite") return crossing_and_bifurcation();
    throw InvalidArgument("unknown fixture '" + name + "'", "fixture");
}

}  // namespace vessel::synth
