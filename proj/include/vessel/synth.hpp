#pragma once

#include "vessel/image.hpp"

#include <string>
#include <vector>

namespace vessel::synth {

/// Straight segment with an anti-aliased edge: pixel coverage ramps from 1 to
/// 0 as the centre's distance to the segment goes from (width - 1)/2 to
/// (width + 1)/2. Truth marks coverage >= 1/2.
struct Bar {
    double x0, y0, x1, y1;
    double width = 3.0;
    double intensity = 0.3;
};

struct Fixture {
    Image2D image;          // bars on a constant background
    SoftSegmentation seg;   // coverage of the most covering bar
    Raster<int> truth;      // 0 background, else 1 + index of the last bar painted there
    BinaryMask overlap;     // pixels covered by more than one bar
};

/// Later bars are painted over earlier ones.
Fixture render_bars(int width, int height, double background, const std::vector<Bar>& bars);

/// Bar through (cx, cy) at `angle_deg` (from +x towards +y), spanning `length`.
Bar bar_through(double cx, double cy, double angle_deg, double length, double width, double intensity);

/// Two bars of `length` crossing at the image centre; the first (darker) is
/// painted last. Arms stop short of the border by default: bars leaving the
/// crop pick up mirrored copies from the reflect padding of the lift.
Fixture crossing(int size = 25, double angle_a = 25.0, double angle_b = 65.0, double length = 20.0,
                 double width = 3.0, double intensity_a = 0.3, double intensity_b = 0.6, double background = 0.9);

/// Vertical vessel of `length` through the centre with a side branch leaving
/// the centre upwards, `branch_deg` off the vessel axis.
Fixture bifurcation(int size = 25, double branch_deg = 50.0, double length = 20.0, double width = 3.0,
                    double intensity = 0.3, double background = 0.9);

Fixture single_bar(int size = 25, double angle = 30.0, double length = 20.0, double width = 3.0,
                   double intensity = 0.3, double background = 0.9);

/// Two collinear horizontal segments of `segment` pixels separated by `gap`
/// background pixels, with `margin` pixels of background all round.
Fixture broken_bar(int gap, int segment = 12, double width = 1.0, double intensity = 0.3,
                   double background = 0.9, int margin = 10);

/// Two parallel bars of `length`, `separation` pixels apart (centre to centre).
Fixture parallel_bars(int size = 25, double separation = 5.0, double angle = 0.0, double length = 16.0,
                      double width = 2.0, double intensity_a = 0.3, double intensity_b = 0.7,
                      double background = 0.9);

/// 120 x 60 image: an X (bars at 110 and 20 degrees) centred at (30, 30) and a
/// vessel with a side branch at (90, 30). Sized for 25 px initial patches.
Fixture crossing_and_bifurcation();

/// Names accepted by by_name.
const std::vector<std::string>& fixture_names();
Fixture by_name(const std::string& name);

}  // namespace vessel::synth
