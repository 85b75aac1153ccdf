#pragma once

#include "vessel/image.hpp"

#include <vector>

namespace vessel {

/// Topology-preserving thinning to a one-pixel-wide, 8-connected skeleton.
/// Border pixels are peeled one direction at a time; a pixel is removed only
/// if it is 8-simple and has at least two foreground neighbours.
BinaryMask skeletonize(const BinaryMask& mask);

/// Component labels (0 = background, 1..count), row-major discovery order.
Raster<int> label_components(const BinaryMask& mask, int connectivity, int* count = nullptr);
int count_components(const BinaryMask& mask, int connectivity = 8);

/// Number of 0 -> 1 transitions around the 8-neighbourhood ring.
int crossing_number(const BinaryMask& mask, int x, int y);

/// Count of set 8-neighbours.
int neighbour_count(const BinaryMask& mask, int x, int y);

struct Junction {
    double x = 0.0;
    double y = 0.0;
};

/// Skeleton pixels with crossing number >= 3; junction pixels within
/// `fuse_distance` (Chebyshev) of each other are fused to their centroid.
/// Sorted by (y, x).
std::vector<Junction> detect_junctions(const BinaryMask& skeleton, double fuse_distance = 2.0);

}  // namespace vessel
