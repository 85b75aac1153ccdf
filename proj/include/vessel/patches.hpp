#pragma once

#include "vessel/image.hpp"
#include "vessel/morphology.hpp"

#include <vector>

namespace vessel {

struct PatchSpec {
    int id = 0;
    double cx = 0.0;
    double cy = 0.0;
    int size = 0;                     // square side, pixels, 0 < size <= max
    std::vector<Junction> junctions;  // members
};

/// Square of side `size` around the rounded centre, clipped to the image.
PixelRect patch_rect(const PatchSpec& spec, int image_width, int image_height);

/// Agglomerates junction patches. Starting from one `initial_size` patch per
/// junction, the closest pair of patches is merged while either their centres
/// are closer than half the larger size or two of their junctions are closer
/// than initial_size / 2. A merged patch is centred on its junctions'
/// bounding box, with side max(3 * centre distance, extent + 4) clamped to
/// [initial_size, max_size]; merges whose junctions would not fit are refused.
/// Output is ordered by (cy, cx) and numbered from 0.
std::vector<PatchSpec> build_patches(const std::vector<Junction>& junctions, int initial_size = 10,
                                     int max_size = 100);

}  // namespace vessel
