#pragma once

#include "vessel/kernel.hpp"
#include "vessel/lifting.hpp"
#include "vessel/params.hpp"
#include "vessel/patches.hpp"
#include "vessel/spectral.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vessel {

struct PatchResult {
    PatchSpec spec;
    PixelRect rect;             // clipped crop, absolute pixels
    ClusterParams params;       // as supplied
    KernelParams kernel;        // resolved (H filled in)
    int wavelet_size = 0;       // after fitting to the crop
    double otsu_threshold = 0.0;
    LiftedPointSet points;      // absolute coordinates
    ClusterLabeling labeling;   // one label per point; isolated points are noise
    Eigen::VectorXd eigenvalues;  // of P over the non-isolated points, descending
    int K = 0;
    int n_isolated = 0;         // points with no neighbour in kernel support
    std::string error;          // non-empty when the patch failed

    bool ok() const noexcept { return error.empty(); }
};

/// Intermediate products of one patch, for inspection and debug dumps.
struct PatchTrace {
    Image2D image;
    SoftSegmentation seg;
    BinaryMask mask;
    OrientationScore score;
};

/// Crop, local Otsu, lift, dominant orientations, kernel, affinity and spectral
/// clustering. Throws on degenerate patches (flat soft map, < 2 vessel pixels,
/// crop too small to lift) and on invalid parameters.
PatchResult run_patch(const Image2D& img, const SoftSegmentation& seg, const PatchSpec& spec,
                      const ClusterParams& params, KernelCache& cache, PatchTrace* trace = nullptr);

struct PatchPlan {
    double global_threshold = 0.0;
    BinaryMask skeleton;
    std::vector<Junction> junctions;
    std::vector<PatchSpec> patches;
};

struct PatchingOptions {
    int initial_size = 10;
    int max_size = 100;
};

/// Global Otsu, skeleton, junctions and patches. A flat soft map yields an
/// empty plan.
PatchPlan plan_patches(const Image2D& img, const SoftSegmentation& seg, const PatchingOptions& opts = {});

struct ImageRunOptions {
    PatchingOptions patching;
    ClusterParams defaults;
    std::map<int, ClusterParams> overrides;  // keyed by patch id
    unsigned threads = 0;                   // 0 selects the hardware concurrency

    const ClusterParams& params_for(int patch_id) const;
};

struct ImageRun {
    PatchPlan plan;
    std::vector<PatchResult> results;  // one per patch, by id; failures carry `error`

    std::size_t n_failed() const;
};

ImageRun run_image(const Image2D& img, const SoftSegmentation& seg, const ImageRunOptions& opts, KernelCache& cache);

}  // namespace vessel
