#include "vessel/pipeline.hpp"

#include "vessel/error.hpp"
#include "vessel/imageio.hpp"
#include "vessel/morphology.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace vessel {

namespace {

template <typename S>
Raster<S> crop(const Raster<S>& src, const PixelRect& r) {
    return src.block(r.y, r.x, r.height, r.width);
}

int largest_odd_at_most(int n) { return n % 2 == 1 ? n : n - 1; }

}  // namespace

PatchResult run_patch(const Image2D& img, const SoftSegmentation& seg, const PatchSpec& spec,
                      const ClusterParams& params, KernelCache& cache, PatchTrace* trace) {
    params.validate();
    if (!same_shape(img, seg)) throw InvalidArgument("image and segmentation differ in size", "seg");

    PatchResult out;
    out.spec = spec;
    out.params = params;
    out.rect = patch_rect(spec, static_cast<int>(img.cols()), static_cast<int>(img.rows()));
    if (out.rect.empty()) throw InvalidArgument("patch lies outside the image", "patch");
    const PixelRect& r = out.rect;

    const Image2D patch = crop(img, r);
    const SoftSegmentation soft = crop(seg, r);
    const OtsuLevel level = otsu_level(soft);
    out.otsu_threshold = level.threshold;
    const BinaryMask mask = otsu_threshold(soft);
    if (mask.count() < 2) throw DegenerateInput("fewer than 2 vessel pixels in patch");

    out.wavelet_size = std::min(params.wavelet_size, largest_odd_at_most(std::min(r.width, r.height)));
    if (out.wavelet_size < 7)
        throw DegenerateInput("patch " + std::to_string(r.width) + "x" + std::to_string(r.height) +
                              " is too small to lift");
    const WaveletStack stack = build_cake_wavelets(params.wavelet_params(out.wavelet_size));
    OrientationScore score = lift(patch, stack);
    LiftedPointSet local = dominant_orientations(score, mask, patch);

    out.kernel = params.kernel_params(spec.size);
    const auto grid = cache.get(out.kernel);
    const AffinityMatrix a = build_affinity(local, *grid, params.intensity());

    // Points with no neighbour inside the kernel support have an all-zero row.
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        if (a(i, i) > 0.0) keep.push_back(i);
    out.n_isolated = static_cast<int>(a.rows()) - static_cast<int>(keep.size());

    out.labeling.min_size = params.min_size;
    out.labeling.labels.assign(local.size(), kNoise);
    if (!keep.empty()) {
        const auto n = static_cast<Eigen::Index>(keep.size());
        AffinityMatrix sub(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) sub(i, j) = a(keep[i], keep[j]);
        auto [spectrum, labeling] = spectral_clustering(sub, params.tau, params.epsilon, params.min_size);
        out.eigenvalues = spectrum.eigenvalues;
        out.K = spectrum.K;
        out.labeling.sizes = labeling.sizes;
        for (Eigen::Index i = 0; i < n; ++i) out.labeling.labels[keep[i]] = labeling.labels[i];
    }

    out.points = local;
    for (auto& p : out.points.points) {
        p.x += r.x;
        p.y += r.y;
    }
    if (trace) {
        trace->image = patch;
        trace->seg = soft;
        trace->mask = mask;
        trace->score = std::move(score);
    }
    return out;
}

PatchPlan plan_patches(const Image2D& img, const SoftSegmentation& seg, const PatchingOptions& opts) {
    validate_unit_image(img, "image");
    validate_unit_image(seg, "seg");
    if (!same_shape(img, seg)) throw InvalidArgument("image and segmentation differ in size", "seg");

    PatchPlan plan;
    plan.skeleton = BinaryMask::Zero(seg.rows(), seg.cols());
    if (seg.maxCoeff() == seg.minCoeff()) return plan;
    const OtsuLevel level = otsu_level(seg);
    plan.global_threshold = level.threshold;
    const BinaryMask mask = otsu_threshold(seg);
    if (!mask.any()) return plan;
    plan.skeleton = skeletonize(mask);
    plan.junctions = detect_junctions(plan.skeleton);
    plan.patches = build_patches(plan.junctions, opts.initial_size, opts.max_size);
    return plan;
}

const ClusterParams& ImageRunOptions::params_for(int patch_id) const {
    const auto it = overrides.find(patch_id);
    return it == overrides.end() ? defaults : it->second;
}

std::size_t ImageRun::n_failed() const {
    return static_cast<std::size_t>(std::count_if(results.begin(), results.end(), [](const PatchResult& r) {
        return !r.ok();
    }));
}

ImageRun run_image(const Image2D& img, const SoftSegmentation& seg, const ImageRunOptions& opts, KernelCache& cache) {
    opts.defaults.validate();
    for (const auto& [id, p] : opts.overrides) p.validate();

    ImageRun run;
    run.plan = plan_patches(img, seg, opts.patching);
    const auto& patches = run.plan.patches;
    run.results.resize(patches.size());

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < patches.size(); i = next++) {
            try {
                run.results[i] = run_patch(img, seg, patches[i], opts.params_for(patches[i].id), cache);
            } catch (const std::exception& e) {
                PatchResult failed;
                failed.spec = patches[i];
                failed.params = opts.params_for(patches[i].id);
                failed.rect = patch_rect(patches[i], static_cast<int>(img.cols()), static_cast<int>(img.rows()));
                failed.error = e.what();
                run.results[i] = std::move(failed);
            }
        }
    };
    unsigned n_threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
    n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, patches.size()));
    if (n_threads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    return run;
}

}  // namespace vessel
