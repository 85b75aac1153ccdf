#pragma once

#include "vessel/config.hpp"
#include "vessel/pipeline.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace vessel {

using Json = nlohmann::ordered_json;

/// Number of leading eigenvalues reported per patch.
inline constexpr int kReportedEigenvalues = 64;

Json params_to_json(const ClusterParams& p);

/// Applies a JSON object of parameter overrides onto `base`. Values may be
/// numbers or numeric strings; unknown keys and bad values throw
/// InvalidArgument naming the key.
ClusterParams params_from_json(const Json& body, ClusterParams base);

Json patch_spec_to_json(const PatchSpec& spec, const PixelRect& rect);

/// Full record of one patch: spec, parameters, spectrum summary, K, cluster
/// sizes and per-point labels as [x, y, orientation index, label].
/// Shared verbatim by the run manifest and the HTTP service.
Json patch_result_to_json(const PatchResult& r);

/// Deterministic manifest: input file names (not paths), image size,
/// junctions and patch results. No timings, no output locations.
Json manifest_to_json(const RunConfig& cfg, const Image2D& img, const ImageRun& run);

/// Writes manifest.json plus per-patch overlay, labels, spectrum and
/// eigenvalue CSV files into `dir`.
void write_run_outputs(const std::filesystem::path& dir, const RunConfig& cfg, const Image2D& img,
                       const ImageRun& run);

/// One "index,lambda,lambda^tau" row per eigenvalue, with a header.
std::string eigenvalues_csv(const Eigen::VectorXd& eigenvalues, int tau);

/// Cluster ids as pixel values over the patch crop: 0 = not a vessel point,
/// 65535 = noise.
Raster<std::uint16_t> label_map(const PatchResult& r);

inline constexpr std::uint16_t kNoisePixel = 65535;

}  // namespace vessel
