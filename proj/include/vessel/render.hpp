#pragma once

#include "vessel/imageio.hpp"
#include "vessel/kernel.hpp"
#include "vessel/lifting.hpp"
#include "vessel/pipeline.hpp"

namespace vessel {

/// Colour for a cluster id; ids are size ranks, so colours are stable across
/// re-runs. Noise is grey.
std::array<std::uint8_t, 3> cluster_colour(int label);

/// Patch crop in grey with each lifted point painted in its cluster colour,
/// upscaled by `scale` (nearest neighbour).
RgbImage render_overlay(const Image2D& img, const PatchResult& result, int scale = 8);

/// Hue encodes theta in [0, pi); pixels outside the point set are black.
RgbImage render_orientations(const LiftedPointSet& points, const PixelRect& rect, int scale = 8);

/// Re(-U) of one orientation slice, min-max scaled to [0, 1].
Image2D score_slice(const OrientationScore& score, int k);

/// Bars of lambda_i^tau for the leading eigenvalues, with the 1 - epsilon
/// level drawn as a red line.
RgbImage render_spectrum(const Eigen::VectorXd& eigenvalues, int tau, double epsilon, int n_show = 32);

/// Max projection over orientation, scaled so the peak is 1.
Image2D kernel_projection(const KernelGrid& grid);

}  // namespace vessel
