#pragma once

#include "vessel/kernel.hpp"
#include "vessel/lifting.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace vessel {

/// Everything that controls the analysis of one patch. Keys accepted by set()
/// are the member names; `n` is an alias of n_paths.
struct ClusterParams {
    int H = 0;                        // path steps; 0 selects round(patch size / 3)
    double sigma = 0.05;              // angular diffusion
    double sigma2 = 0.3;              // intensity bandwidth
    double epsilon = 0.1;
    int tau = 150;
    int min_size = 5;
    std::uint64_t n_paths = 100000;
    int n_theta = 24;                 // shared by the wavelets and the kernel
    double delta_s = 1.0;
    int grid_radius = 0;              // 0 selects ceil(H * delta_s)
    std::uint64_t seed = kDefaultSeed;
    int wavelet_size = 21;            // upper bound; shrunk to fit small patches
    int spline_order = 3;
    double inflection = 0.8;

    /// Throws InvalidArgument naming the first offending field.
    void validate() const;

    int resolved_H(int patch_size) const;
    KernelParams kernel_params(int patch_size) const;
    IntensityParams intensity() const { return {sigma2}; }
    CakeWaveletParams wavelet_params(int size) const;

    /// Parses and assigns one field; unknown keys and malformed or
    /// out-of-range values throw InvalidArgument naming the key.
    void set(const std::string& key, const std::string& value);

    /// (key, value) pairs in canonical order, values formatted to round-trip.
    std::vector<std::pair<std::string, std::string>> entries() const;
};

bool operator==(const ClusterParams& a, const ClusterParams& b);

/// Names accepted by ClusterParams::set, canonical order.
const std::vector<std::string>& cluster_param_keys();

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace vessel
