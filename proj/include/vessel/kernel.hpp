#pragma once

#include "vessel/lifting.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

namespace vessel {

inline constexpr std::uint64_t kDefaultSeed = 20160208;

struct KernelParams {
    int H = 7;                        // steps per path
    std::uint64_t n_paths = 100000;
    double sigma = 0.05;              // angular diffusion per step: dtheta = delta_s * N(0, sigma)
    double delta_s = 1.0;             // step length, pixels
    int n_theta = 24;                 // orientation bins over [0, pi); the kernel stores 2*n_theta over [0, 2pi)
    int grid_radius = 0;              // pixels; 0 selects ceil(H * delta_s)
    std::uint64_t seed = kDefaultSeed;

    int effective_radius() const;
    void validate() const;
    std::vector<std::string> warnings() const;
};

bool operator==(const KernelParams& a, const KernelParams& b);

/// FNV-1a over the canonical parameter encoding; names cache files.
std::uint64_t params_hash(const KernelParams& p);

/// Path histogram of the forward direction process started at (0, 0, 0).
/// Bins: 1 px in x and y over [-R, R], pi/n_theta in angle over [0, 2pi).
class KernelGrid {
public:
    KernelGrid(const KernelParams& params, std::vector<double> counts);

    const KernelParams& params() const noexcept { return params_; }
    int radius() const noexcept { return radius_; }
    int angle_bins() const noexcept { return angle_bins_; }
    const std::vector<double>& histogram() const noexcept { return counts_; }
    double total_mass() const noexcept { return total_; }

    /// Raw count at an integer bin; zero outside the grid.
    double count(int dx, int dy, int dtheta) const noexcept;

    /// Directed kernel value: path visits per launched path at the bin.
    double gamma(int dx, int dy, int dtheta) const noexcept;

    std::size_t index(int dx, int dy, int dtheta) const noexcept {
        const int side = 2 * radius_ + 1;
        return (static_cast<std::size_t>(dy + radius_) * side + static_cast<std::size_t>(dx + radius_)) * angle_bins_ +
               static_cast<std::size_t>(dtheta);
    }

    double cos_bin(int b) const noexcept { return cos_[b]; }
    double sin_bin(int b) const noexcept { return sin_[b]; }

    /// Max over the angle axis, (2R+1) x (2R+1), row = dy, col = dx.
    Eigen::ArrayXXd max_projection() const;

private:
    KernelParams params_;
    int radius_;
    int angle_bins_;
    std::vector<double> counts_;
    double total_;
    std::vector<double> cos_, sin_;
};

KernelGrid estimate_kernel(const KernelParams& params);

/// Nearest bin with half-way cases rounded up; stable under 1e-12 perturbations.
inline int nearest_bin(double v) noexcept { return static_cast<int>(std::floor(v + 0.5 + 1e-9)); }

/// Pose on the shared grids: position in pixels, orientation in units of
/// pi/n_theta (any integer; reduced modulo 2*n_theta).
struct Pose {
    double x = 0.0;
    double y = 0.0;
    int orientation = 0;
};

inline Pose pose_of(const LiftedPoint& p) { return {static_cast<double>(p.x), static_cast<double>(p.y), p.orientation}; }

/// Directed Gamma_1(from -> to): `to` expressed in the frame of `from`.
double gamma1(const KernelGrid& grid, const Pose& from, const Pose& to);

/// Symmetrized, direction-folded connectivity:
/// max over {a, a+pi} x {b, b+pi} of (Gamma_1(a,b) + Gamma_1(b,a)) / 2.
double omega1(const KernelGrid& grid, const Pose& a, const Pose& b);
inline double omega1(const KernelGrid& grid, const LiftedPoint& a, const LiftedPoint& b) {
    return omega1(grid, pose_of(a), pose_of(b));
}

struct IntensityParams {
    double sigma2 = 0.3;
    void validate() const;
};

/// exp(-(fi - fj)^2 / (2 sigma2^2))
double omega2(double fi, double fj, const IntensityParams& p);

double omega_f(const KernelGrid& grid, const LiftedPoint& a, const LiftedPoint& b, const IntensityParams& p);

// Binary cache format: magic "VKGRID01", then little-endian parameters and the
// histogram as float64 in index() order.
void write_kernel(std::ostream& out, const KernelGrid& grid);
KernelGrid read_kernel(std::istream& in);
void save_kernel(const std::filesystem::path& path, const KernelGrid& grid);
KernelGrid load_kernel(const std::filesystem::path& path);
std::string kernel_cache_name(const KernelParams& params);

/// Thread-safe memoizing store, optionally backed by a directory of cache
/// files. Each key is built once; concurrent requests wait for the builder.
class KernelCache {
public:
    explicit KernelCache(std::filesystem::path directory = {});

    std::shared_ptr<const KernelGrid> get(const KernelParams& params);
    std::size_t size() const;

private:
    struct Slot {
        std::once_flag once;
        std::shared_ptr<const KernelGrid> grid;
    };

    std::filesystem::path directory_;
    mutable std::mutex mutex_;
    std::unordered_map<std::uint64_t, std::shared_ptr<Slot>> slots_;
};

}  // namespace vessel
