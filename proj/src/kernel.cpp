#include "vessel/kernel.hpp"

#include "vessel/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

namespace vessel {

using std::numbers::pi;

namespace {

constexpr int kChunks = 64;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

int positive_mod(int a, int m) {
    const int r = a % m;
    return r < 0 ? r + m : r;
}

}  // namespace

int KernelParams::effective_radius() const {
    return grid_radius > 0 ? grid_radius : static_cast<int>(std::ceil(H * delta_s - 1e-12));
}

void KernelParams::validate() const {
    if (H < 1) throw InvalidArgument("must be >= 1", "H");
    if (n_paths < 1) throw InvalidArgument("must be >= 1", "n_paths");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("must be > 0", "sigma");
    if (!(delta_s > 0.0) || !std::isfinite(delta_s)) throw InvalidArgument("must be > 0", "delta_s");
    if (n_theta < 2) throw InvalidArgument("must be >= 2", "n_theta");
    if (grid_radius < 0) throw InvalidArgument("must be >= 0", "grid_radius");
}

std::vector<std::string> KernelParams::warnings() const {
    std::vector<std::string> out;
    if (effective_radius() < H * delta_s)
        out.push_back("grid_radius " + std::to_string(grid_radius) + " < H*delta_s; path mass will escape the grid");
    return out;
}

bool operator==(const KernelParams& a, const KernelParams& b) {
    return a.H == b.H && a.n_paths == b.n_paths && a.sigma == b.sigma && a.delta_s == b.delta_s &&
           a.n_theta == b.n_theta && a.effective_radius() == b.effective_radius() && a.seed == b.seed;
}

std::uint64_t params_hash(const KernelParams& p) {
    std::ostringstream s;
    s.precision(17);
    s << "H=" << p.H << ";n=" << p.n_paths << ";sigma=" << p.sigma << ";ds=" << p.delta_s << ";nt=" << p.n_theta
      << ";R=" << p.effective_radius() << ";seed=" << p.seed;
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s.str()) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

KernelGrid::KernelGrid(const KernelParams& params, std::vector<double> counts)
    : params_(params), radius_(params.effective_radius()), angle_bins_(2 * params.n_theta), counts_(std::move(counts)) {
    const std::size_t side = 2 * static_cast<std::size_t>(radius_) + 1;
    if (counts_.size() != side * side * angle_bins_) throw InvalidArgument("histogram size mismatch", "counts");
    total_ = 0.0;
    for (double c : counts_) {
        if (!(c >= 0.0)) throw InvalidArgument("negative histogram entry", "counts");
        total_ += c;
    }
    cos_.resize(angle_bins_);
    sin_.resize(angle_bins_);
    for (int b = 0; b < angle_bins_; ++b) {
        const double a = b * pi / params_.n_theta;
        cos_[b] = std::cos(a);
        sin_[b] = std::sin(a);
        // Quarter turns are exact so that axis-aligned lookups commute with rotation.
        if ((4 * b) % angle_bins_ == 0) {
            const int q = 4 * b / angle_bins_;
            cos_[b] = q == 0 ? 1.0 : (q == 2 ? -1.0 : 0.0);
            sin_[b] = q == 1 ? 1.0 : (q == 3 ? -1.0 : 0.0);
        }
    }
}

double KernelGrid::count(int dx, int dy, int dtheta) const noexcept {
    if (dx < -radius_ || dx > radius_ || dy < -radius_ || dy > radius_) return 0.0;
    return counts_[index(dx, dy, positive_mod(dtheta, angle_bins_))];
}

double KernelGrid::gamma(int dx, int dy, int dtheta) const noexcept {
    return count(dx, dy, dtheta) / static_cast<double>(params_.n_paths);
}

Eigen::ArrayXXd KernelGrid::max_projection() const {
    const int side = 2 * radius_ + 1;
    Eigen::ArrayXXd proj = Eigen::ArrayXXd::Zero(side, side);
    for (int dy = -radius_; dy <= radius_; ++dy)
        for (int dx = -radius_; dx <= radius_; ++dx)
            for (int b = 0; b < angle_bins_; ++b)
                proj(dy + radius_, dx + radius_) = std::max(proj(dy + radius_, dx + radius_), counts_[index(dx, dy, b)]);
    return proj;
}

KernelGrid estimate_kernel(const KernelParams& params) {
    params.validate();
    const int radius = params.effective_radius();
    const int side = 2 * radius + 1;
    const int angle_bins = 2 * params.n_theta;
    const double bin_width = pi / params.n_theta;
    const std::size_t cells = static_cast<std::size_t>(side) * side * angle_bins;

    const int chunks = static_cast<int>(std::min<std::uint64_t>(kChunks, params.n_paths));
    const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), chunks));

    // Counts are integers, so the merged histogram does not depend on how
    // chunks are distributed over workers.
    std::vector<std::vector<std::uint32_t>> partial(workers, std::vector<std::uint32_t>(cells, 0));
    auto run_chunk = [&](int chunk, std::vector<std::uint32_t>& hist) {
        const std::uint64_t base = params.n_paths / chunks;
        const std::uint64_t paths = base + (static_cast<std::uint64_t>(chunk) < params.n_paths % chunks ? 1 : 0);
        std::mt19937_64 rng(splitmix64(params.seed ^ splitmix64(static_cast<std::uint64_t>(chunk) + 1)));
        std::normal_distribution<double> noise(0.0, params.sigma);
        for (std::uint64_t path = 0; path < paths; ++path) {
            double x = 0.0, y = 0.0, theta = 0.0;
            for (int step = 0; step < params.H; ++step) {
                x += params.delta_s * std::cos(theta);
                y += params.delta_s * std::sin(theta);
                theta += params.delta_s * noise(rng);
                const int ix = nearest_bin(x), iy = nearest_bin(y);
                if (ix < -radius || ix > radius || iy < -radius || iy > radius) continue;
                const int it = positive_mod(nearest_bin(theta / bin_width), angle_bins);
                ++hist[(static_cast<std::size_t>(iy + radius) * side + static_cast<std::size_t>(ix + radius)) *
                           angle_bins +
                       it];
            }
        }
    };

    std::atomic<int> next{0};
    auto worker = [&](unsigned w) {
        for (int c = next++; c < chunks; c = next++) run_chunk(c, partial[w]);
    };
    if (workers == 1) {
        worker(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker, w);
    }

    std::vector<double> counts(cells, 0.0);
    for (const auto& hist : partial)
        for (std::size_t i = 0; i < cells; ++i) counts[i] += hist[i];
    return KernelGrid(params, std::move(counts));
}

double gamma1(const KernelGrid& grid, const Pose& from, const Pose& to) {
    const int bins = grid.angle_bins();
    const int frame = positive_mod(from.orientation, bins);
    const double dx = to.x - from.x, dy = to.y - from.y;
    const double c = grid.cos_bin(frame), s = grid.sin_bin(frame);
    const int ix = nearest_bin(c * dx + s * dy);
    const int iy = nearest_bin(-s * dx + c * dy);
    return grid.gamma(ix, iy, to.orientation - from.orientation);
}

double omega1(const KernelGrid& grid, const Pose& a, const Pose& b) {
    const int flip = grid.params().n_theta;
    const double reach = grid.radius() + 1.0;
    if (std::abs(a.x - b.x) > reach || std::abs(a.y - b.y) > reach) return 0.0;
    double best = 0.0;
    for (int fa : {0, flip}) {
        for (int fb : {0, flip}) {
            const Pose pa{a.x, a.y, a.orientation + fa};
            const Pose pb{b.x, b.y, b.orientation + fb};
            best = std::max(best, 0.5 * (gamma1(grid, pa, pb) + gamma1(grid, pb, pa)));
        }
    }
    return best;
}

void IntensityParams::validate() const {
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw InvalidArgument("must be > 0", "sigma2");
}

double omega2(double fi, double fj, const IntensityParams& p) {
    const double d = fi - fj;
    return std::exp(-d * d / (2.0 * p.sigma2 * p.sigma2));
}

double omega_f(const KernelGrid& grid, const LiftedPoint& a, const LiftedPoint& b, const IntensityParams& p) {
    const double w1 = omega1(grid, a, b);
    return w1 == 0.0 ? 0.0 : w1 * omega2(a.intensity, b.intensity, p);
}

}  // namespace vessel
