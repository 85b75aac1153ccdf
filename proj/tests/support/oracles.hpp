#pragma once

// Independent reference implementations used as test oracles. Each one is
// written for clarity, not speed, and shares no code with the library.

#include "vessel/fft.hpp"
#include "vessel/image.hpp"
#include "vessel/kernel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <queue>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using std::numbers::pi;

inline std::filesystem::path scratch_dir(const std::string& name) {
    const char* env = std::getenv("VESSEL_TEST_TMP");
    std::filesystem::path root = env ? env : std::filesystem::temp_directory_path() / "vessel-tests";
    auto dir = root / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// Sliding-window z-score with edge replication, evaluated window by window,
// then mapped by 0.5 + z / (2 sqrt(n - 1)) for a window of n pixels.
inline vessel::Image2D brute_normalize(const vessel::Image2D& img, int window) {
    const int h = static_cast<int>(img.rows()), w = static_cast<int>(img.cols()), r = window / 2;
    Eigen::ArrayXXd z(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0, s2 = 0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    const double v = img(std::clamp(y + dy, 0, h - 1), std::clamp(x + dx, 0, w - 1));
                    s += v;
                    s2 += v * v;
                }
            const double n = window * window, mean = s / n;
            const double sd = std::sqrt(std::max(0.0, s2 / n - mean * mean));
            z(y, x) = (img(y, x) - mean) / std::max(sd, 1e-6);
        }
    return 0.5 + z / (2.0 * std::sqrt(double(window) * window - 1.0));
}

// Tries every one of the 256 candidate cuts t_k = lo + k (hi - lo) / 256 on the
// raw values and keeps the first one with the largest between-class variance.
inline double exhaustive_otsu(const std::vector<double>& values) {
    const double lo = *std::min_element(values.begin(), values.end());
    const double hi = *std::max_element(values.begin(), values.end());
    double best = -1, best_t = hi;
    for (int k = 1; k < 256; ++k) {
        const double t = lo + (hi - lo) * k / 256.0;
        double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
        for (double v : values) (v >= t ? (n1 += 1, s1 += v) : (n0 += 1, s0 += v));
        if (n0 == 0 || n1 == 0) continue;
        const double d = s0 / n0 - s1 / n1;
        const double between = n0 * n1 * d * d;
        if (between > best + 1e-12 * std::abs(best)) {
            best = between;
            best_t = t;
        }
    }
    return best_t;
}

inline int reflect(int i, int n) {
    while (i < 0 || i >= n) i = i < 0 ? -i : 2 * n - 2 - i;
    return i;
}

// sum_m img(p + m) conj(psi(m)) with mirrored borders, straight from the definition.
inline std::complex<double> correlate_at(const vessel::Image2D& img, const vessel::ComplexGrid& psi, int x, int y) {
    const int r = static_cast<int>(psi.rows()) / 2;
    const int h = static_cast<int>(img.rows()), w = static_cast<int>(img.cols());
    std::complex<double> acc = 0;
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) acc += img(reflect(y + dy, h), reflect(x + dx, w)) * std::conj(psi(r + dy, r + dx));
    return acc;
}

// Density of (x, y, theta) under dv/dt = -(cos theta dx + sin theta dy) v + D dv/dthetatheta,
// D = sigma^2 / 2 (unit speed, angular increments of variance sigma^2 per unit length),
// started from a point mass at the origin. Solved with first-order upwind
// transport and explicit angular diffusion on a fine grid whose cell edges
// include every half-integer position and every coarse angle-bin edge.
// Returns the sum over t = 1..H of the density aggregated onto the coarse
// nearest-bin grid of the Monte-Carlo histogram, normalized to unit mass.
struct FokkerPlanckResult {
    std::vector<double> histogram;  // KernelGrid::index() order
    double lost = 0.0;              // mass that left the fine domain
};

inline FokkerPlanckResult fokker_planck_histogram(int H, double sigma, int n_theta, int radius, int refine = 16,
                                                  int angle_refine = 10) {
    const double h = 1.0 / refine;
    const double coarse_dtheta = pi / n_theta;
    const double dth = coarse_dtheta / (2.0 * angle_refine);  // coarse edges at odd multiples of half a bin
    const double D = 0.5 * sigma * sigma;

    // Domain: x in [-1, H + 1], |y| <= ymax, |theta| <= tmax, all on cell edges.
    const double tmax_want = std::min(pi - dth, 8.0 * sigma * std::sqrt(double(H)) + coarse_dtheta);
    const int nt_half = static_cast<int>(std::ceil(tmax_want / dth));
    const double ymax_want = std::min(double(radius) + 0.5, 1.0 + 8.0 * sigma * std::pow(double(H), 1.5));
    const int ny_half = static_cast<int>(std::ceil(ymax_want / h));
    const int nx = (H + 2) * refine, ny = 2 * ny_half, nt = 2 * nt_half;
    const double x0 = -1.0, y0 = -ny_half * h, t0 = -nt_half * dth;
    auto idx = [&](int i, int j, int k) { return (static_cast<std::size_t>(k) * ny + j) * nx + i; };

    std::vector<double> v(static_cast<std::size_t>(nx) * ny * nt, 0.0), next(v.size());
    {
        const int i0 = refine, j0 = ny_half, k0 = nt_half;  // origin is the corner of these cells
        for (int a = -1; a <= 0; ++a)
            for (int b = -1; b <= 0; ++b)
                for (int c = -1; c <= 0; ++c) v[idx(i0 + a, j0 + b, k0 + c)] = 0.125;
    }

    const double dt = h;  // |cos theta| <= 1 keeps the x sweep at CFL <= 1
    const int sub = std::max(1, static_cast<int>(std::ceil(D * dt / (dth * dth) / 0.45)));
    const double mu = D * (dt / sub) / (dth * dth);
    const int steps_per_unit = refine;

    const int angle_bins = 2 * n_theta, side = 2 * radius + 1;
    std::vector<double> hist(static_cast<std::size_t>(side) * side * angle_bins, 0.0);
    double lost = 0.0;

    for (int step = 1; step <= H * steps_per_unit; ++step) {
        // x sweep
        std::fill(next.begin(), next.end(), 0.0);
        for (int k = 0; k < nt; ++k) {
            const double c = std::cos(t0 + (k + 0.5) * dth) * dt / h;
            for (int j = 0; j < ny; ++j)
                for (int i = 0; i < nx; ++i) {
                    const double m = v[idx(i, j, k)];
                    if (m == 0) continue;
                    const int to = c >= 0 ? i + 1 : i - 1;
                    const double moved = std::abs(c) * m;
                    next[idx(i, j, k)] += m - moved;
                    if (to >= 0 && to < nx)
                        next[idx(to, j, k)] += moved;
                    else
                        lost += moved;
                }
        }
        v.swap(next);
        // y sweep
        std::fill(next.begin(), next.end(), 0.0);
        for (int k = 0; k < nt; ++k) {
            const double s = std::sin(t0 + (k + 0.5) * dth) * dt / h;
            for (int j = 0; j < ny; ++j)
                for (int i = 0; i < nx; ++i) {
                    const double m = v[idx(i, j, k)];
                    if (m == 0) continue;
                    const int to = s >= 0 ? j + 1 : j - 1;
                    const double moved = std::abs(s) * m;
                    next[idx(i, j, k)] += m - moved;
                    if (to >= 0 && to < ny)
                        next[idx(i, to, k)] += moved;
                    else
                        lost += moved;
                }
        }
        v.swap(next);
        // angular diffusion, zero-flux walls far out in the tails
        for (int rep = 0; rep < sub; ++rep) {
            for (int k = 0; k < nt; ++k)
                for (int j = 0; j < ny; ++j)
                    for (int i = 0; i < nx; ++i) {
                        const double c = v[idx(i, j, k)];
                        const double lo = k > 0 ? v[idx(i, j, k - 1)] : c;
                        const double hi = k + 1 < nt ? v[idx(i, j, k + 1)] : c;
                        next[idx(i, j, k)] = c + mu * (lo - 2 * c + hi);
                    }
            v.swap(next);
        }

        if (step % steps_per_unit != 0) continue;
        for (int k = 0; k < nt; ++k) {
            const int ib = static_cast<int>(std::floor((t0 + (k + 0.5) * dth) / coarse_dtheta + 0.5));
            const int b = ((ib % angle_bins) + angle_bins) % angle_bins;
            for (int j = 0; j < ny; ++j) {
                const int iy = static_cast<int>(std::floor(y0 + (j + 0.5) * h + 0.5));
                if (iy < -radius || iy > radius) continue;
                for (int i = 0; i < nx; ++i) {
                    const int ix = static_cast<int>(std::floor(x0 + (i + 0.5) * h + 0.5));
                    if (ix < -radius || ix > radius) continue;
                    hist[(static_cast<std::size_t>(iy + radius) * side + (ix + radius)) * angle_bins + b] +=
                        v[idx(i, j, k)];
                }
            }
        }
    }
    double total = 0;
    for (double m : hist) total += m;
    for (double& m : hist) m /= total;
    return {std::move(hist), lost};
}

inline double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
    double sa = 0, sb = 0, tv = 0;
    for (double v : a) sa += v;
    for (double v : b) sb += v;
    for (std::size_t i = 0; i < a.size(); ++i) tv += std::abs(a[i] / sa - b[i] / sb);
    return 0.5 * tv;
}

// Connected components of the graph with an edge wherever a(i, j) > 0.
// Labels are numbered 0.. in order of first appearance.
inline std::vector<int> graph_components(const Eigen::MatrixXd& a, int* count = nullptr) {
    const int n = static_cast<int>(a.rows());
    std::vector<int> label(n, -1);
    int next = 0;
    for (int s = 0; s < n; ++s) {
        if (label[s] >= 0) continue;
        std::queue<int> q;
        q.push(s);
        label[s] = next;
        while (!q.empty()) {
            const int i = q.front();
            q.pop();
            for (int j = 0; j < n; ++j)
                if (a(i, j) > 0 && label[j] < 0) {
                    label[j] = next;
                    q.push(j);
                }
        }
        ++next;
    }
    if (count) *count = next;
    return label;
}

// True when two labelings induce the same partition.
inline bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j)
            if ((a[i] == a[j]) != (b[i] == b[j])) return false;
    return true;
}

// Symmetric affinity with `blocks` internally connected groups of random
// sizes (shuffled over the index range), random positive weights inside a
// block and exact zeros across blocks.
struct BlockAffinity {
    Eigen::MatrixXd a;
    std::vector<int> block;
};

inline BlockAffinity random_block_affinity(std::mt19937_64& rng, int blocks, int n_max, int min_block = 5) {
    std::uniform_int_distribution<int> total_dist(blocks * min_block, n_max);
    const int n = total_dist(rng);
    std::vector<int> sizes(blocks, min_block);
    std::uniform_int_distribution<int> pick(0, blocks - 1);
    for (int extra = n - blocks * min_block; extra > 0; --extra) ++sizes[pick(rng)];
    std::vector<int> block;
    for (int b = 0; b < blocks; ++b) block.insert(block.end(), sizes[b], b);
    std::shuffle(block.begin(), block.end(), rng);

    std::uniform_real_distribution<double> weight(0.05, 1.0);
    std::bernoulli_distribution keep(0.6);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (block[i] == block[j] && keep(rng)) a(i, j) = a(j, i) = weight(rng);
    // A chain through each block keeps it connected whatever was dropped.
    std::vector<int> last(blocks, -1);
    for (int i = 0; i < n; ++i) {
        if (last[block[i]] >= 0 && a(i, last[block[i]]) == 0) a(i, last[block[i]]) = a(last[block[i]], i) = weight(rng);
        last[block[i]] = i;
    }
    for (int i = 0; i < n; ++i) a(i, i) = a.row(i).maxCoeff();
    return {std::move(a), std::move(block)};
}

}  // namespace oracle
