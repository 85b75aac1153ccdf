#include "vessel/spectral.hpp"

#include <atomic>
#include <thread>

namespace vessel {

AffinityMatrix build_affinity(const LiftedPointSet& points, const KernelGrid& grid, const IntensityParams& ip) {
    ip.validate();
    const Eigen::Index n = static_cast<Eigen::Index>(points.size());
    if (n < 2) throw InvalidArgument("need at least 2 points", "points");
    if (points.n_orientations != grid.params().n_theta)
        throw InvalidArgument("lifting and kernel use different orientation grids", "n_theta");

    AffinityMatrix a = AffinityMatrix::Zero(n, n);
    const auto& pts = points.points;

    // Row i fills the upper triangle; rows are independent.
    auto fill_row = [&](Eigen::Index i) {
        for (Eigen::Index j = i + 1; j < n; ++j) a(i, j) = omega_f(grid, pts[i], pts[j], ip);
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), 8u));
    if (workers == 1 || n < 256) {
        for (Eigen::Index i = 0; i < n; ++i) fill_row(i);
    } else {
        std::atomic<Eigen::Index> next{0};
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (Eigen::Index i = next++; i < n; i = next++) fill_row(i);
            });
    }

    a.triangularView<Eigen::StrictlyLower>() = a.transpose();
    for (Eigen::Index i = 0; i < n; ++i) a(i, i) = a.row(i).maxCoeff();
    return a;
}

}  // namespace vessel
