#pragma once

#include "vessel/error.hpp"
#include "vessel/kernel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace vessel {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Dense symmetric nonnegative n x n; row/column i is point i of the lifted set.
using AffinityMatrix = Eigen::MatrixXd;

/// A(i, j) = omega_f(p_i, p_j) off the diagonal; A(i, i) = max_j A(i, j).
AffinityMatrix build_affinity(const LiftedPointSet& points, const KernelGrid& grid, const IntensityParams& ip);

namespace detail {

template <typename Derived>
Vector<typename Derived::Scalar> checked_degrees(const Eigen::MatrixBase<Derived>& a) {
    if (a.rows() != a.cols() || a.rows() == 0) throw InvalidArgument("affinity must be square and non-empty", "A");
    Vector<typename Derived::Scalar> d = a.rowwise().sum();
    for (Eigen::Index i = 0; i < d.size(); ++i)
        if (!(d(i) > 0))
            throw InvalidArgument("row " + std::to_string(i) + " has zero degree; drop that isolated point first", "A");
    return d;
}

}  // namespace detail

/// Row-stochastic P = D^{-1} A.
template <typename Derived>
Matrix<typename Derived::Scalar> normalize(const Eigen::MatrixBase<Derived>& a) {
    const auto d = detail::checked_degrees(a);
    return d.cwiseInverse().asDiagonal() * a;
}

template <typename Scalar>
struct SpectralResult {
    Vector<Scalar> eigenvalues;   // spectrum of P, descending
    Matrix<Scalar> eigenvectors;  // right eigenvectors of P as columns, same order
    int K = 0;
    int tau = 0;
    double epsilon = 0.0;
};

/// Spectrum of P = D^{-1} A via the symmetric S = D^{-1/2} A D^{-1/2}; the
/// eigenvectors of P are u = D^{-1/2} v. Each u is sign-fixed to a
/// nonnegative entry sum. `a` must be symmetric with positive row sums.
template <typename Derived>
SpectralResult<typename Derived::Scalar> eigs(const Eigen::MatrixBase<Derived>& a) {
    using Scalar = typename Derived::Scalar;
    const Vector<Scalar> d = detail::checked_degrees(a);
    const Scalar asym = (a - a.transpose()).cwiseAbs().maxCoeff();
    if (asym > Scalar(1e-12) * std::max(Scalar(1), a.cwiseAbs().maxCoeff()))
        throw InvalidArgument("affinity is not symmetric", "A");

    const Vector<Scalar> inv_sqrt = d.cwiseSqrt().cwiseInverse();
    const Matrix<Scalar> s = inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(s);
    if (solver.info() != Eigen::Success)
        throw SolverError("symmetric eigensolver did not converge (n = " + std::to_string(a.rows()) +
                          ", info = " + std::to_string(static_cast<int>(solver.info())) + ")");

    const Eigen::Index n = a.rows();
    SpectralResult<Scalar> out;
    out.eigenvalues = solver.eigenvalues().reverse();
    out.eigenvectors = inv_sqrt.asDiagonal() * solver.eigenvectors().rowwise().reverse();
    for (Eigen::Index j = 0; j < n; ++j)
        if (out.eigenvectors.col(j).sum() < 0) out.eigenvectors.col(j) *= Scalar(-1);
    return out;
}

/// Largest K with lambda_i^tau > 1 - epsilon for all i <= K (at least 1).
template <typename Derived>
int select_k(const Eigen::MatrixBase<Derived>& eigenvalues, int tau, double epsilon) {
    if (tau < 1) throw InvalidArgument("must be >= 1", "tau");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("must lie in (0, 1)", "epsilon");
    int k = 0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        const double lambda = static_cast<double>(eigenvalues(i));
        if (!(lambda > 0.0) || std::pow(lambda, tau) <= 1.0 - epsilon) break;
        ++k;
    }
    return std::max(k, 1);
}

inline constexpr int kNoise = 0;

struct ClusterLabeling {
    std::vector<int> labels;  // per point: 1..n_clusters, or kNoise
    std::vector<int> sizes;   // sizes[id - 1], descending
    int min_size = 0;

    int n_clusters() const noexcept { return static_cast<int>(sizes.size()); }
};

/// Groups points by the leading K eigenvectors. The K-column basis is first
/// rotated onto K pivot points chosen by column-pivoted QR (so each column
/// is 1 at its pivot and 0 at the others), then every point takes the argmax
/// column, ties towards the lower column. Clusters smaller than `min_size`
/// become noise; survivors are renumbered by size, largest first.
template <typename Scalar>
ClusterLabeling assign_clusters(const SpectralResult<Scalar>& result, int min_size) {
    const int k = result.K;
    const Eigen::Index n = result.eigenvectors.rows();
    if (k < 1 || k > result.eigenvectors.cols()) throw InvalidArgument("K out of range", "K");
    if (min_size < 1) throw InvalidArgument("must be >= 1", "min_size");

    const Matrix<Scalar> u = result.eigenvectors.leftCols(k);
    Eigen::ColPivHouseholderQR<Matrix<Scalar>> qr(u.transpose());
    const auto& perm = qr.colsPermutation().indices();
    Matrix<Scalar> basis(k, k);
    for (int j = 0; j < k; ++j) basis.row(j) = u.row(perm(j));
    const Matrix<Scalar> z = basis.transpose().partialPivLu().solve(u.transpose()).transpose();

    std::vector<int> raw(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        int arg = 0;
        for (int j = 1; j < k; ++j)
            if (z(i, j) > z(i, arg)) arg = j;
        raw[i] = arg;
    }

    std::vector<int> count(k, 0), first(k, static_cast<int>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        ++count[raw[i]];
        first[raw[i]] = std::min(first[raw[i]], static_cast<int>(i));
    }
    std::vector<int> order;
    for (int j = 0; j < k; ++j)
        if (count[j] >= min_size) order.push_back(j);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return count[a] != count[b] ? count[a] > count[b] : first[a] < first[b];
    });
    std::vector<int> id(k, kNoise);
    ClusterLabeling out;
    out.min_size = min_size;
    for (std::size_t r = 0; r < order.size(); ++r) {
        id[order[r]] = static_cast<int>(r) + 1;
        out.sizes.push_back(count[order[r]]);
    }
    out.labels.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) out.labels[i] = id[raw[i]];
    return out;
}

/// Full pipeline over an affinity: eigs, K selection, cluster assignment.
template <typename Derived>
std::pair<SpectralResult<typename Derived::Scalar>, ClusterLabeling> spectral_clustering(
    const Eigen::MatrixBase<Derived>& a, int tau, double epsilon, int min_size) {
    auto result = eigs(a);
    result.tau = tau;
    result.epsilon = epsilon;
    result.K = select_k(result.eigenvalues, tau, epsilon);
    ClusterLabeling labels = assign_clusters(result, min_size);
    return {std::move(result), std::move(labels)};
}

}  // namespace vessel
