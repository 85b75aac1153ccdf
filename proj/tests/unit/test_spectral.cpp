#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles.hpp"
#include "vessel/error.hpp"
#include "vessel/pipeline.hpp"
#include "vessel/spectral.hpp"
#include "vessel/synth.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numeric>
#include <random>

using namespace vessel;

namespace {

Eigen::MatrixXd two_blocks() {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(6, 6);
    a.topLeftCorner(3, 3).setOnes();
    a.bottomRightCorner(3, 3).setOnes();
    return a;
}

Eigen::MatrixXd random_connected(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) a(i, j) = a(j, i) = u(rng) + 1e-3;
    return a;
}

const KernelGrid& working_grid() {
    static const KernelGrid g = [] {
        KernelParams p;
        p.H = 7;
        p.sigma = 0.05;
        return estimate_kernel(p);
    }();
    return g;
}

LiftedPointSet row_of_points(int n, int spacing) {
    LiftedPointSet s;
    s.n_orientations = 24;
    for (int i = 0; i < n; ++i) s.points.push_back({i * spacing, 0, 0, 0.0, 0.5});
    return s;
}

}  // namespace

TEST_CASE("affinity: far-apart points do not interact") {
    const AffinityMatrix a = build_affinity(row_of_points(3, 20), working_grid(), {0.3});
    CHECK(a(0, 1) == 0.0);
    CHECK(a(1, 2) == 0.0);
    CHECK(a(0, 2) == 0.0);
    CHECK(a.diagonal().isZero());
}

TEST_CASE("affinity: symmetric, row-max diagonal, equivariant under relabeling") {
    LiftedPointSet pts = row_of_points(6, 1);
    pts.points[2].orientation = 2;
    pts.points[4].intensity = 0.8;
    pts.points.push_back({2, 1, 23, 0.0, 0.4});
    const AffinityMatrix a = build_affinity(pts, working_grid(), {0.3});
    const Eigen::Index n = a.rows();
    CHECK(a == a.transpose());
    CHECK((a.array() >= 0).all());
    for (Eigen::Index i = 0; i < n; ++i) {
        double off = 0;
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) off = std::max(off, a(i, j));
        CHECK(a(i, i) == off);
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) CHECK(a(i, j) == omega_f(working_grid(), pts.points[i], pts.points[j], {0.3}));
    }

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(2);
    std::shuffle(perm.begin(), perm.end(), rng);
    LiftedPointSet shuffled = pts;
    for (Eigen::Index i = 0; i < n; ++i) shuffled.points[i] = pts.points[perm[i]];
    const AffinityMatrix b = build_affinity(shuffled, working_grid(), {0.3});
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) CHECK(b(i, j) == a(perm[i], perm[j]));

    CHECK_THROWS_AS(build_affinity(row_of_points(1, 1), working_grid(), {0.3}), InvalidArgument);
}

TEST_CASE("affinity of a crossing patch is stronger within vessels than across") {
    const auto f = synth::crossing();
    ClusterParams p;
    p.H = 7;
    p.sigma2 = 0.1;
    KernelCache cache;
    const PatchSpec spec{0, 12, 12, 25, {}};
    const PatchResult r = run_patch(f.image, f.seg, spec, p, cache);
    const auto grid = cache.get(r.kernel);
    const AffinityMatrix a = build_affinity(r.points, *grid, p.intensity());
    double within = 0, across = 0;
    int n_within = 0, n_across = 0;
    const auto& pts = r.points.points;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const int ti = f.truth(pts[i].y, pts[i].x), tj = f.truth(pts[j].y, pts[j].x);
            if (!ti || !tj || f.overlap(pts[i].y, pts[i].x) || f.overlap(pts[j].y, pts[j].x)) continue;
            (ti == tj ? within : across) += a(i, j);
            ++(ti == tj ? n_within : n_across);
        }
    REQUIRE(n_within > 0);
    REQUIRE(n_across > 0);
    CHECK(within / n_within > 10 * (across / n_across));
}

TEST_CASE("normalize gives a row-stochastic matrix") {
    std::mt19937_64 rng(1);
    const Eigen::MatrixXd a = random_connected(rng, 12);
    const Eigen::MatrixXd p = normalize(a);
    CHECK((p.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);

    const Eigen::MatrixXd pb = normalize(two_blocks());
    CHECK(pb.topRightCorner(3, 3).isZero());
    CHECK(pb.bottomLeftCorner(3, 3).isZero());

    Eigen::MatrixXd isolated = two_blocks();
    isolated.row(4).setZero();
    isolated.col(4).setZero();
    CHECK_THROWS_WITH_AS(normalize(isolated), doctest::Contains("drop"), InvalidArgument);
    CHECK_THROWS_AS(eigs(isolated), InvalidArgument);
}

TEST_CASE("two equal blocks have spectrum {1, 1, 0, 0, 0, 0}") {
    const auto r = eigs(two_blocks());
    Eigen::VectorXd want(6);
    want << 1, 1, 0, 0, 0, 0;
    CHECK((r.eigenvalues - want).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("identity affinity has all eigenvalues one") {
    const auto r = eigs(Eigen::MatrixXd::Identity(5, 5));
    CHECK((r.eigenvalues.array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("eigs returns right eigenvectors of P and the spectrum of P") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 3 + trial % 20;
        const Eigen::MatrixXd a = random_connected(rng, n);
        const auto r = eigs(a);
        const Eigen::MatrixXd p = normalize(a);
        CHECK(r.eigenvalues(0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.eigenvalues.maxCoeff() <= 1.0 + 1e-9);
        for (Eigen::Index i = 1; i < n; ++i) CHECK(r.eigenvalues(i) <= r.eigenvalues(i - 1));
        // Perron vector: constant sign, here constant.
        const Eigen::VectorXd u0 = r.eigenvectors.col(0);
        CHECK((u0.array() > 0).all());
        CHECK(u0.maxCoeff() - u0.minCoeff() < 1e-9 * u0.maxCoeff());
        for (Eigen::Index j = 0; j < n; ++j) {
            CHECK((p * r.eigenvectors.col(j) - r.eigenvalues(j) * r.eigenvectors.col(j)).norm() <
                  1e-9 * r.eigenvectors.col(j).norm());
            CHECK(r.eigenvectors.col(j).sum() >= 0);
        }
        if (trial % 10 == 0) {
            Eigen::EigenSolver<Eigen::MatrixXd> general(p);
            Eigen::VectorXd direct = general.eigenvalues().real();
            std::sort(direct.data(), direct.data() + n, std::greater<>());
            CHECK(general.eigenvalues().imag().cwiseAbs().maxCoeff() < 1e-9);
            CHECK((direct - r.eigenvalues).cwiseAbs().maxCoeff() < 1e-9);
        }
    }
}

TEST_CASE("eigs rejects asymmetric or empty input") {
    Eigen::MatrixXd a = two_blocks();
    a(0, 1) = 0.5;
    CHECK_THROWS_AS(eigs(a), InvalidArgument);
    CHECK_THROWS_AS(eigs(Eigen::MatrixXd(0, 0)), InvalidArgument);
    CHECK_THROWS_AS(eigs(Eigen::MatrixXd::Ones(2, 3)), InvalidArgument);
}

TEST_CASE("the spectral routines are generic in the scalar type") {
    const Eigen::MatrixXf a = two_blocks().cast<float>();
    const auto [r, labels] = spectral_clustering(a, 150, 0.1, 1);
    CHECK(r.K == 2);
    CHECK(labels.n_clusters() == 2);
    CHECK(std::abs(r.eigenvalues(1) - 1.0f) < 1e-5f);
}

TEST_CASE("select_k follows the exponentiated threshold") {
    Eigen::VectorXd ev(4);
    ev << 1.0, 0.999, 0.8, 0.1;
    CHECK(std::pow(0.999, 150) == doctest::Approx(0.861).epsilon(1e-3));
    CHECK(select_k(ev, 150, 0.1) == 1);
    CHECK(select_k(ev, 150, 0.3) == 2);
    CHECK(select_k(ev, 1, 0.5) == 3);

    Eigen::VectorXd two(6);
    two << 1, 1, 0, 0, 0, 0;
    for (int i = 1; i <= 18; ++i) {
        const double level = 0.05 * i;
        CAPTURE(level);
        CHECK(select_k(two, 150, 1.0 - level) == 2);
    }
    Eigen::VectorXd low(3);
    low << 0.5, 0.4, 0.3;
    CHECK(select_k(low, 150, 0.1) == 1);
    CHECK_THROWS_AS(select_k(ev, 0, 0.1), InvalidArgument);
    CHECK_THROWS_AS(select_k(ev, 150, 0.0), InvalidArgument);
    CHECK_THROWS_AS(select_k(ev, 150, 1.0), InvalidArgument);
}

TEST_CASE("assign_clusters recovers two blocks") {
    const auto [r, labels] = spectral_clustering(two_blocks(), 150, 0.1, 1);
    CHECK(r.K == 2);
    CHECK(labels.labels[0] == labels.labels[1]);
    CHECK(labels.labels[1] == labels.labels[2]);
    CHECK(labels.labels[3] == labels.labels[4]);
    CHECK(labels.labels[4] == labels.labels[5]);
    CHECK(labels.labels[0] != labels.labels[3]);
    CHECK(labels.sizes == std::vector<int>{3, 3});
}

TEST_CASE("K = 1 puts everything in one cluster") {
    std::mt19937_64 rng(4);
    auto r = eigs(random_connected(rng, 9));
    r.K = 1;
    const ClusterLabeling l = assign_clusters(r, 1);
    CHECK(l.n_clusters() == 1);
    CHECK(std::all_of(l.labels.begin(), l.labels.end(), [](int v) { return v == 1; }));
    CHECK_THROWS_AS(assign_clusters(r, 0), InvalidArgument);
    r.K = 0;
    CHECK_THROWS_AS(assign_clusters(r, 1), InvalidArgument);
}

TEST_CASE("small clusters become noise and survivors are ranked by size") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(15, 15);
    a.block(0, 0, 5, 5).setOnes();
    a.block(5, 5, 3, 3).setOnes();
    a.block(8, 8, 7, 7).setOnes();
    const auto [r, l] = spectral_clustering(a, 150, 0.1, 5);
    CHECK(r.K == 3);
    CHECK(l.n_clusters() == 2);
    CHECK(l.sizes == std::vector<int>{7, 5});
    CHECK(l.min_size == 5);
    for (int i = 5; i < 8; ++i) CHECK(l.labels[i] == kNoise);
    for (int i = 8; i < 15; ++i) CHECK(l.labels[i] == 1);
    for (int i = 0; i < 5; ++i) CHECK(l.labels[i] == 2);
}

TEST_CASE("labels are invariant under scaling and equivariant under relabeling") {
    std::mt19937_64 rng(21);
    const auto blocks = oracle::random_block_affinity(rng, 3, 40);
    const auto [r, l] = spectral_clustering(blocks.a, 150, 0.1, 1);
    const auto [rs, ls] = spectral_clustering((3.7 * blocks.a).eval(), 150, 0.1, 1);
    CHECK(ls.labels == l.labels);
    CHECK(rs.K == r.K);

    const Eigen::Index n = blocks.a.rows();
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::MatrixXd shuffled(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) shuffled(i, j) = blocks.a(perm[i], perm[j]);
    const auto [rp, lp] = spectral_clustering(shuffled, 150, 0.1, 1);
    std::vector<int> expected(n);
    for (Eigen::Index i = 0; i < n; ++i) expected[i] = l.labels[perm[i]];
    CHECK(oracle::same_partition(lp.labels, expected));
}

TEST_CASE("spectral labels equal graph components on random block affinities") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        const int blocks = 2 + trial % 3;
        const auto b = oracle::random_block_affinity(rng, blocks, 60);
        int components = 0;
        const std::vector<int> truth = oracle::graph_components(b.a, &components);
        REQUIRE(components == blocks);
        const auto [r, l] = spectral_clustering(b.a, 150, 0.1, 1);
        CAPTURE(trial);
        CHECK(r.K == blocks);
        int ones = 0;
        for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i) ones += std::abs(r.eigenvalues(i) - 1.0) <= 1e-9;
        CHECK(ones == blocks);
        CHECK(oracle::same_partition(l.labels, truth));
    }
}
