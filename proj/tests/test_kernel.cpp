#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <random>

#include <Eigen/Dense>

#include "gplandmark/kernel.hpp"
#include "gplandmark/synthetic.hpp"
#include "oracles.hpp"

using namespace gplandmark;
using Catch::Approx;

TEST_CASE("squared exponential kernel evaluates the formula") {
    PointCloud cloud;
    cloud.points.resize(2, 3);
    cloud.points << 0, 0, 0, 1, 0, 0;

    const KernelMatrix k1 = squared_exponential_kernel(cloud, 1.0);
    CHECK(k1.entries(0, 0) == 1.0);
    CHECK(k1.entries(1, 1) == 1.0);
    CHECK(k1.entries(0, 1) == Approx(std::exp(-1.0)).epsilon(1e-12));

    const KernelMatrix k2 = squared_exponential_kernel(cloud, 0.5);
    CHECK(k2.entries(0, 1) == Approx(std::exp(-2.0)).epsilon(1e-12));
}

TEST_CASE("invalid bandwidths are rejected") {
    const PointCloud cloud = random_cloud(5, 3, 1);
    CHECK_THROWS_AS(squared_exponential_kernel(cloud, 0.0), InvalidBandwidth);
    CHECK_THROWS_AS(squared_exponential_kernel(cloud, -1.0), InvalidBandwidth);
    CHECK_THROWS_AS(squared_exponential_kernel(cloud, std::nan("")), InvalidBandwidth);
}

TEST_CASE("kernel matrix is exactly symmetric with unit diagonal in (0, 1]") {
    const PointCloud cloud = random_cloud(60, 3, 2);
    const KernelMatrix K = squared_exponential_kernel(cloud, auto_bandwidth(cloud));
    CHECK(K.entries == K.entries.transpose().eval());
    CHECK(K.diag.isConstant(1.0));
    CHECK(K.entries.minCoeff() > 0.0);
    CHECK(K.entries.maxCoeff() <= 1.0);
}

TEST_CASE("reweighted kernel matches the 2x2 hand computation") {
    PointCloud cloud;
    cloud.points.resize(2, 3);
    cloud.points << 0, 0, 0, 0.8, 0, 0;
    const double eps = 1.3;
    const double a = std::exp(-0.64 / eps);

    WeightField wf;
    const double c = 0.35; // w nu per point
    wf.weight = Eigen::VectorXd::Constant(2, c);
    wf.area = Eigen::VectorXd::Ones(2);

    const KernelMatrix inner = squared_exponential_kernel(cloud, eps);
    const KernelMatrix Kw = reweighted_kernel(inner, wf);
    CHECK(Kw.kind == KernelKind::Reweighted);
    CHECK(Kw.bandwidth == Approx(2.0 * eps));
    CHECK(Kw.entries(0, 0) == Approx(c * (1.0 + a * a)).epsilon(1e-12));
    CHECK(Kw.entries(1, 1) == Approx(c * (1.0 + a * a)).epsilon(1e-12));
    CHECK(Kw.entries(0, 1) == Approx(2.0 * a * c).epsilon(1e-12));
}

TEST_CASE("single-atom measure gives the rank-1 kernel K_i1 K_1j") {
    const PointCloud cloud = random_cloud(6, 3, 5);
    const KernelMatrix inner = squared_exponential_kernel(cloud, 0.7);
    WeightField wf;
    wf.weight = Eigen::VectorXd::Zero(6);
    wf.area = Eigen::VectorXd::Ones(6);
    wf.weight[1] = 1.0;

    const KernelMatrix Kw = reweighted_kernel(inner, wf);
    for (Eigen::Index i = 0; i < 6; ++i)
        for (Eigen::Index j = 0; j < 6; ++j)
            CHECK(Kw.entries(i, j) ==
                  Approx(inner.entries(i, 1) * inner.entries(1, j)).margin(1e-15));
}

TEST_CASE("reweighted kernel is numerically PSD") {
    const PointCloud cloud = random_cloud(40, 3, 8);
    std::mt19937_64 gen(21);
    WeightField wf;
    wf.weight.resize(40);
    wf.area.resize(40);
    for (Eigen::Index i = 0; i < 40; ++i) {
        wf.weight[i] = uniform_unit(gen);
        wf.area[i] = 0.5 + uniform_unit(gen);
    }
    const KernelMatrix Kw = reweighted_kernel(squared_exponential_kernel(cloud, 0.4), wf);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Kw.entries);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10 * eig.eigenvalues().maxCoeff());

    // quadratic-form route
    const double max_diag = Kw.max_diag();
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd v(40);
        for (Eigen::Index i = 0; i < 40; ++i) v[i] = standard_normal(gen);
        CHECK(v.dot(Kw.entries * v) >= -1e-10 * v.squaredNorm() * max_diag);
    }
}

TEST_CASE("uniform weights give c K K, which is not K itself") {
    const PointCloud cloud = random_cloud(30, 3, 4);
    const double eps = 0.9;
    const KernelMatrix inner = squared_exponential_kernel(cloud, eps / 2.0);
    const KernelMatrix Kw = reweighted_kernel(inner, uniform_weights(30));

    const Eigen::MatrixXd expected = inner.entries * inner.entries / 30.0;
    CHECK(((Kw.entries - expected).cwiseAbs().maxCoeff()) < 1e-12);

    const KernelMatrix direct = squared_exponential_kernel(cloud, eps);
    CHECK(((Kw.entries - direct.entries).cwiseAbs().maxCoeff()) > 1e-3);
}

TEST_CASE("rigid motions leave the Euclidean kernel unchanged") {
    const PointCloud cloud = random_cloud(50, 3, 6);
    PointCloud moved = cloud;
    moved.points = (cloud.points * oracles::random_rotation(9).transpose()).rowwise() +
                   Eigen::RowVector3d(1.5, -0.25, 4.0);
    const KernelMatrix a = squared_exponential_kernel(cloud, 0.5);
    const KernelMatrix b = squared_exponential_kernel(moved, 0.5);
    CHECK((a.entries - b.entries).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("off-diagonal entries increase strictly with bandwidth") {
    const PointCloud cloud = random_cloud(12, 3, 7);
    const KernelMatrix narrow = squared_exponential_kernel(cloud, 0.2);
    const KernelMatrix wide = squared_exponential_kernel(cloud, 0.8);
    for (Eigen::Index i = 0; i < 12; ++i)
        for (Eigen::Index j = 0; j < i; ++j)
            CHECK(wide.entries(i, j) > narrow.entries(i, j));
}

TEST_CASE("psd_floor") {
    SECTION("policy none returns the input entry-exact") {
        const KernelMatrix K = oracles::random_psd(10, 3);
        const KernelMatrix same = psd_floor(K, JitterPolicy::None);
        CHECK(same.entries == K.entries);
        CHECK(same.jitter == 0.0);
    }
    SECTION("relative policy on the identity") {
        const KernelMatrix eye = kernel_from_entries(Eigen::MatrixXd::Identity(4, 4));
        const KernelMatrix floored = psd_floor(eye, JitterPolicy::Relative);
        CHECK(floored.entries(0, 0) == Approx(1.0 + 1e-12).epsilon(1e-15));
        CHECK(floored.jitter == Approx(1e-12));
    }
    SECTION("jitter rescues a duplicate-row Gram matrix") {
        Eigen::MatrixXd singular(2, 2);
        singular << 1.0, 1.0, 1.0, 1.0; // exactly rank 1
        const KernelMatrix K = kernel_from_entries(singular);
        CHECK(Eigen::LLT<Eigen::MatrixXd>(K.entries).info() != Eigen::Success);
        const KernelMatrix floored = psd_floor(K, JitterPolicy::Relative);
        CHECK(Eigen::LLT<Eigen::MatrixXd>(floored.entries).info() == Eigen::Success);
    }
}

TEST_CASE("auto bandwidth is (0.1 * bbox diagonal)^2") {
    PointCloud cloud;
    cloud.points.resize(2, 3);
    cloud.points << 0, 0, 0, 3, 4, 0; // diagonal 5
    CHECK(auto_bandwidth(cloud) == Approx(0.25).epsilon(1e-12));
}

TEST_CASE("binary kernel dump round-trips bit-exactly") {
    const PointCloud cloud = random_cloud(15, 3, 10);
    const KernelMatrix K = squared_exponential_kernel(cloud, 0.33);
    const auto dir = std::filesystem::temp_directory_path() / "gplandmark_tests";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "kernel.bin").string();
    write_kernel_binary(K, path);
    const KernelMatrix back = read_kernel_binary(path);
    CHECK(back.entries == K.entries);
    CHECK(back.bandwidth == K.bandwidth);
    CHECK(back.kind == K.kind);
}
