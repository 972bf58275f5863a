#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "kelvin/rotations.hpp"
#include "oracles.hpp"

using namespace kelvin;
using Eigen::Matrix3d;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace {
constexpr double kPi = 3.14159265358979323846;
const double kSqrt2 = std::sqrt(2.0);
}  // namespace

TEST_CASE("skw3 layout and cross product") {
    Matrix3d expected;
    expected << 0, -1, 0, 1, 0, 0, 0, 0, 0;
    CHECK((skw3(Vector3d(0, 0, 1)) - expected).norm() == 0.0);
    CHECK(skw3(Vector3d::Zero()).norm() == 0.0);

    oracles::Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        const Vector3d p = rng.normal_vec(3);
        const Vector3d x = rng.normal_vec(3);
        CHECK((skw3(p) * x - p.cross(x)).norm() < 1e-14 * (1 + p.norm() * x.norm()));
    }
}

TEST_CASE("exp_so3 against the series and special angles") {
    CHECK((exp_so3(Vector3d::Zero()) - Matrix3d::Identity()).norm() == 0.0);

    Matrix3d quarter;
    quarter << 0, -1, 0, 1, 0, 0, 0, 0, 1;
    CHECK((exp_so3(Vector3d(0, 0, kPi / 2)) - quarter).norm() < 1e-14);
    CHECK((exp_so3(Vector3d(0, 0, kPi / 2)) -
           oracles::series_exp(skw3(Vector3d(0, 0, kPi / 2)))).norm() < 1e-13);

    CHECK((exp_so3(Vector3d(0, 0, 2 * kPi)) - Matrix3d::Identity()).norm() < 1e-12);

    oracles::Rng rng(2);
    for (int i = 0; i < 50; ++i) {
        const Vector3d q = rng.normal_vec(3, 0.8);
        CHECK((exp_so3(q) - oracles::series_exp(skw3(q))).norm() < 1e-12);
        // rotation axis is fixed
        if (q.norm() > 1e-6) CHECK((exp_so3(q) * q.normalized() - q.normalized()).norm() < 1e-13);
    }
}

TEST_CASE("rot2 basics") {
    CHECK((rot2(0.0) - Eigen::Matrix2d::Identity()).norm() == 0.0);
    Eigen::Matrix2d quarter;
    quarter << 0, -1, 1, 0;
    CHECK((rot2(kPi / 2) - quarter).norm() < 1e-15);
    Eigen::Matrix2d gen;
    gen << 0, -kPi / 2, kPi / 2, 0;
    CHECK((rot2(kPi / 2) - oracles::series_exp(gen)).norm() < 1e-13);
    CHECK((rot2(kPi) - rot2(-kPi)).norm() < 1e-12);
}

TEST_CASE("skw_upper layout, zero, linearity") {
    VectorXd e1 = VectorXd::Zero(15);
    e1(0) = 1.0;
    const MatrixXd p = skw_upper(e1, 6);
    CHECK(p(0, 5) == 1.0);
    CHECK(p(5, 0) == -1.0);
    CHECK(p.norm() == doctest::Approx(std::sqrt(2.0)));

    CHECK(skw_upper(VectorXd::Zero(15), 6).norm() == 0.0);

    oracles::Rng rng(3);
    for (int i = 0; i < 20; ++i) {
        const VectorXd a = rng.normal_vec(15), b = rng.normal_vec(15);
        CHECK((skw_upper(a + b, 6) - skw_upper(a, 6) - skw_upper(b, 6)).norm() < 1e-14);
    }
    CHECK_THROWS_AS(skw_upper(VectorXd::Zero(5), 4), std::invalid_argument);
}

TEST_CASE("log_rotation round trips and branch boundary") {
    CHECK(log_rotation(Matrix3d::Identity()).norm() == 0.0);

    const Vector3d q(0.3, -0.2, 0.1);
    CHECK((log_rotation(exp_so3(q)) - skw3(q)).norm() < 1e-10);

    oracles::Rng rng(4);
    for (int i = 0; i < 30; ++i) {
        const MatrixXd p = skw_upper(rng.normal_vec(15, 0.25), 6);
        CHECK((log_rotation(exp_skew(p)) - p).norm() < 1e-9);
    }

    // property: log(exp(P)) = P while the spectral radius stays below pi
    for (int i = 0; i < 30; ++i) {
        for (int n : {2, 3, 6}) {
            MatrixXd p = n == 2 ? skw_param(rng.normal_vec(1, 1.0), 2)
                         : n == 3 ? MatrixXd(skw3(rng.normal_vec(3, 1.0)))
                                  : skw_upper(rng.normal_vec(15, 0.4), 6);
            const double radius = p.operatorNorm();
            if (radius >= kPi - 0.1) p *= (kPi - 0.1) / radius * 0.95;
            CHECK((log_rotation(exp_skew(p)) - p).norm() < 1e-10 * std::max(1.0, p.norm()));
        }
    }

    CHECK_THROWS_AS(log_rotation(exp_so3(Vector3d(kPi, 0, 0))), BranchBoundaryError);
    CHECK_THROWS_AS(log_rotation(MatrixXd(rot2(kPi))), BranchBoundaryError);
    CHECK_THROWS_AS(log_rotation(MatrixXd(2.0 * Matrix3d::Identity())), std::invalid_argument);
}

TEST_CASE("trep layouts") {
    // 2D: constant matrix scaled by the angle
    Eigen::Matrix2d gen;
    gen << 0, -1, 1, 0;
    Eigen::Matrix3d expected2;
    expected2 << 0, 0, -kSqrt2, 0, 0, kSqrt2, kSqrt2, -kSqrt2, 0;
    CHECK((trep(MatrixXd(0.7 * gen)) - 0.7 * expected2).norm() < 1e-15);

    // 3D, axis e1: entries at (2,4), (3,4), (5,6) in 1-based indexing
    const MatrixXd t = trep(skw3(Vector3d(1, 0, 0)));
    CHECK(t(1, 3) == doctest::Approx(-kSqrt2));
    CHECK(t(2, 3) == doctest::Approx(kSqrt2));
    CHECK(t(4, 5) == doctest::Approx(1.0));
    CHECK((t + t.transpose()).norm() == 0.0);

    CHECK(trep(MatrixXd(Matrix3d::Zero())).norm() == 0.0);

    // trep is the derivative of Trep at the identity
    oracles::Rng rng(5);
    for (int i = 0; i < 10; ++i) {
        const Vector3d r = rng.normal_vec(3);
        const double h = 1e-6;
        const MatrixXd numeric =
            (Trep(exp_so3(h * r)) - Trep(exp_so3(-h * r))) / (2.0 * h);
        CHECK((numeric - trep(skw3(r))).norm() < 1e-8);
    }
}

TEST_CASE("Trep homomorphism, unitarity, algebra consistency") {
    CHECK((Trep(Matrix3d::Identity()) - MatrixXd::Identity(6, 6)).norm() == 0.0);

    // 2D entries against the closed form
    const double th = 0.4;
    const MatrixXd t2 = Trep(rot2(th));
    CHECK(t2(0, 0) == doctest::Approx(std::cos(th) * std::cos(th)));
    CHECK(t2(0, 2) == doctest::Approx(-kSqrt2 * std::sin(th) * std::cos(th)));

    oracles::Rng rng(6);
    for (int i = 0; i < 100; ++i) {
        const Matrix3d q1 = exp_so3(rng.normal_vec(3, 1.2));
        const Matrix3d q2 = exp_so3(rng.normal_vec(3, 1.2));
        CHECK((Trep(q1 * q2) - Trep(q1) * Trep(q2)).norm() < 1e-12);
        CHECK((Trep(q1).transpose() * Trep(q1) - MatrixXd::Identity(6, 6)).norm() < 1e-12);
    }

    for (int i = 0; i < 50; ++i) {
        const Vector3d q3 = rng.normal_vec(3, 0.9);
        CHECK((exp_skew(trep(skw3(q3))) - Trep(exp_so3(q3))).norm() < 1e-10);
        const double th2 = rng.uniform(-1.5, 1.5);
        Eigen::Matrix2d g;
        g << 0, -th2, th2, 0;
        CHECK((exp_skew(trep(MatrixXd(g))) - Trep(rot2(th2))).norm() < 1e-10);
    }
}

TEST_CASE("closed-form strain-space Rodrigues formulas match the series") {
    oracles::Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        Vector3d axis = rng.normal_vec(3);
        axis.normalize();
        const double theta = rng.uniform(-kPi + 0.05, kPi - 0.05);
        CHECK((trep_rodrigues_3d(theta, axis) -
               oracles::series_exp_halved(trep(skw3(theta * axis)))).norm() < 1e-10);
        CHECK((trep_rodrigues_3d(theta, axis) - Trep(exp_so3(theta * axis))).norm() < 1e-10);

        Eigen::Matrix2d g;
        g << 0, -theta, theta, 0;
        CHECK((trep_rodrigues_2d(theta) - oracles::series_exp_halved(trep(MatrixXd(g)))).norm() <
              1e-10);
    }
}

TEST_CASE("subspace bases") {
    const SubspaceBases b3 = subspace_bases(3);
    REQUIRE(b3.spatial.size() == 3);
    REQUIRE(b3.complement.size() == 12);
    CHECK(b3.param_dim == 15);

    // h_j reproduces trep of the canonical spatial axes
    for (int j = 0; j < 3; ++j) {
        Vector3d g = Vector3d::Zero();
        g(j) = 1.0;
        CHECK((skw_upper(b3.spatial[j], 6) - trep(skw3(g))).norm() == 0.0);
    }
    for (const auto& h : b3.spatial)
        for (const auto& k : b3.complement) CHECK(std::abs(h.dot(k)) < 1e-14);

    const SubspaceBases b2 = subspace_bases(2);
    REQUIRE(b2.spatial.size() == 1);
    REQUIRE(b2.complement.size() == 2);
    // the spatial vector maps onto the 2D trep generator
    Eigen::Matrix2d gen;
    gen << 0, -1, 1, 0;
    CHECK((skw_param(b2.spatial[0], 3) - trep(MatrixXd(gen))).norm() < 1e-15);

    // complement parameters map to skews Frobenius-orthogonal to the image
    oracles::Rng rng(8);
    for (int i = 0; i < 20; ++i) {
        const VectorXd combo = rng.normal() * b2.complement[0] + rng.normal() * b2.complement[1];
        const MatrixXd p = skw_param(combo, 3);
        CHECK(is_skew(p));
        CHECK(std::abs((p.transpose() * trep(MatrixXd(gen))).trace()) < 1e-13);
    }
}
