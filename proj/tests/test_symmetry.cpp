#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "kelvin/kelvin_matrix.hpp"
#include "kelvin/rotations.hpp"
#include "kelvin/symmetry.hpp"
#include "oracles.hpp"

using namespace kelvin;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace {
constexpr double kPi = 3.14159265358979323846;

ParamVector random_params(const ClassSpec& s, oracles::Rng& rng, double q_scale = 0.8,
                          double p_scale = 0.5, double mu_scale = 0.8) {
    ParamVector z;
    z.q = rng.normal_vec(s.m_q, q_scale);
    z.p = rng.normal_vec(s.m_v, p_scale);
    z.mu = rng.normal_vec(s.m_lambda, mu_scale);
    return z;
}
}  // namespace

TEST_CASE("parameter counts per class") {
    auto counts = [](SymmetryClass c) {
        const ClassSpec& s = class_spec(c);
        return std::array<int, 4>{s.m_q, s.m_v, s.m_lambda, s.n()};
    };
    CHECK(counts(SymmetryClass::triclinic_2d) == std::array<int, 4>{1, 2, 3, 6});
    CHECK(counts(SymmetryClass::ortho_2d) == std::array<int, 4>{1, 1, 3, 5});
    CHECK(counts(SymmetryClass::tetra_2d) == std::array<int, 4>{1, 0, 3, 4});
    CHECK(counts(SymmetryClass::iso_2d) == std::array<int, 4>{0, 0, 2, 2});
    CHECK(counts(SymmetryClass::triclinic_3d) == std::array<int, 4>{3, 12, 6, 21});
    CHECK(counts(SymmetryClass::monoclinic_3d) == std::array<int, 4>{3, 6, 6, 15});
    CHECK(counts(SymmetryClass::ortho_3d) == std::array<int, 4>{3, 3, 6, 12});
    CHECK(counts(SymmetryClass::trigonal_3d) == std::array<int, 4>{3, 2, 4, 9});
    CHECK(counts(SymmetryClass::tetra_3d) == std::array<int, 4>{3, 1, 5, 9});
    CHECK(counts(SymmetryClass::cubic_3d) == std::array<int, 4>{3, 0, 3, 6});
    CHECK(counts(SymmetryClass::trans_iso_3d) == std::array<int, 4>{2, 1, 4, 7});
    CHECK(counts(SymmetryClass::iso_3d) == std::array<int, 4>{0, 0, 2, 2});
}

TEST_CASE("class names round trip") {
    for (SymmetryClass c : all_classes()) CHECK(class_from_string(to_string(c)) == c);
    CHECK_THROWS_AS(class_from_string("hexagonal"), std::invalid_argument);
}

TEST_CASE("hasse ordering") {
    using S = SymmetryClass;
    CHECK(is_at_least_as_symmetric(S::iso_3d, S::triclinic_3d));
    CHECK(is_at_least_as_symmetric(S::iso_3d, S::trigonal_3d));
    CHECK(is_at_least_as_symmetric(S::trans_iso_3d, S::tetra_3d));
    CHECK(is_at_least_as_symmetric(S::trans_iso_3d, S::trigonal_3d));
    CHECK(is_at_least_as_symmetric(S::cubic_3d, S::tetra_3d));
    CHECK(is_at_least_as_symmetric(S::tetra_3d, S::ortho_3d));
    CHECK(is_at_least_as_symmetric(S::trigonal_3d, S::monoclinic_3d));
    CHECK_FALSE(is_at_least_as_symmetric(S::cubic_3d, S::trigonal_3d));
    CHECK_FALSE(is_at_least_as_symmetric(S::trigonal_3d, S::ortho_3d));
    CHECK_FALSE(is_at_least_as_symmetric(S::ortho_3d, S::tetra_3d));
    CHECK(is_at_least_as_symmetric(S::iso_2d, S::triclinic_2d));
    CHECK_FALSE(is_at_least_as_symmetric(S::ortho_2d, S::tetra_2d));
}

TEST_CASE("build_eigvecs special columns") {
    const SpecialBasis sb2 = special_basis(2);
    const MatrixXd v_ortho = build_eigvecs(SymmetryClass::ortho_2d,
                                           (VectorXd(1) << kPi / 4).finished());
    CHECK((v_ortho.col(0) - sb2.n).norm() < 1e-15);
    CHECK((v_ortho.col(1) - sb2.y).norm() < 1e-15);

    const SpecialBasis sb3 = special_basis(3);
    const MatrixXd v_tri = build_eigvecs(SymmetryClass::trigonal_3d, Vector2d(0, 0));
    CHECK((v_tri.col(0) - sb3.n).norm() < 1e-14);
    CHECK((v_tri.col(1) - *sb3.z).norm() < 1e-14);

    const MatrixXd v_iso = build_eigvecs(SymmetryClass::iso_3d, VectorXd());
    CHECK((v_iso.col(0) - sb3.n).norm() == 0.0);
    CHECK((v_iso.col(1) - sb3.y).norm() == 0.0);
    CHECK((v_iso.col(2) - *sb3.z).norm() == 0.0);
    for (int j = 3; j < 6; ++j) CHECK(v_iso(j, j) == 1.0);

    // orthogonality for every class and random parameters
    oracles::Rng rng(21);
    for (SymmetryClass c : all_classes()) {
        const ClassSpec& s = class_spec(c);
        for (int i = 0; i < 5; ++i) {
            const MatrixXd v = build_eigvecs(c, rng.normal_vec(s.m_v, 0.7));
            CHECK((v.transpose() * v - MatrixXd::Identity(s.k, s.k)).norm() < 1e-13);
        }
        CHECK_THROWS_AS(build_eigvecs(c, VectorXd::Zero(s.m_v + 1)), std::invalid_argument);
    }
}

TEST_CASE("build_moduli placement") {
    const double bulk = 4.0, shear = 1.5;
    const VectorXd iso = build_moduli(SymmetryClass::iso_3d,
                                      (VectorXd(2) << std::log(3 * bulk), std::log(2 * shear))
                                          .finished());
    CHECK(iso(0) == doctest::Approx(3 * bulk));
    for (int i = 1; i < 6; ++i) CHECK(iso(i) == doctest::Approx(2 * shear));

    CHECK((build_moduli(SymmetryClass::cubic_3d, VectorXd::Zero(3)) -
           VectorXd::Ones(6)).norm() == 0.0);

    const VectorXd ti = build_moduli(SymmetryClass::trans_iso_3d,
                                     (VectorXd(4) << 0.1, 0.2, 0.3, 0.4).finished());
    CHECK(ti(0) == doctest::Approx(std::exp(0.1)));
    CHECK(ti(1) == doctest::Approx(std::exp(0.2)));
    CHECK(ti(2) == doctest::Approx(std::exp(0.3)));
    CHECK(ti(3) == doctest::Approx(std::exp(0.4)));
    CHECK(ti(4) == doctest::Approx(std::exp(0.4)));
    CHECK(ti(5) == doctest::Approx(std::exp(0.3)));

    // reference modulus scales all entries
    const VectorXd scaled = build_moduli(SymmetryClass::iso_2d, VectorXd::Zero(2), 7.0);
    CHECK((scaled - 7.0 * VectorXd::Ones(3)).norm() == 0.0);
}

TEST_CASE("ordered moduli") {
    const VectorXd lam = ordered_moduli(VectorXd::Zero(4));
    CHECK((lam - (VectorXd(4) << 4, 3, 2, 1).finished()).norm() == 0.0);
    CHECK(ordered_moduli((VectorXd(1) << 0.7).finished())(0) == doctest::Approx(std::exp(0.7)));

    oracles::Rng rng(22);
    for (int i = 0; i < 100; ++i) {
        const VectorXd l = ordered_moduli(rng.normal_vec(6, 2.0));
        for (int j = 0; j + 1 < 6; ++j) CHECK(l(j) > l(j + 1));
        CHECK(l(5) > 0.0);
    }
}

TEST_CASE("build_reduced patterns") {
    oracles::Rng rng(23);

    // triclinic 2D: the canonical zero at (1,3)
    for (int i = 0; i < 10; ++i) {
        const auto red = build_reduced(SymmetryClass::triclinic_2d, rng.normal_vec(3, 0.8),
                                       rng.normal_vec(2, 0.6));
        CHECK(std::abs(red.C.mat()(0, 2)) < 1e-10 * red.C.mat().norm());
        CHECK((red.V * red.moduli.asDiagonal() * red.V.transpose() - red.C.mat()).norm() <
              1e-12 * red.C.mat().norm());
    }

    // orthotropic 3D: block zeros
    const auto ortho = build_reduced(SymmetryClass::ortho_3d, rng.normal_vec(6, 0.8),
                                     rng.normal_vec(3, 0.6));
    for (int i = 0; i < 3; ++i)
        for (int j = 3; j < 6; ++j) CHECK(std::abs(ortho.C.mat()(i, j)) < 1e-13);

    // isotropic 2D with zero log-moduli is the identity
    CHECK((build_reduced(SymmetryClass::iso_2d, VectorXd::Zero(2), VectorXd()).C.mat() -
           MatrixXd::Identity(3, 3)).norm() < 1e-15);

    // every class: pattern check, canonical zeros, eigenvalue multiset
    for (SymmetryClass c : all_classes()) {
        const ClassSpec& s = class_spec(c);
        for (int i = 0; i < 5; ++i) {
            const VectorXd mu = rng.normal_vec(s.m_lambda, 0.8);
            const auto red = build_reduced(c, mu, rng.normal_vec(s.m_v, 0.6));
            const ReducedCheck chk = check_reduced_form(red.C.mat(), c, 1e-9);
            INFO(to_string(c), " violation ", chk.max_violation, " at ", chk.worst);
            CHECK(chk.ok);
            for (auto [r, col] : s.canonical_zeros)
                CHECK(std::abs(red.C.mat()(r, col)) < 1e-9 * red.C.mat().norm());
        }
    }
}

TEST_CASE("build_full assembles and round trips") {
    oracles::Rng rng(24);
    for (SymmetryClass c : all_classes()) {
        const ClassSpec& s = class_spec(c);
        const ParamVector z = random_params(s, rng);
        const BuildResult r = build_full(c, z);

        // triple reproduces the matrix
        CHECK((r.triple.assemble().mat() - r.C.mat()).norm() < 1e-10 * r.C.mat().norm());

        // eigenvalues are exp(mu) with the class multiplicities
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(r.C.mat(), Eigen::EigenvaluesOnly);
        VectorXd expected = build_moduli(c, z.mu);
        std::sort(expected.data(), expected.data() + expected.size());
        CHECK((es.eigenvalues() - expected).cwiseAbs().maxCoeff() <
              1e-9 * expected.cwiseAbs().maxCoeff());

        // q = 0 reduces to build_reduced
        ParamVector z0 = z;
        z0.q = VectorXd::Zero(s.m_q);
        CHECK((build_full(c, z0).C.mat() - build_reduced(c, z.mu, z.p).C.mat()).norm() == 0.0);

        // conjugating back by the triple's own rotation recovers the pattern
        const MatrixXd tq = Trep(r.triple.spatial_rotation);
        CHECK(check_reduced_form(tq * r.C.mat() * tq.transpose(), c, 1e-9).ok);
    }

    ParamVector bad;
    bad.q = VectorXd::Zero(1);
    bad.p = VectorXd();
    bad.mu = VectorXd::Zero(2);
    CHECK_THROWS_AS(build_full(SymmetryClass::iso_3d, bad), std::invalid_argument);
}

TEST_CASE("symmetry group commutation") {
    oracles::Rng rng(25);
    for (SymmetryClass c : all_classes()) {
        const ClassSpec& s = class_spec(c);
        for (int i = 0; i < 20; ++i) {
            const auto red = build_reduced(c, rng.normal_vec(s.m_lambda, 0.8),
                                           rng.normal_vec(s.m_v, 0.6));
            for (const MatrixXd& g : s.generators) {
                const MatrixXd w = Trep(g);
                const double comm = (red.C.mat() * w - w * red.C.mat()).norm();
                INFO(to_string(c));
                CHECK(comm <= 1e-9 * red.C.mat().norm());
            }
        }
    }
}

TEST_CASE("check_reduced_form verdicts") {
    // isotropic matrix passes every class of the same dimension
    VectorXd mu_iso(2);
    mu_iso << std::log(9.0), std::log(2.4);
    const auto iso = build_reduced(SymmetryClass::iso_3d, mu_iso, VectorXd());
    for (SymmetryClass c : all_classes()) {
        if (class_spec(c).k != 6) continue;
        CHECK(check_reduced_form(iso.C.mat(), c, 1e-9).ok);
    }

    // bone passes orthotropic, fails tetragonal (C11 != C22)
    const MatrixXd s = compliance_from_orthotropic(cortical_femoral_bone());
    const KelvinMatrix bone = voigt_to_kelvin(s.inverse());
    CHECK(check_reduced_form(bone.mat(), SymmetryClass::ortho_3d, 1e-9).ok);
    const ReducedCheck tet = check_reduced_form(bone.mat(), SymmetryClass::tetra_3d, 1e-9);
    CHECK_FALSE(tet.ok);
    CHECK(tet.worst == "C22=C11");

    // all-ones + 6 I fails every non-triclinic 3D class but passes triclinic
    const MatrixXd hostile = MatrixXd::Ones(6, 6) + 6.0 * MatrixXd::Identity(6, 6);
    for (SymmetryClass c : all_classes()) {
        if (class_spec(c).k != 6) continue;
        if (c == SymmetryClass::triclinic_3d)
            CHECK(check_reduced_form(hostile, c, 1e-9).ok);
        else
            CHECK_FALSE(check_reduced_form(hostile, c, 1e-9).ok);
    }

    // dimension mismatch is reported, not thrown
    CHECK_FALSE(check_reduced_form(MatrixXd::Identity(3, 3), SymmetryClass::iso_3d).ok);
}

TEST_CASE("hasse monotonicity of reduced forms") {
    oracles::Rng rng(26);
    for (SymmetryClass c : all_classes()) {
        const ClassSpec& s = class_spec(c);
        for (int i = 0; i < 10; ++i) {
            const auto red = build_reduced(c, rng.normal_vec(s.m_lambda, 0.8),
                                           rng.normal_vec(s.m_v, 0.6));
            for (SymmetryClass other : all_classes()) {
                if (class_spec(other).k != s.k) continue;
                if (!is_at_least_as_symmetric(c, other)) continue;
                INFO(to_string(c), " should pass ", to_string(other));
                CHECK(check_reduced_form(red.C.mat(), other, 1e-9).ok);
            }
        }
    }
}

TEST_CASE("recover_triple") {
    oracles::Rng rng(27);
    for (SymmetryClass c : all_classes()) {
        const ClassSpec& s = class_spec(c);
        for (int i = 0; i < 3; ++i) {
            const ParamVector z = random_params(s, rng);
            const BuildResult built = build_full(c, z);
            const LieTriple t = recover_triple(built.C, c);
            CHECK((t.assemble().mat() - built.C.mat()).norm() < 1e-8 * built.C.mat().norm());
        }
    }

    // wrong hypothesis: the bone matrix is not tetragonal
    const MatrixXd s = compliance_from_orthotropic(cortical_femoral_bone());
    const KelvinMatrix bone = voigt_to_kelvin(s.inverse());
    CHECK_THROWS_AS(recover_triple(bone, SymmetryClass::tetra_3d), std::runtime_error);

    // slot semantics: the bone shear moduli land on slots 4..6
    const LieTriple tb = recover_triple(bone, SymmetryClass::ortho_3d);
    CHECK(tb.moduli(3) == doctest::Approx(2 * 6.23).epsilon(1e-9));
    CHECK(tb.moduli(4) == doctest::Approx(2 * 5.61).epsilon(1e-9));
    CHECK(tb.moduli(5) == doctest::Approx(2 * 4.53).epsilon(1e-9));
}

TEST_CASE("triple validation") {
    LieTriple t;
    t.spatial_rotation = Eigen::Matrix3d::Identity();
    t.strain_rotation = MatrixXd::Identity(6, 6);
    t.moduli = VectorXd::Ones(6);
    CHECK_NOTHROW(t.validate());
    t.moduli(2) = -1.0;
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);
    t.moduli(2) = 1.0;
    t.strain_rotation(0, 1) = 0.3;
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);
}
