#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstring>

#include "kelvin/frechet.hpp"
#include "kelvin/metrics.hpp"
#include "kelvin/rotations.hpp"
#include "kelvin/stochastic.hpp"
#include "oracles.hpp"

using namespace kelvin;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace {
GenConfig ortho_config(double sigma, std::uint64_t seed) {
    GenConfig cfg;
    cfg.cls = SymmetryClass::ortho_3d;
    cfg.z0.q = VectorXd::Zero(3);
    cfg.z0.p = VectorXd::Zero(3);
    cfg.z0.mu = (VectorXd(6) << 3.0, 2.7, 3.3, 2.2, 2.0, 1.8).finished() * 0.5;
    cfg.cov = sigma * sigma * MatrixXd::Identity(12, 12);
    cfg.seed = seed;
    return cfg;
}
}  // namespace

TEST_CASE("per-sample streams are reproducible and distinct") {
    SampleRng a(123, 7), b(123, 7), c(123, 8);
    bool all_equal = true, any_equal = false;
    for (int i = 0; i < 64; ++i) {
        const std::uint64_t x = a.next_u64();
        all_equal = all_equal && (x == b.next_u64());
        any_equal = any_equal || (x == c.next_u64());
    }
    CHECK(all_equal);
    CHECK_FALSE(any_equal);

    // normal() has sane first moments
    SampleRng r(5, 0);
    double s = 0, s2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        s += x;
        s2 += x * x;
    }
    CHECK(std::abs(s / n) < 0.01);
    CHECK(std::abs(s2 / n - 1.0) < 0.02);
}

TEST_CASE("covariance_factor") {
    MatrixXd cov(2, 2);
    cov << 4.0, 2.0, 2.0, 1.0;  // rank one, semidefinite
    const MatrixXd l = covariance_factor(cov);
    CHECK((l * l.transpose() - cov).norm() < 1e-12);

    MatrixXd indef(2, 2);
    indef << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(covariance_factor(indef), std::invalid_argument);
}

TEST_CASE("sample_params") {
    GenConfig cfg = ortho_config(0.0, 11);
    const auto zs = sample_params(cfg, 16);
    VectorXd z0(12);
    z0 << cfg.z0.q, cfg.z0.p, cfg.z0.mu;
    for (const VectorXd& z : zs) CHECK((z - z0).norm() == 0.0);

    // unit covariance: marginal means and variances converge
    cfg = ortho_config(1.0, 12);
    const int count = 100000;
    const auto samples = sample_params(cfg, count, true);
    VectorXd mean = VectorXd::Zero(12), second = VectorXd::Zero(12);
    for (const VectorXd& z : samples) {
        mean += z;
        second += (z - z0).cwiseProduct(z - z0);
    }
    mean /= count;
    second /= count;
    for (int i = 0; i < 12; ++i) {
        CHECK(std::abs(mean(i) - z0(i)) < 0.02);
        CHECK(std::abs(second(i) - 1.0) < 0.03);
    }

    // same seed gives bitwise equal draws
    const auto again = sample_params(cfg, 32);
    const auto again2 = sample_params(cfg, 32);
    for (int i = 0; i < 32; ++i)
        CHECK(std::memcmp(again[i].data(), again2[i].data(), 12 * sizeof(double)) == 0);

    GenConfig bad = cfg;
    bad.cov = MatrixXd::Identity(5, 5);
    CHECK_THROWS_AS(sample_params(bad, 1), std::invalid_argument);
}

TEST_CASE("sample_ordered_moduli never violates the ordering") {
    CHECK((sample_ordered_moduli(VectorXd::Zero(5)) -
           (VectorXd(5) << 5, 4, 3, 2, 1).finished()).norm() == 0.0);
    CHECK(sample_ordered_moduli((VectorXd(1) << -0.3).finished())(0) ==
          doctest::Approx(std::exp(-0.3)));

    oracles::Rng rng(51);
    int violations = 0;
    for (int i = 0; i < 10000; ++i) {
        const VectorXd lam = sample_ordered_moduli(rng.normal_vec(6, 1.5));
        for (int j = 0; j + 1 < 6; ++j)
            if (!(lam(j) > lam(j + 1))) ++violations;
        if (!(lam(5) > 0.0)) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("random_kelvin basics") {
    // zero covariance reproduces the deterministic build bitwise
    GenConfig cfg = ortho_config(0.0, 21);
    const SampleBatch batch = random_kelvin(cfg, 4);
    const BuildResult ref = build_full(cfg.cls, cfg.z0);
    for (const Sample& s : batch.samples)
        CHECK(std::memcmp(s.C.mat().data(), ref.C.mat().data(), 36 * sizeof(double)) == 0);

    // isotropic eigenstructure
    GenConfig iso;
    iso.cls = SymmetryClass::iso_3d;
    iso.z0.mu = (VectorXd(2) << std::log(3.0), std::log(2.0)).finished();
    iso.cov = MatrixXd::Zero(2, 2);
    const SampleBatch ib = random_kelvin(iso, 1);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(ib.samples[0].C.mat(), Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues()(5) == doctest::Approx(3.0).epsilon(1e-12));
    for (int i = 0; i < 5; ++i) CHECK(es.eigenvalues()(i) == doctest::Approx(2.0).epsilon(1e-12));

    // every realization is class-conforming after conjugation by its own Q
    cfg = ortho_config(0.25, 22);
    const SampleBatch rb = random_kelvin(cfg, 50);
    for (const Sample& s : rb.samples) {
        const MatrixXd tq = Trep(s.triple.spatial_rotation);
        CHECK(check_reduced_form(tq * s.C.mat() * tq.transpose(), cfg.cls, 1e-9).ok);
    }
}

TEST_CASE("random_kelvin is deterministic under parallel evaluation") {
    const GenConfig cfg = ortho_config(0.3, 23);
    const SampleBatch seq = random_kelvin(cfg, 500, false);
    const SampleBatch par = random_kelvin(cfg, 500, true);
    REQUIRE(seq.samples.size() == par.samples.size());
    for (std::size_t i = 0; i < seq.samples.size(); ++i) {
        CHECK(std::memcmp(seq.samples[i].C.mat().data(), par.samples[i].C.mat().data(),
                          36 * sizeof(double)) == 0);
        CHECK(std::memcmp(seq.samples[i].z_fluct.data(), par.samples[i].z_fluct.data(),
                          12 * sizeof(double)) == 0);
    }
    CHECK(seq.hash == par.hash);
}

TEST_CASE("empirical covariance converges to the target") {
    GenConfig cfg = ortho_config(0.0, 24);
    MatrixXd cov = MatrixXd::Zero(12, 12);
    // a correlated block plus heterogeneous variances
    for (int i = 0; i < 12; ++i) cov(i, i) = 0.05 + 0.01 * i;
    cov(0, 1) = cov(1, 0) = 0.02;
    cov(3, 7) = cov(7, 3) = -0.03;
    cfg.cov = cov;
    const int count = 100000;
    const SampleBatch batch = random_kelvin(cfg, count, true);
    MatrixXd emp = MatrixXd::Zero(12, 12);
    VectorXd mean = VectorXd::Zero(12);
    for (const Sample& s : batch.samples) mean += s.z_fluct;
    mean /= count;
    for (const Sample& s : batch.samples) {
        const VectorXd d = s.z_fluct - mean;
        emp += d * d.transpose();
    }
    emp /= count;
    CHECK((emp - cov).norm() / cov.norm() < 0.05);
    CHECK(mean.norm() < 0.01);
}

TEST_CASE("monte-carlo product mean approaches the deterministic reference") {
    const GenConfig cfg = ortho_config(0.05, 25);
    const SampleBatch batch = random_kelvin(cfg, 10000, true);
    std::vector<LieTriple> triples;
    triples.reserve(batch.samples.size());
    for (const Sample& s : batch.samples) triples.push_back(s.triple);
    MeanOptions opts;
    opts.parallel = true;
    const MeanResult mean = mean_product(triples, VectorXd(), MetricWeights{}, opts);
    const BuildResult ref = build_full(cfg.cls, cfg.z0);
    CHECK(dist_product(*mean.triple, ref.triple) < 0.01);
}

TEST_CASE("ensemble mean symmetry check") {
    // members orthotropic, eigen-strain fluctuating around the tetragonal point
    const Vector3d v1(0, 0, 1), v2 = Vector3d(1, 1, 0).normalized(),
                   v3 = Vector3d(-1, 1, 0).normalized();
    Eigen::Matrix3d r_tetra;
    r_tetra.col(0) = v1;
    r_tetra.col(1) = v2;
    r_tetra.col(2) = v3;
    REQUIRE(r_tetra.determinant() == doctest::Approx(1.0));

    GenConfig cfg;
    cfg.cls = SymmetryClass::ortho_3d;
    cfg.z0.q = VectorXd::Zero(3);
    cfg.z0.p = log_so3_vector(r_tetra);
    // lambda4 = lambda5 at the tetragonal point
    cfg.z0.mu = (VectorXd(6) << 1.2, 0.9, 0.5, 0.8, 0.8, 0.6).finished();
    MatrixXd cov = MatrixXd::Zero(12, 12);
    for (int i = 3; i < 6; ++i) cov(i, i) = 0.01;  // p block only
    cfg.cov = cov;
    cfg.seed = 26;

    const SampleBatch big = random_kelvin(cfg, 4000, true);
    const SymmetryReport rep =
        ensemble_mean_symmetry_check(big, SymmetryClass::tetra_3d, SymmetryClass::ortho_3d,
                                     1e-9, 0.02);
    CHECK(rep.members_ok);
    CHECK(rep.mean_ok);

    // the pattern residual shrinks with the sample count
    const SampleBatch small = random_kelvin(cfg, 40, true);
    const SymmetryReport rep_small = ensemble_mean_symmetry_check(
        small, SymmetryClass::tetra_3d, SymmetryClass::ortho_3d, 1e-9, 1.0);
    CHECK(rep.mean_violation < rep_small.mean_violation);

    // zero fluctuation: the mean equals the member form
    GenConfig det_cfg = cfg;
    det_cfg.cov = MatrixXd::Zero(12, 12);
    const SampleBatch det_batch = random_kelvin(det_cfg, 8);
    const SymmetryReport det_rep = ensemble_mean_symmetry_check(
        det_batch, SymmetryClass::tetra_3d, SymmetryClass::ortho_3d, 1e-9, 1e-9);
    CHECK(det_rep.members_ok);
    CHECK(det_rep.mean_ok);

    // mean_class equal to member_class always passes
    const SymmetryReport same = ensemble_mean_symmetry_check(
        det_batch, SymmetryClass::ortho_3d, SymmetryClass::ortho_3d, 1e-9, 1e-9);
    CHECK(same.mean_ok);

    // hasse violation is a configuration error
    CHECK_THROWS_AS(ensemble_mean_symmetry_check(det_batch, SymmetryClass::ortho_3d,
                                                 SymmetryClass::tetra_3d),
                    std::invalid_argument);
}

TEST_CASE("moduli point transform replaces the lognormal default") {
    GenConfig cfg = ortho_config(0.2, 27);
    // bounded moduli in [1, 3] through a logistic transform
    cfg.moduli_point_transform = [](double mu) { return 1.0 + 2.0 / (1.0 + std::exp(-mu)); };
    const SampleBatch batch = random_kelvin(cfg, 200);
    for (const Sample& s : batch.samples) {
        CHECK(s.triple.moduli.minCoeff() >= 1.0);
        CHECK(s.triple.moduli.maxCoeff() <= 3.0);
    }

    // the default is the lognormal map ref * exp(mu)
    GenConfig plain = ortho_config(0.2, 27);
    const SampleBatch ref = random_kelvin(plain, 5);
    GenConfig expcfg = plain;
    expcfg.moduli_point_transform = [](double mu) { return std::exp(mu); };
    const SampleBatch same = random_kelvin(expcfg, 5);
    for (int i = 0; i < 5; ++i)
        CHECK((ref.samples[i].triple.moduli - same.samples[i].triple.moduli).norm() <
              1e-14 * ref.samples[i].triple.moduli.norm());

    // a transform breaking positivity is rejected
    GenConfig bad = ortho_config(0.2, 27);
    bad.moduli_point_transform = [](double mu) { return mu - 100.0; };
    CHECK_THROWS_AS(random_kelvin(bad, 4), std::invalid_argument);
}

TEST_CASE("config hash covers the fields") {
    GenConfig a = ortho_config(0.1, 1);
    GenConfig b = a;
    CHECK(config_hash(a) == config_hash(b));
    b.seed = 2;
    CHECK(config_hash(a) != config_hash(b));
    b = a;
    b.ordering = true;
    CHECK(config_hash(a) != config_hash(b));
    b = a;
    b.z0.mu(0) += 1e-9;
    CHECK(config_hash(a) != config_hash(b));
}
