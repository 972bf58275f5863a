#include "kelvin/stochastic.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "kelvin/frechet.hpp"
#include "kelvin/parallel.hpp"
#include "kelvin/rotations.hpp"

namespace kelvin {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}
}  // namespace

SampleRng::SampleRng(std::uint64_t seed, std::uint64_t index) {
    state_ = mix64(seed + kGolden * (index + 1));
    state_ ^= mix64(index + 0x6A09E667F3BCC909ull);
}

std::uint64_t SampleRng::next_u64() {
    state_ += kGolden;
    return mix64(state_);
}

double SampleRng::uniform() {
    // 53-bit mantissa in (0, 1)
    return (static_cast<double>(next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

double SampleRng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

void validate_config(const GenConfig& cfg) {
    validate_params(cfg.cls, cfg.z0);
    const int n = class_spec(cfg.cls).n();
    if (cfg.cov.rows() != n || cfg.cov.cols() != n)
        throw std::invalid_argument("GenConfig: covariance must be " + std::to_string(n) + "x" +
                                    std::to_string(n) + " for class " + to_string(cfg.cls));
    if ((cfg.cov - cfg.cov.transpose()).norm() > 1e-12 * std::max(1.0, cfg.cov.norm()))
        throw std::invalid_argument("GenConfig: covariance must be symmetric");
    if (!(cfg.reference_modulus > 0.0))
        throw std::invalid_argument("GenConfig: reference modulus must be positive");
}

std::uint64_t config_hash(const GenConfig& cfg) {
    // FNV-1a over the canonical byte content
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto absorb = [&](const void* data, std::size_t size) {
        const unsigned char* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ull;
        }
    };
    const std::string name = to_string(cfg.cls);
    absorb(name.data(), name.size());
    auto absorb_vec = [&](const Eigen::VectorXd& v) {
        for (int i = 0; i < v.size(); ++i) {
            const double x = v(i);
            absorb(&x, sizeof(double));
        }
    };
    absorb_vec(cfg.z0.q);
    absorb_vec(cfg.z0.p);
    absorb_vec(cfg.z0.mu);
    for (int i = 0; i < cfg.cov.rows(); ++i)
        for (int j = 0; j < cfg.cov.cols(); ++j) {
            const double x = cfg.cov(i, j);
            absorb(&x, sizeof(double));
        }
    const unsigned char ord = cfg.ordering ? 1 : 0;
    absorb(&ord, 1);
    const unsigned char transformed = cfg.moduli_point_transform ? 1 : 0;
    absorb(&transformed, 1);
    absorb(&cfg.seed, sizeof(cfg.seed));
    absorb(&cfg.reference_modulus, sizeof(double));
    return h;
}

Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& cov) {
    const int n = static_cast<int>(cov.rows());
    if (n == 0) return cov;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (cov + cov.transpose()));
    const double tr = std::max(es.eigenvalues().sum(), 1.0);
    Eigen::VectorXd d = es.eigenvalues();
    for (int i = 0; i < n; ++i) {
        if (d(i) < -1e-12 * tr)
            throw std::invalid_argument("covariance_factor: matrix is not positive semidefinite "
                                        "(eigenvalue " + std::to_string(d(i)) + ")");
        d(i) = std::sqrt(std::max(d(i), 0.0));
    }
    return es.eigenvectors() * d.asDiagonal();
}

std::vector<Eigen::VectorXd> sample_params(const GenConfig& cfg, int count, bool parallel) {
    validate_config(cfg);
    const int n = class_spec(cfg.cls).n();
    const Eigen::MatrixXd L = covariance_factor(cfg.cov);
    Eigen::VectorXd z0(n);
    z0 << cfg.z0.q, cfg.z0.p, cfg.z0.mu;
    std::vector<Eigen::VectorXd> out(count);
    parallel_for(
        count,
        [&](std::size_t i) {
            SampleRng rng(cfg.seed, i);
            Eigen::VectorXd xi(n);
            for (int j = 0; j < n; ++j) xi(j) = rng.normal();
            out[i] = z0 + L * xi;
        },
        parallel);
    return out;
}

Eigen::VectorXd sample_ordered_moduli(const Eigen::VectorXd& params, double reference_modulus) {
    return ordered_moduli(params, reference_modulus);
}

LieTriple triple_from_fluctuation(SymmetryClass c, const ParamVector& z0,
                                  const Eigen::VectorXd& z_fluct, bool ordering,
                                  double reference_modulus,
                                  const std::function<double(double)>& moduli_transform) {
    const ClassSpec& spec = class_spec(c);
    if (z_fluct.size() != spec.n())
        throw std::invalid_argument("triple_from_fluctuation: wrong fluctuation size");
    const Eigen::VectorXd q1 = z_fluct.head(spec.m_q);
    const Eigen::VectorXd p1 = z_fluct.segment(spec.m_q, spec.m_v);
    const Eigen::VectorXd mu1 = z_fluct.tail(spec.m_lambda);

    LieTriple t;
    // spatial factor Q1 Q0
    const Eigen::MatrixXd q0m = spatial_rotation_from_params(c, z0.q);
    t.spatial_rotation = (q1.size() > 0 && q1.norm() > 0.0)
                             ? Eigen::MatrixXd(spatial_rotation_from_params(c, q1) * q0m)
                             : q0m;
    // strain factor V1 V0 with V1 = V(p1) V(0)^T
    const Eigen::MatrixXd v0 = build_eigvecs(c, z0.p);
    if (p1.size() > 0 && p1.norm() > 0.0) {
        const Eigen::MatrixXd w1 = build_eigvecs(c, p1) *
                                   build_eigvecs(c, Eigen::VectorXd::Zero(spec.m_v)).transpose();
        t.strain_rotation = w1 * v0;
    } else {
        t.strain_rotation = v0;
    }
    // moduli: log-parameters are additive
    const Eigen::VectorXd mu = z0.mu + mu1;
    if (ordering) {
        t.moduli = place_moduli(c, ordered_moduli(mu, reference_modulus));
    } else if (moduli_transform) {
        Eigen::VectorXd distinct(mu.size());
        for (int i = 0; i < mu.size(); ++i) {
            distinct(i) = moduli_transform(mu(i));
            if (!(distinct(i) > 0.0))
                throw std::invalid_argument(
                    "triple_from_fluctuation: moduli point transform produced a "
                    "non-positive modulus");
        }
        t.moduli = place_moduli(c, distinct);
    } else {
        t.moduli = build_moduli(c, mu, reference_modulus);
    }
    return t;
}

SampleBatch random_kelvin(const GenConfig& cfg, int count, bool parallel) {
    validate_config(cfg);
    const ClassSpec& spec = class_spec(cfg.cls);
    const int n = spec.n();
    const Eigen::MatrixXd L = covariance_factor(cfg.cov);

    SampleBatch batch;
    batch.cfg = cfg;
    batch.hash = config_hash(cfg);
    const Sample placeholder{Eigen::VectorXd(), LieTriple{},
                             KelvinMatrix(Eigen::MatrixXd::Identity(spec.k, spec.k))};
    std::vector<Sample> storage(count, placeholder);
    parallel_for(
        count,
        [&](std::size_t i) {
            SampleRng rng(cfg.seed, i);
            Eigen::VectorXd xi(n);
            for (int j = 0; j < n; ++j) xi(j) = rng.normal();
            Eigen::VectorXd fluct = L * xi;
            LieTriple t = triple_from_fluctuation(cfg.cls, cfg.z0, fluct, cfg.ordering,
                                                  cfg.reference_modulus,
                                                  cfg.moduli_point_transform);
            storage[i] = Sample{std::move(fluct), t, t.assemble()};
        },
        parallel);
    batch.samples = std::move(storage);
    return batch;
}

SymmetryReport ensemble_mean_symmetry_check(const SampleBatch& batch, SymmetryClass mean_class,
                                            SymmetryClass member_class, double member_tol,
                                            double mean_tol) {
    if (!is_at_least_as_symmetric(mean_class, member_class))
        throw std::invalid_argument("ensemble_mean_symmetry_check: " + to_string(mean_class) +
                                    " is not at least as symmetric as " +
                                    to_string(member_class));
    SymmetryReport rep;
    rep.count = static_cast<int>(batch.samples.size());
    if (batch.samples.empty())
        throw std::invalid_argument("ensemble_mean_symmetry_check: empty batch");

    for (const Sample& s : batch.samples) {
        const Eigen::MatrixXd tq = Trep(s.triple.spatial_rotation);
        const Eigen::MatrixXd reduced = tq * s.C.mat() * tq.transpose();
        const ReducedCheck chk = check_reduced_form(reduced, member_class, member_tol);
        rep.worst_member_violation = std::max(rep.worst_member_violation, chk.max_violation);
        if (!chk.ok) ++rep.member_failures;
    }
    rep.members_ok = rep.member_failures == 0;

    std::vector<LieTriple> triples;
    triples.reserve(batch.samples.size());
    for (const Sample& s : batch.samples) triples.push_back(s.triple);
    const MeanResult mean = mean_product(triples, Eigen::VectorXd());
    const Eigen::MatrixXd tq = Trep(mean.triple->spatial_rotation);
    const Eigen::MatrixXd reduced = tq * mean.mean.mat() * tq.transpose();
    const ReducedCheck chk = check_reduced_form(reduced, mean_class, mean_tol);
    rep.mean_violation = chk.max_violation;
    rep.mean_ok = chk.ok;
    return rep;
}

}  // namespace kelvin
