#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "kelvin/symmetry.hpp"

namespace kelvin {

// Counter-based per-sample random stream: the state is derived from
// (seed, sample index) alone, so any sample can be generated independently
// of evaluation order or threading.
class SampleRng {
  public:
    SampleRng(std::uint64_t seed, std::uint64_t index);
    std::uint64_t next_u64();
    double uniform();   // in (0, 1)
    double normal();    // standard normal, Box-Muller

  private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

struct GenConfig {
    SymmetryClass cls = SymmetryClass::iso_3d;
    ParamVector z0;           // deterministic part (q0, p0, mu0)
    Eigen::MatrixXd cov;      // n x n PSD covariance of the fluctuation
    bool ordering = false;    // strictly decreasing distinct moduli
    std::uint64_t seed = 0;
    double reference_modulus = 1.0;  // GPa scale applied before exp/log

    // Optional point transform mapping a log-modulus parameter to the
    // modulus itself, replacing the lognormal default ref * exp(mu). Must
    // return strictly positive values; ignored in ordering mode.
    std::function<double(double)> moduli_point_transform;
};

void validate_config(const GenConfig& cfg);
std::uint64_t config_hash(const GenConfig& cfg);

// Factor L with L L^T = cov; PSD is enforced via the symmetric
// eigendecomposition (eigenvalues below -1e-12 * trace are rejected,
// small negatives are clamped to zero).
Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& cov);

// Full parameter vectors z_i = z0 + L xi_i, xi standard normal.
std::vector<Eigen::VectorXd> sample_params(const GenConfig& cfg, int count,
                                           bool parallel = false);

// Strictly decreasing moduli; params = (tau_1..tau_{m-1}, mu_m) gives
// lambda_m = ref exp(mu_m) and lambda_k = lambda_{k+1} + ref exp(tau_k).
Eigen::VectorXd sample_ordered_moduli(const Eigen::VectorXd& params,
                                      double reference_modulus = 1.0);

struct Sample {
    Eigen::VectorXd z_fluct;  // fluctuation part of the parameters
    LieTriple triple;
    KelvinMatrix C;
};

struct SampleBatch {
    GenConfig cfg;
    std::uint64_t hash = 0;
    std::vector<Sample> samples;
};

// Builds the triple of one realization in product form: the fluctuation
// factors multiply onto the deterministic factors (Q1 Q0, V1 V0,
// Lambda1 Lambda0) rather than being added in parameter space.
LieTriple triple_from_fluctuation(SymmetryClass c, const ParamVector& z0,
                                  const Eigen::VectorXd& z_fluct, bool ordering,
                                  double reference_modulus,
                                  const std::function<double(double)>& moduli_transform = {});

SampleBatch random_kelvin(const GenConfig& cfg, int count, bool parallel = false);

struct SymmetryReport {
    int count = 0;
    int member_failures = 0;
    double worst_member_violation = 0.0;
    double mean_violation = 0.0;
    bool members_ok = false;
    bool mean_ok = false;
};

// Checks every member against member_class and the product-metric Frechet
// mean (conjugated to reduced form by its own rotation) against mean_class.
// mean_class must be at least as symmetric as member_class.
SymmetryReport ensemble_mean_symmetry_check(const SampleBatch& batch,
                                            SymmetryClass mean_class,
                                            SymmetryClass member_class,
                                            double member_tol = 1e-9,
                                            double mean_tol = 1e-9);

}  // namespace kelvin
