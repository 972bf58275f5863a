#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "kelvin/kelvin_matrix.hpp"
#include "kelvin/metrics.hpp"
#include "kelvin/symmetry.hpp"

namespace kelvin {

struct MeanOptions {
    double grad_tol = 1e-11;
    int max_iter = 200;
    bool parallel = false;
};

struct MeanResult {
    KelvinMatrix mean;
    std::optional<LieTriple> triple;
    double variance = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Validates positivity and normalizes the weight vector to unit sum
// (rejecting sums off by more than 1e-12 before normalization is not needed;
// callers pass already-normalized or raw positive weights).
Eigen::VectorXd normalized_weights(const Eigen::VectorXd& w, std::size_t count);

// Weighted arithmetic mean; exact minimizer of the Euclidean variance.
MeanResult mean_euclid(const std::vector<KelvinMatrix>& items, const Eigen::VectorXd& weights);

// Geometric mean exp(sum w log Lambda) of positive diagonals.
Eigen::VectorXd mean_logdiag(const std::vector<Eigen::VectorXd>& lambdas,
                             const Eigen::VectorXd& weights);

// Karcher mean on SO(n) by the fixed-point iteration
// Q <- exp(sum_j w_j log(Q_j Q^T)) Q, started from the member with the
// smallest weighted squared distance sum. Requires the ensemble to sit in a
// geodesic ball of radius < pi/2 around that member.
Eigen::MatrixXd mean_rotation(const std::vector<Eigen::MatrixXd>& qs,
                              const Eigen::VectorXd& weights, MeanOptions opts = {},
                              int* iterations_out = nullptr);

// Product-metric Frechet mean: factor-wise means (the product distance is a
// weighted sum of factor distances, so the minimization decouples).
MeanResult mean_product(const std::vector<LieTriple>& items, const Eigen::VectorXd& weights,
                        MetricWeights w = {}, MeanOptions opts = {});

}  // namespace kelvin
