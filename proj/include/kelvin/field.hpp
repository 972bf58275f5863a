#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <vector>

#include "kelvin/metrics.hpp"
#include "kelvin/stochastic.hpp"
#include "kelvin/symmetry.hpp"

namespace kelvin {

struct Grid1D {
    Eigen::VectorXd x;  // strictly increasing, N >= 2
    static Grid1D uniform(int n, double a = 0.0, double b = 1.0);
    int size() const { return static_cast<int>(x.size()); }
};
void validate_grid(const Grid1D& g);

// Matern covariance family; closed forms for nu in {1/2, 3/2, 5/2} and the
// Bessel-function expression otherwise.
struct MaternCov {
    double nu = 0.5;
    double ell = 0.2;
    double sigma2 = 1.0;
};
double matern_cov(double h, const MaternCov& m);

// Discrete Karhunen-Loeve decomposition of a covariance kernel on a grid with
// trapezoidal quadrature weights: eigenpairs of W^{1/2} K W^{1/2}, modes
// orthonormal under the weighted inner product, eigenvalues descending.
struct KLExpansion {
    Eigen::VectorXd eigenvalues;   // descending, clamped at zero
    Eigen::MatrixXd modes;         // N x N, column l is r_l on the grid
    Eigen::VectorXd quad_weights;  // trapezoidal weights
    Eigen::VectorXd alphas() const { return eigenvalues.cwiseSqrt(); }
    int rank_for_fraction(double fraction) const;  // smallest r capturing the trace share
    Eigen::MatrixXd reconstruct(int rank = -1) const;  // sum of mu_l r_l r_l^T
};

KLExpansion kl_decompose(const Grid1D& grid, const Eigen::MatrixXd& kernel_matrix);
KLExpansion kl_decompose(const Grid1D& grid,
                         const std::function<double(double, double)>& kernel);

// Recovers the uncorrelated unit-variance coordinates of a sampled scalar
// field by weighted projection onto the modes (validation utility).
Eigen::VectorXd kl_project(const KLExpansion& kl, const Eigen::VectorXd& field_values,
                           int rank = -1);

struct FieldPoint {
    Eigen::VectorXd z_fluct;
    LieTriple triple;
    KelvinMatrix C;
};

struct FieldSample {
    int sample_index = 0;
    std::vector<FieldPoint> points;
};

// Correlated random field of Kelvin matrices: separable covariance
// cov_z(x, y) = rho(|x - y|) * cross_cov, with rho the unit-variance Matern
// correlation. Realizations are built per grid point in product form, as in
// random_kelvin.
struct FieldConfig {
    SymmetryClass cls = SymmetryClass::iso_3d;
    ParamVector z0;
    MaternCov matern;
    Eigen::MatrixXd cross_cov;  // n x n PSD covariance at lag 0
    Grid1D grid;
    double trunc_fraction = 1.0;  // KL trace fraction kept (rank override below)
    int rank = -1;                // explicit KL rank, -1 = from trunc_fraction
    std::uint64_t seed = 0;
    bool ordering = false;
    double reference_modulus = 1.0;
};

std::vector<FieldSample> sample_random_field(const FieldConfig& cfg, int count,
                                             bool parallel = false);

// Deterministic interpolation field between two endpoints.
struct InterpField {
    Grid1D grid;
    MetricKind kind;
    std::vector<KelvinMatrix> values;
};

InterpField interpolate_field(const LieTriple& a, const LieTriple& b, const Grid1D& grid);
InterpField interpolate_field(const KelvinMatrix& a, const KelvinMatrix& b, const Grid1D& grid,
                              MetricKind kind);

// CSV with columns x, det, lambda_1..lambda_k, then the upper triangle of C.
void write_field_csv(std::ostream& os, const InterpField& field);

}  // namespace kelvin
