#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "kelvin/kelvin_matrix.hpp"
#include "kelvin/symmetry.hpp"

namespace kelvin {

// Tuning constants of the product distance.
struct MetricWeights {
    double c_v = 1.0;  // spatial rotation factor
    double c_t = 1.0;  // strain-space rotation factor
};

enum class MetricKind { euclid, product, log_euclid };
std::string to_string(MetricKind k);
MetricKind metric_from_string(const std::string& name);

// Frobenius distance on the ambient space of symmetric matrices.
double dist_euclid(const KelvinMatrix& a, const KelvinMatrix& b);

// Bi-invariant distance ||log(Q1 Q2^T)||_F on SO(n).
double dist_rot(const Eigen::MatrixXd& q1, const Eigen::MatrixXd& q2);

// Log-Euclidean distance ||log L1 - log L2||_F on positive diagonals.
double dist_logdiag(const Eigen::VectorXd& l1, const Eigen::VectorXd& l2);

// Product distance sqrt(thL^2 + c_v thR(Q)^2 + c_t thR(V)^2) on triples.
double dist_product(const LieTriple& a, const LieTriple& b, MetricWeights w = {});

// Product distance minimized over the finite representation ambiguity:
// column sign flips of V and column permutations within groups of equal
// moduli (with the matching permutation of the moduli).
double dist_product_canonical(const LieTriple& a, const LieTriple& b, MetricWeights w = {},
                              double degeneracy_rtol = 1e-9);

// Per-factor geodesic between triples, t in [0, 1].
LieTriple geodesic_triple(const LieTriple& a, const LieTriple& b, double t);
KelvinMatrix geodesic(const LieTriple& a, const LieTriple& b, double t);

// Straight-line and full-matrix log-Euclidean interpolation.
KelvinMatrix geodesic_euclid(const KelvinMatrix& a, const KelvinMatrix& b, double t);
KelvinMatrix geodesic_log_euclid(const KelvinMatrix& a, const KelvinMatrix& b, double t);

struct PathSample {
    double t;
    KelvinMatrix C;
};

struct InterpolationPath {
    MetricKind kind;
    std::vector<PathSample> samples;
};

// Samples the geodesic at the given parameters (strictly increasing in [0,1]).
InterpolationPath interpolation_path(const KelvinMatrix& a, const KelvinMatrix& b,
                                     MetricKind kind, const std::vector<double>& ts);
InterpolationPath interpolation_path(const LieTriple& a, const LieTriple& b,
                                     const std::vector<double>& ts);

// CSV with a unit header line and columns t, det, then the upper triangle of
// C row-major (C11, C12, ..., Ckk).
void write_path_csv(std::ostream& os, const InterpolationPath& path);

std::vector<double> linspace01(int n);

}  // namespace kelvin
