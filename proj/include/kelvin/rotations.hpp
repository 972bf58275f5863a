#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace kelvin {

// Thrown by log_rotation when some invariant plane is rotated by an angle at
// the principal-branch boundary (pi), where the logarithm is not unique.
class BranchBoundaryError : public std::runtime_error {
  public:
    explicit BranchBoundaryError(double angle)
        : std::runtime_error("rotation logarithm at branch boundary: plane angle " +
                             std::to_string(angle) + " is within tolerance of pi"),
          plane_angle(angle) {}
    double plane_angle;
};

bool is_skew(const Eigen::MatrixXd& P, double tol = 1e-14);
bool is_rotation(const Eigen::MatrixXd& Q, double tol = 1e-12);
void require_rotation(const Eigen::MatrixXd& Q, double tol = 1e-10);

// 2D rotation by theta.
Eigen::Matrix2d rot2(double theta);

// Cross-product (axial vector) parametrization of so(3): skw3(p) x = p cross x.
Eigen::Matrix3d skw3(const Eigen::Vector3d& p);
Eigen::Vector3d unskw3(const Eigen::Matrix3d& P);

// Rodrigues formula, q = theta * axis.
Eigen::Matrix3d exp_so3(const Eigen::Vector3d& q);

// Strict-upper-triangle parametrization of so(n) for n > 3: indices run over
// the upper diagonals from the outermost inward, each diagonal filled bottom
// to top. For n = 6 the parameter vector has 15 entries with p1 at (1,6).
Eigen::MatrixXd skw_upper(const Eigen::VectorXd& p, int n);

// Matrix exponential of a skew matrix (closed form for n <= 3, scaling and
// squaring otherwise).
Eigen::MatrixXd exp_skew(const Eigen::MatrixXd& P);

// Principal-branch logarithm of a proper rotation via the real Schur form.
// Throws BranchBoundaryError when a plane angle is pi within tolerance.
Eigen::MatrixXd log_rotation(const Eigen::MatrixXd& Q);

// Rotation angles of the invariant planes of Q (absolute values, descending).
std::vector<double> rotation_plane_angles(const Eigen::MatrixXd& Q);

// Principal-branch rotation vector of Q in SO(3), norm <= pi.
Eigen::Vector3d log_so3_vector(const Eigen::Matrix3d& Q);

// Lie algebra map trep: so(d) -> so(k), k = d(d+1)/2, d in {2,3}.
Eigen::MatrixXd trep(const Eigen::MatrixXd& R);

// Induced strain-space rotation Trep: SO(d) -> SO(k).
Eigen::MatrixXd Trep(const Eigen::MatrixXd& Q);

// Closed-form evaluation of Trep(exp(theta * skw3(axis))) without forming the
// spatial rotation: I + sin t * R + (1-cos t) R^2 + sin t (1-cos t)(R+R^3)/3
// + (1-cos t)^2 (R^2+R^4)/6 with R = trep(skw3(axis)).
Eigen::MatrixXd trep_rodrigues_3d(double theta, const Eigen::Vector3d& axis);

// Closed-form evaluation of the 2D analogue Trep(rot2(theta)) as
// I + (sin 2t / 2) R + ((1 - cos 2t)/4) R^2 with the constant R = trep(so(2)).
Eigen::Matrix3d trep_rodrigues_2d(double theta);

// Bases of the parameter space of so(k) split into the spatially induced part
// (spanned by h_j, the images of the canonical spatial axes under trep) and
// its orthogonal complement (spanned by k_j).
struct SubspaceBases {
    int param_dim;                          // 3 for d=2, 15 for d=3
    std::vector<Eigen::VectorXd> spatial;    // h_1..h_{dim so(d)}
    std::vector<Eigen::VectorXd> complement; // k_1..k_{param_dim - |spatial|}
};
SubspaceBases subspace_bases(int spatial_dim);

// Maps a parameter vector of so(k) to the skew matrix, using the axial-vector
// convention for k = 3 and the strict-upper-triangle schema for k > 3.
Eigen::MatrixXd skw_param(const Eigen::VectorXd& p, int k);

}  // namespace kelvin
