#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>

namespace kelvin {

inline int strain_dim(int spatial_dim) {
    if (spatial_dim != 2 && spatial_dim != 3)
        throw std::invalid_argument("spatial dimension must be 2 or 3");
    return spatial_dim * (spatial_dim + 1) / 2;
}

inline int spatial_dim_of(int k) {
    if (k == 3) return 2;
    if (k == 6) return 3;
    throw std::invalid_argument("strain dimension must be 3 or 6");
}

// Symmetric 2nd-order tensor (strain or stress), d x d.
class SymTensor2 {
  public:
    explicit SymTensor2(const Eigen::MatrixXd& m, double tol = 1e-12);
    int dim() const { return static_cast<int>(m_.rows()); }
    const Eigen::MatrixXd& mat() const { return m_; }

  private:
    Eigen::MatrixXd m_;
};

using StrainVec = Eigen::VectorXd;

// SPD elasticity matrix in the orthonormal (sqrt(2)-scaled shear) vector
// notation; k = 3 in 2D, k = 6 in 3D. Entries in GPa. Construction validates
// symmetry and rejects matrices whose smallest eigenvalue is <= 1e-12 times
// the spectral norm.
class KelvinMatrix {
  public:
    explicit KelvinMatrix(const Eigen::MatrixXd& m);
    int dim() const { return static_cast<int>(m_.rows()); }
    int spatial_dim() const { return spatial_dim_of(dim()); }
    const Eigen::MatrixXd& mat() const { return m_; }
    double det() const { return m_.determinant(); }
    KelvinMatrix inverse() const;

  private:
    Eigen::MatrixXd m_;
};

// Engineering constants of an orthotropic material. The compliance is built
// from the upper-triangle convention S_ij = -nu_ji / Y_j (i < j), so nu21,
// nu31, nu32 drive the off-diagonal entries; the reciprocal ratios are
// carried for completeness.
struct OrthotropicConstants {
    double Y1, Y2, Y3;          // GPa
    double nu21, nu12;
    double nu31, nu13;
    double nu32, nu23;
    double G12, G13, G23;       // GPa
};

// Average orthotropic constants of human cortical femoral bone.
OrthotropicConstants cortical_femoral_bone();

// Unit loading direction in 3D.
class Direction {
  public:
    explicit Direction(const Eigen::Vector3d& v);
    static Direction from_angles(double theta, double phi);
    const Eigen::Vector3d& vec() const { return v_; }

  private:
    Eigen::Vector3d v_;
};

// Orthonormal vector representation of a symmetric tensor, component order
// (11, 22, 33, sqrt2*23, sqrt2*13, sqrt2*12) in 3D and (11, 22, sqrt2*12)
// in 2D. Preserves the Frobenius inner product.
StrainVec vrep(const SymTensor2& t);
SymTensor2 vrep_inv(const StrainVec& v);

// Orthonormal volumetric/shear basis vectors of the strain representer space.
struct SpecialBasis {
    StrainVec n;                  // volumetric direction
    StrainVec y;                  // pure shear
    std::optional<StrainVec> z;   // second pure shear, 3D only
};
SpecialBasis special_basis(int spatial_dim);

// 6x6 orthotropic compliance in Voigt notation (GPa^-1), order
// (11, 22, 33, 23, 13, 12).
Eigen::MatrixXd compliance_from_orthotropic(const OrthotropicConstants& c);

// Voigt stiffness -> Kelvin matrix: K = D * C_voigt * D with
// D = diag(1, 1, 1, sqrt2, sqrt2, sqrt2).
KelvinMatrix voigt_to_kelvin(const Eigen::MatrixXd& voigt_stiffness);

// Young's modulus along direction d: 1/Y = vrep(d x d)^T C^-1 vrep(d x d).
double directional_young_modulus(const KelvinMatrix& C, const Direction& d);

}  // namespace kelvin
