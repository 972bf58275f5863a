#include "kelvin/kelvin_matrix.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

namespace kelvin {

namespace {
const double kSqrt2 = std::sqrt(2.0);
}

SymTensor2::SymTensor2(const Eigen::MatrixXd& m, double tol) {
    if (m.rows() != m.cols() || (m.rows() != 2 && m.rows() != 3))
        throw std::invalid_argument("SymTensor2: expected a 2x2 or 3x3 matrix");
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (asym > tol * scale)
        throw std::invalid_argument("SymTensor2: matrix is not symmetric, max asymmetry " +
                                    std::to_string(asym));
    m_ = 0.5 * (m + m.transpose());
}

KelvinMatrix::KelvinMatrix(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols() || (m.rows() != 3 && m.rows() != 6))
        throw std::invalid_argument("KelvinMatrix: expected a 3x3 or 6x6 matrix");
    const double asym = (m - m.transpose()).norm();
    if (asym > 1e-10 * std::max(1.0, m.norm()))
        throw std::invalid_argument("KelvinMatrix: matrix is not symmetric, ||C - C^T|| = " +
                                    std::to_string(asym));
    m_ = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
    if (lmin <= 1e-12 * lmax)
        throw std::invalid_argument("KelvinMatrix: not positive definite, smallest eigenvalue " +
                                    std::to_string(lmin) + " vs spectral norm " +
                                    std::to_string(lmax));
}

KelvinMatrix KelvinMatrix::inverse() const {
    return KelvinMatrix(m_.inverse());
}

OrthotropicConstants cortical_femoral_bone() {
    OrthotropicConstants c;
    c.Y1 = 12.0;  c.Y2 = 13.4;  c.Y3 = 20.0;
    c.nu21 = 0.422; c.nu12 = 0.376;
    c.nu31 = 0.371; c.nu13 = 0.222;
    c.nu32 = 0.350; c.nu23 = 0.235;
    c.G12 = 4.53; c.G13 = 5.61; c.G23 = 6.23;
    return c;
}

Direction::Direction(const Eigen::Vector3d& v) : v_(v) {
    if (std::abs(v.norm() - 1.0) > 1e-12)
        throw std::invalid_argument("Direction: vector is not unit length, |v| = " +
                                    std::to_string(v.norm()));
}

Direction Direction::from_angles(double theta, double phi) {
    Eigen::Vector3d v(std::sin(theta) * std::cos(phi),
                      std::sin(theta) * std::sin(phi),
                      std::cos(theta));
    return Direction(v / v.norm());
}

StrainVec vrep(const SymTensor2& t) {
    const Eigen::MatrixXd& m = t.mat();
    if (t.dim() == 3) {
        StrainVec v(6);
        v << m(0, 0), m(1, 1), m(2, 2),
             kSqrt2 * m(1, 2), kSqrt2 * m(0, 2), kSqrt2 * m(0, 1);
        return v;
    }
    StrainVec v(3);
    v << m(0, 0), m(1, 1), kSqrt2 * m(0, 1);
    return v;
}

SymTensor2 vrep_inv(const StrainVec& v) {
    if (v.size() == 6) {
        Eigen::Matrix3d m;
        m << v(0), v(5) / kSqrt2, v(4) / kSqrt2,
             v(5) / kSqrt2, v(1), v(3) / kSqrt2,
             v(4) / kSqrt2, v(3) / kSqrt2, v(2);
        return SymTensor2(m);
    }
    if (v.size() == 3) {
        Eigen::Matrix2d m;
        m << v(0), v(2) / kSqrt2,
             v(2) / kSqrt2, v(1);
        return SymTensor2(m);
    }
    throw std::invalid_argument("vrep_inv: vector length must be 3 or 6");
}

SpecialBasis special_basis(int spatial_dim) {
    SpecialBasis b;
    if (spatial_dim == 3) {
        b.n = StrainVec(6);
        b.n << 1, 1, 1, 0, 0, 0;
        b.n /= std::sqrt(3.0);
        b.y = StrainVec(6);
        b.y << -1, 1, 0, 0, 0, 0;
        b.y /= std::sqrt(2.0);
        StrainVec z(6);
        z << 1, 1, -2, 0, 0, 0;
        b.z = z / std::sqrt(6.0);
        return b;
    }
    if (spatial_dim == 2) {
        b.n = StrainVec(3);
        b.n << 1, 1, 0;
        b.n /= std::sqrt(2.0);
        b.y = StrainVec(3);
        b.y << -1, 1, 0;
        b.y /= std::sqrt(2.0);
        return b;
    }
    throw std::invalid_argument("special_basis: spatial dimension must be 2 or 3");
}

Eigen::MatrixXd compliance_from_orthotropic(const OrthotropicConstants& c) {
    for (double v : {c.Y1, c.Y2, c.Y3, c.G12, c.G13, c.G23})
        if (!(v > 0.0))
            throw std::invalid_argument("compliance_from_orthotropic: moduli must be positive");
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(6, 6);
    s(0, 0) = 1.0 / c.Y1;
    s(1, 1) = 1.0 / c.Y2;
    s(2, 2) = 1.0 / c.Y3;
    s(0, 1) = -c.nu21 / c.Y2;
    s(0, 2) = -c.nu31 / c.Y3;
    s(1, 2) = -c.nu32 / c.Y3;
    s(1, 0) = s(0, 1);
    s(2, 0) = s(0, 2);
    s(2, 1) = s(1, 2);
    s(3, 3) = 1.0 / c.G23;
    s(4, 4) = 1.0 / c.G13;
    s(5, 5) = 1.0 / c.G12;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin <= 0.0)
        throw std::invalid_argument(
            "compliance_from_orthotropic: resulting compliance is not SPD, eigenvalue " +
            std::to_string(lmin));
    return s;
}

KelvinMatrix voigt_to_kelvin(const Eigen::MatrixXd& voigt_stiffness) {
    if (voigt_stiffness.rows() != 6 || voigt_stiffness.cols() != 6)
        throw std::invalid_argument("voigt_to_kelvin: expected a 6x6 matrix");
    Eigen::VectorXd d(6);
    d << 1, 1, 1, kSqrt2, kSqrt2, kSqrt2;
    // KelvinMatrix constructor enforces symmetry and SPD of the input
    return KelvinMatrix(d.asDiagonal() * voigt_stiffness * d.asDiagonal());
}

double directional_young_modulus(const KelvinMatrix& C, const Direction& d) {
    if (C.dim() != 6)
        throw std::invalid_argument("directional_young_modulus: requires a 3D Kelvin matrix");
    const Eigen::Vector3d& u = d.vec();
    const StrainVec nn = vrep(SymTensor2(u * u.transpose()));
    const double inv_y = nn.dot(C.mat().ldlt().solve(nn));
    if (!(inv_y > 0.0))
        throw std::runtime_error("directional_young_modulus: non-positive compliance projection");
    return 1.0 / inv_y;
}

}  // namespace kelvin
