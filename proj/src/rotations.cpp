#include "kelvin/rotations.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace kelvin {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

bool is_skew(const Eigen::MatrixXd& P, double tol) {
    if (P.rows() != P.cols()) return false;
    double scale = std::max(1.0, P.norm());
    return (P + P.transpose()).norm() <= tol * scale;
}

bool is_rotation(const Eigen::MatrixXd& Q, double tol) {
    if (Q.rows() != Q.cols()) return false;
    const int n = static_cast<int>(Q.rows());
    double ortho = (Q.transpose() * Q - Eigen::MatrixXd::Identity(n, n)).norm();
    return ortho <= tol * n && Q.determinant() > 0.0;
}

void require_rotation(const Eigen::MatrixXd& Q, double tol) {
    if (Q.rows() != Q.cols())
        throw std::invalid_argument("rotation matrix must be square");
    const int n = static_cast<int>(Q.rows());
    double ortho = (Q.transpose() * Q - Eigen::MatrixXd::Identity(n, n)).norm();
    if (ortho > tol * n)
        throw std::invalid_argument("matrix is not orthogonal: ||Q^T Q - I|| = " +
                                    std::to_string(ortho));
    if (Q.determinant() < 0.0)
        throw std::invalid_argument("matrix is orthogonal but not a proper rotation (det < 0)");
}

Eigen::Matrix2d rot2(double theta) {
    Eigen::Matrix2d q;
    const double c = std::cos(theta), s = std::sin(theta);
    q << c, -s, s, c;
    return q;
}

Eigen::Matrix3d skw3(const Eigen::Vector3d& p) {
    Eigen::Matrix3d m;
    m << 0.0, -p(2), p(1),
         p(2), 0.0, -p(0),
        -p(1), p(0), 0.0;
    return m;
}

Eigen::Vector3d unskw3(const Eigen::Matrix3d& P) {
    return Eigen::Vector3d(P(2, 1), P(0, 2), P(1, 0));
}

Eigen::Matrix3d exp_so3(const Eigen::Vector3d& q) {
    const double theta = q.norm();
    const Eigen::Matrix3d K = skw3(q);
    if (theta < 1e-8) {
        // second-order series, exact to machine precision at this magnitude
        return Eigen::Matrix3d::Identity() + K + 0.5 * K * K;
    }
    const Eigen::Matrix3d R = K / theta;
    return Eigen::Matrix3d::Identity() + std::sin(theta) * R +
           (1.0 - std::cos(theta)) * R * R;
}

Eigen::MatrixXd skw_upper(const Eigen::VectorXd& p, int n) {
    if (n < 2) throw std::invalid_argument("skw_upper: dimension must be >= 2");
    const int expect = n * (n - 1) / 2;
    if (p.size() != expect)
        throw std::invalid_argument("skw_upper: expected " + std::to_string(expect) +
                                    " parameters, got " + std::to_string(p.size()));
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
    int idx = 0;
    for (int dist = n - 1; dist >= 1; --dist) {
        for (int row = n - dist; row >= 1; --row) {  // 1-based, bottom to top
            const int i = row - 1, j = row + dist - 1;
            P(i, j) = p(idx);
            P(j, i) = -p(idx);
            ++idx;
        }
    }
    return P;
}

Eigen::MatrixXd exp_skew(const Eigen::MatrixXd& P) {
    if (!is_skew(P, 1e-12))
        throw std::invalid_argument("exp_skew: input is not skew-symmetric");
    const int n = static_cast<int>(P.rows());
    if (n == 2) return rot2(P(1, 0));
    if (n == 3) return exp_so3(unskw3(P));
    // scaling and squaring with a Taylor kernel
    double norm = P.norm();
    int squarings = 0;
    Eigen::MatrixXd A = P;
    while (norm > 0.25) {
        A *= 0.5;
        norm *= 0.5;
        ++squarings;
    }
    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
    for (int k = 1; k <= 24; ++k) {
        term = term * A / static_cast<double>(k);
        result += term;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

namespace {

struct PlaneBlock {
    int i, j;      // column indices in the Schur basis spanning the plane
    double angle;  // signed rotation angle of the block
};

// Schur form of a proper rotation is block diagonal with 2x2 rotation blocks
// and 1x1 entries +-1. +1 entries contribute nothing to the log; -1 entries
// come in pairs (det = +1) and each pair spans an angle-pi plane.
void schur_planes(const Eigen::MatrixXd& Q, Eigen::MatrixXd& U,
                  std::vector<PlaneBlock>& blocks) {
    const int n = static_cast<int>(Q.rows());
    Eigen::RealSchur<Eigen::MatrixXd> schur(Q);
    U = schur.matrixU();
    const Eigen::MatrixXd& T = schur.matrixT();
    blocks.clear();
    std::vector<int> minus_ones;
    int i = 0;
    while (i < n) {
        if (i + 1 < n && std::abs(T(i + 1, i)) > 1e-12) {
            const double c = 0.5 * (T(i, i) + T(i + 1, i + 1));
            const double s = 0.5 * (T(i + 1, i) - T(i, i + 1));
            blocks.push_back({i, i + 1, std::atan2(s, c)});
            i += 2;
        } else {
            if (T(i, i) < 0.0) minus_ones.push_back(i);
            ++i;
        }
    }
    if (minus_ones.size() % 2 == 1)
        throw std::invalid_argument("log_rotation: odd count of -1 eigenvalues (det != 1?)");
    for (std::size_t m = 0; m + 1 < minus_ones.size(); m += 2)
        blocks.push_back({minus_ones[m], minus_ones[m + 1], kPi});
}

}  // namespace

Eigen::MatrixXd log_rotation(const Eigen::MatrixXd& Q) {
    require_rotation(Q, 1e-10);
    const int n = static_cast<int>(Q.rows());
    Eigen::MatrixXd U;
    std::vector<PlaneBlock> blocks;
    schur_planes(Q, U, blocks);
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (const PlaneBlock& b : blocks) {
        if (kPi - std::abs(b.angle) < 1e-5)  // cos within ~1e-10 of -1
            throw BranchBoundaryError(b.angle);
        L += b.angle * (U.col(b.j) * U.col(b.i).transpose() -
                        U.col(b.i) * U.col(b.j).transpose());
    }
    return 0.5 * (L - L.transpose());
}

std::vector<double> rotation_plane_angles(const Eigen::MatrixXd& Q) {
    require_rotation(Q, 1e-10);
    Eigen::MatrixXd U;
    std::vector<PlaneBlock> blocks;
    schur_planes(Q, U, blocks);
    std::vector<double> angles;
    angles.reserve(blocks.size());
    for (const PlaneBlock& b : blocks) angles.push_back(std::abs(b.angle));
    std::sort(angles.rbegin(), angles.rend());
    return angles;
}

Eigen::Vector3d log_so3_vector(const Eigen::Matrix3d& Q) {
    return unskw3(log_rotation(Q));
}

Eigen::MatrixXd trep(const Eigen::MatrixXd& R) {
    if (!is_skew(R, 1e-12)) throw std::invalid_argument("trep: input is not skew");
    if (R.rows() == 3) {
        const Eigen::Vector3d r = unskw3(R);
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(6, 6);
        const double s2 = std::sqrt(2.0);
        T(0, 4) = s2 * r(1);  T(0, 5) = -s2 * r(2);
        T(1, 3) = -s2 * r(0); T(1, 5) = s2 * r(2);
        T(2, 3) = s2 * r(0);  T(2, 4) = -s2 * r(1);
        T(3, 4) = r(2);       T(3, 5) = -r(1);
        T(4, 5) = r(0);
        Eigen::MatrixXd full = T - T.transpose();
        return full;
    }
    if (R.rows() == 2) {
        const double theta = R(1, 0);
        Eigen::Matrix3d T;
        const double s2 = std::sqrt(2.0);
        T << 0.0, 0.0, -s2,
             0.0, 0.0, s2,
             s2, -s2, 0.0;
        return theta * T;
    }
    throw std::invalid_argument("trep: spatial dimension must be 2 or 3");
}

Eigen::MatrixXd Trep(const Eigen::MatrixXd& Q) {
    require_rotation(Q, 1e-10);
    if (Q.rows() == 3) {
        Eigen::MatrixXd T(6, 6);
        const double s2 = std::sqrt(2.0);
        auto q = [&](int i, int j) { return Q(i - 1, j - 1); };
        T << q(1,1)*q(1,1), q(1,2)*q(1,2), q(1,3)*q(1,3),
                 s2*q(1,2)*q(1,3), s2*q(1,1)*q(1,3), s2*q(1,1)*q(1,2),
             q(2,1)*q(2,1), q(2,2)*q(2,2), q(2,3)*q(2,3),
                 s2*q(2,2)*q(2,3), s2*q(2,1)*q(2,3), s2*q(2,2)*q(2,1),
             q(3,1)*q(3,1), q(3,2)*q(3,2), q(3,3)*q(3,3),
                 s2*q(3,3)*q(3,2), s2*q(3,3)*q(3,1), s2*q(3,1)*q(3,2),
             s2*q(2,1)*q(3,1), s2*q(2,2)*q(3,2), s2*q(2,3)*q(3,3),
                 q(2,2)*q(3,3)+q(2,3)*q(3,2), q(2,1)*q(3,3)+q(2,3)*q(3,1), q(2,1)*q(3,2)+q(2,2)*q(3,1),
             s2*q(1,1)*q(3,1), s2*q(1,2)*q(3,2), s2*q(1,3)*q(3,3),
                 q(1,2)*q(3,3)+q(1,3)*q(3,2), q(1,1)*q(3,3)+q(1,3)*q(3,1), q(1,1)*q(3,2)+q(1,2)*q(3,1),
             s2*q(1,1)*q(2,1), s2*q(1,2)*q(2,2), s2*q(1,3)*q(2,3),
                 q(1,2)*q(2,3)+q(1,3)*q(2,2), q(1,1)*q(2,3)+q(1,3)*q(2,1), q(1,1)*q(2,2)+q(1,2)*q(2,1);
        return T;
    }
    if (Q.rows() == 2) {
        const double c = Q(0, 0), s = Q(1, 0);
        Eigen::Matrix3d T;
        const double s2 = std::sqrt(2.0);
        T << c * c, s * s, -s2 * s * c,
             s * s, c * c, s2 * s * c,
             s2 * s * c, -s2 * s * c, c * c - s * s;
        return T;
    }
    throw std::invalid_argument("Trep: spatial dimension must be 2 or 3");
}

Eigen::MatrixXd trep_rodrigues_3d(double theta, const Eigen::Vector3d& axis) {
    const Eigen::MatrixXd R = trep(skw3(axis));
    const Eigen::MatrixXd R2 = R * R;
    const Eigen::MatrixXd R3 = R2 * R;
    const Eigen::MatrixXd R4 = R2 * R2;
    const double s = std::sin(theta), v = 1.0 - std::cos(theta);
    return Eigen::MatrixXd::Identity(6, 6) + s * R + v * R2 +
           (s * v / 3.0) * (R + R3) + (v * v / 6.0) * (R2 + R4);
}

Eigen::Matrix3d trep_rodrigues_2d(double theta) {
    Eigen::Matrix2d gen;
    gen << 0.0, -1.0, 1.0, 0.0;
    const Eigen::Matrix3d R = trep(gen);
    const Eigen::Matrix3d R2 = R * R;
    return Eigen::Matrix3d::Identity() + 0.5 * std::sin(2.0 * theta) * R +
           0.25 * (1.0 - std::cos(2.0 * theta)) * R2;
}

SubspaceBases subspace_bases(int spatial_dim) {
    SubspaceBases b;
    if (spatial_dim == 3) {
        b.param_dim = 15;
        auto e = [](int one_based) {
            Eigen::VectorXd v = Eigen::VectorXd::Zero(15);
            v(one_based - 1) = 1.0;
            return v;
        };
        const double s2 = std::sqrt(2.0);
        b.spatial = {-s2 * e(9) + s2 * e(13) + e(11),
                     s2 * e(3) - s2 * e(8) - e(7),
                     -s2 * e(1) + s2 * e(2) + e(12)};
        b.complement = {e(4), e(5), e(6), e(10), e(14), e(15),
                        e(9) + e(13), e(3) + e(8), e(1) + e(2),
                        e(9) - e(13) + 2.0 * s2 * e(11),
                        e(3) - e(8) + 2.0 * s2 * e(7),
                        e(1) - e(2) + 2.0 * s2 * e(12)};
        return b;
    }
    if (spatial_dim == 2) {
        b.param_dim = 3;
        auto g = [](int one_based) {
            Eigen::VectorXd v = Eigen::VectorXd::Zero(3);
            v(one_based - 1) = 1.0;
            return v;
        };
        const double s2 = std::sqrt(2.0);
        b.spatial = {-s2 * (g(1) + g(2))};
        b.complement = {s2 * (g(1) - g(2)), g(3)};
        return b;
    }
    throw std::invalid_argument("subspace_bases: spatial dimension must be 2 or 3");
}

Eigen::MatrixXd skw_param(const Eigen::VectorXd& p, int k) {
    if (k == 3) {
        if (p.size() != 3) throw std::invalid_argument("skw_param: need 3 parameters for so(3)");
        return skw3(Eigen::Vector3d(p(0), p(1), p(2)));
    }
    if (k == 2) {
        if (p.size() != 1) throw std::invalid_argument("skw_param: need 1 parameter for so(2)");
        Eigen::Matrix2d m;
        m << 0.0, -p(0), p(0), 0.0;
        return m;
    }
    return skw_upper(p, k);
}

}  // namespace kelvin
