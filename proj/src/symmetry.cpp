#include "kelvin/symmetry.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "kelvin/rotations.hpp"

namespace kelvin {

namespace {

constexpr double kPi = 3.14159265358979323846;
const double kSqrt2 = std::sqrt(2.0);

Eigen::MatrixXd rz(double a) { return exp_so3(Eigen::Vector3d(0, 0, a)); }
Eigen::MatrixXd rx(double a) { return exp_so3(Eigen::Vector3d(a, 0, 0)); }

LinearConstraint eq(int i1, int j1, int i2, int j2, double coeff, const std::string& label) {
    // C(i1,j1) - coeff * C(i2,j2) = 0
    return LinearConstraint{{{i1, j1, 1.0}, {i2, j2, -coeff}}, label};
}

LinearConstraint diff_eq(int i1, int j1, int i2, int j2, int i3, int j3,
                         const std::string& label) {
    // C(i1,j1) - (C(i2,j2) - C(i3,j3)) = 0
    return LinearConstraint{{{i1, j1, 1.0}, {i2, j2, -1.0}, {i3, j3, 1.0}}, label};
}

std::vector<std::pair<int, int>> block_zeros_3d() {
    return {{0, 3}, {0, 4}, {0, 5}, {1, 3}, {1, 4}, {1, 5},
            {2, 3}, {2, 4}, {2, 5}, {3, 4}, {3, 5}, {4, 5}};
}

std::map<SymmetryClass, ClassSpec> make_registry() {
    std::map<SymmetryClass, ClassSpec> reg;

    auto add = [&](ClassSpec s) { reg.emplace(s.cls, std::move(s)); };

    // ---- 2D ----
    {
        ClassSpec s;
        s.cls = SymmetryClass::iso_2d;
        s.spatial_dim = 2; s.k = 3;
        s.m_q = 0; s.m_v = 0; s.m_lambda = 2;
        s.eigen_slot = {0, 1, 1};
        s.invariant_zeros = {{0, 2}, {1, 2}};
        s.constraints = {eq(1, 1, 0, 0, 1.0, "C22=C11"),
                         diff_eq(2, 2, 0, 0, 0, 1, "C33=C11-C12")};
        s.canonical_zeros = s.invariant_zeros;
        s.generators = {Eigen::MatrixXd(rot2(0.83))};
        s.hasse_parents = {};
        add(s);
    }
    {
        ClassSpec s;
        s.cls = SymmetryClass::tetra_2d;
        s.spatial_dim = 2; s.k = 3;
        s.m_q = 1; s.m_v = 0; s.m_lambda = 3;
        s.eigen_slot = {0, 1, 2};
        s.invariant_zeros = {{0, 2}, {1, 2}};
        s.constraints = {eq(1, 1, 0, 0, 1.0, "C22=C11")};
        s.canonical_zeros = s.invariant_zeros;
        s.generators = {Eigen::MatrixXd(rot2(kPi / 2))};
        s.hasse_parents = {SymmetryClass::iso_2d};
        add(s);
    }
    {
        ClassSpec s;
        s.cls = SymmetryClass::ortho_2d;
        s.spatial_dim = 2; s.k = 3;
        s.m_q = 1; s.m_v = 1; s.m_lambda = 3;
        s.eigen_slot = {0, 1, 2};
        s.invariant_zeros = {{0, 2}, {1, 2}};
        s.canonical_zeros = s.invariant_zeros;
        s.generators = {Eigen::MatrixXd(rot2(kPi))};
        s.hasse_parents = {SymmetryClass::tetra_2d};
        add(s);
    }
    {
        ClassSpec s;
        s.cls = SymmetryClass::triclinic_2d;
        s.spatial_dim = 2; s.k = 3;
        s.m_q = 1; s.m_v = 2; s.m_lambda = 3;
        s.eigen_slot = {0, 1, 2};
        s.invariant_zeros = {};  // the class constrains nothing beyond SPD
        s.canonical_zeros = {{0, 2}};
        s.generators = {};
        s.hasse_parents = {SymmetryClass::ortho_2d};
        add(s);
    }

    // ---- 3D ----
    {
        ClassSpec s;
        s.cls = SymmetryClass::iso_3d;
        s.spatial_dim = 3; s.k = 6;
        s.m_q = 0; s.m_v = 0; s.m_lambda = 2;
        s.eigen_slot = {0, 1, 1, 1, 1, 1};
        s.invariant_zeros = block_zeros_3d();
        s.constraints = {eq(1, 1, 0, 0, 1.0, "C22=C11"), eq(2, 2, 0, 0, 1.0, "C33=C11"),
                         eq(0, 2, 0, 1, 1.0, "C13=C12"), eq(1, 2, 0, 1, 1.0, "C23=C12"),
                         diff_eq(3, 3, 0, 0, 0, 1, "C44=C11-C12"),
                         eq(4, 4, 3, 3, 1.0, "C55=C44"), eq(5, 5, 3, 3, 1.0, "C66=C44")};
        s.canonical_zeros = s.invariant_zeros;
        s.generators = {exp_so3(Eigen::Vector3d(0.3, -0.5, 0.4)),
                        exp_so3(Eigen::Vector3d(-0.7, 0.2, 0.5))};
        s.hasse_parents = {};
        add(s);
    }
    {
        ClassSpec s;
        s.cls = SymmetryClass::cubic_3d;
        s.spatial_dim = 3; s.k = 6;
        s.m_q = 3; s.m_v = 0; s.m_lambda = 3;
        s.eigen_slot = {0, 1, 1, 2, 2, 2};
        s.invariant_zeros = block_zeros_3d();
        s.constraints = {eq(1, 1, 0, 0, 1.0, "C22=C11"), eq(2, 2, 0, 0, 1.0, "C33=C11"),
                         eq(0, 2, 0, 1, 1.0, "C13=C12"), eq(1, 2, 0, 1, 1.0, "C23=C12"),
                         eq(4, 4, 3, 3, 1.0, "C55=C44"), eq(5, 5, 3, 3, 1.0, "C66=C44")};
        s.canonical_zeros = s.invariant_zeros;
        s.generators = {rz(kPi / 2), rx(kPi / 2)};
        s.hasse_parents = {SymmetryClass::iso_3d};
        add(s);
    }
    {
        ClassSpec s;
        s.cls = SymmetryClass::trans_iso_3d;
        s.spatial_dim = 3; s.k = 6;
        s.m_q = 2; s.m_v = 1; s.m_lambda = 4;
        s.eigen_slot = {0, 1, 2, 3, 3, 2};
        s.invariant_zeros = block_zeros_3d();
        s.constraints = {eq(1, 1, 0, 0, 1.0, "C22=C11"), eq(1, 2, 0, 2, 1.0, "C23=C13"),
                         eq(4, 4, 3, 3, 1.0, "C55=C44"),
                         diff_eq(5, 5, 0, 0, 0, 1, "C66=C11-C12")};
        s.canonical_zeros = s.invariant_zeros;
        s.generators = {rz(0.83)};
        s.hasse_parents = {SymmetryClass::iso_3d};
        add(s);
    }
    {
        ClassSpec s;
        s.cls = SymmetryClass::trigonal_3d;
        s.spatial_dim = 3; s.k = 6;
        s.m_q = 3; s.m_v = 2; s.m_lambda = 4;
        s.eigen_slot = {0, 1, 2, 2, 3, 3};
        s.invariant_zeros = {{0, 4}, {0, 5}, {1, 4}, {1, 5}, {2, 3},
                             {2, 4}, {2, 5}, {3, 4}, {3, 5}};
        s.constraints = {eq(1, 1, 0, 0, 1.0, "C22=C11"), eq(1, 2, 0, 2, 1.0, "C23=C13"),
                         eq(1, 3, 0, 3, -1.0, "C24=-C14"),
                         eq(4, 4, 3, 3, 1.0, "C55=C44"),
                         eq(4, 5, 0, 3, kSqrt2, "C56=sqrt2*C14"),
                         diff_eq(5, 5, 0, 0, 0, 1, "C66=C11-C12")};
        s.canonical_zeros = s.invariant_zeros;
        s.generators = {rz(2.0 * kPi / 3.0), rx(kPi)};
        s.hasse_parents = {SymmetryClass::trans_iso_3d};
        add(s);
    }
    {
        ClassSpec s;
        s.cls = SymmetryClass::tetra_3d;
        s.spatial_dim = 3; s.k = 6;
        s.m_q = 3; s.m_v = 1; s.m_lambda = 5;
        s.eigen_slot = {0, 1, 2, 3, 3, 4};
        s.invariant_zeros = block_zeros_3d();
        s.constraints = {eq(1, 1, 0, 0, 1.0, "C22=C11"), eq(1, 2, 0, 2, 1.0, "C23=C13"),
                         eq(4, 4, 3, 3, 1.0, "C55=C44")};
        s.canonical_zeros = s.invariant_zeros;
        s.generators = {rz(kPi / 2), rx(kPi)};
        s.hasse_parents = {SymmetryClass::cubic_3d, SymmetryClass::trans_iso_3d};
        add(s);
    }
    {
        ClassSpec s;
        s.cls = SymmetryClass::ortho_3d;
        s.spatial_dim = 3; s.k = 6;
        s.m_q = 3; s.m_v = 3; s.m_lambda = 6;
        s.eigen_slot = {0, 1, 2, 3, 4, 5};
        s.invariant_zeros = block_zeros_3d();
        s.canonical_zeros = s.invariant_zeros;
        s.generators = {rz(kPi), rx(kPi)};
        s.hasse_parents = {SymmetryClass::tetra_3d};
        add(s);
    }
    {
        ClassSpec s;
        s.cls = SymmetryClass::monoclinic_3d;
        s.spatial_dim = 3; s.k = 6;
        s.m_q = 3; s.m_v = 6; s.m_lambda = 6;
        s.eigen_slot = {0, 1, 2, 3, 4, 5};
        // invariance under the two-fold rotation about axis 1 leaves (5,6)
        // free; that zero is induced by the normalizing rotation instead
        s.invariant_zeros = {{0, 4}, {0, 5}, {1, 4}, {1, 5},
                             {2, 4}, {2, 5}, {3, 4}, {3, 5}};
        s.canonical_zeros = s.invariant_zeros;
        s.canonical_zeros.push_back({4, 5});
        s.generators = {rx(kPi)};
        s.hasse_parents = {SymmetryClass::ortho_3d, SymmetryClass::trigonal_3d};
        add(s);
    }
    {
        ClassSpec s;
        s.cls = SymmetryClass::triclinic_3d;
        s.spatial_dim = 3; s.k = 6;
        s.m_q = 3; s.m_v = 12; s.m_lambda = 6;
        s.eigen_slot = {0, 1, 2, 3, 4, 5};
        s.invariant_zeros = {};
        s.canonical_zeros = {{0, 3}, {0, 4}, {0, 5}};
        s.generators = {};
        s.hasse_parents = {SymmetryClass::monoclinic_3d};
        add(s);
    }
    return reg;
}

const std::map<SymmetryClass, ClassSpec>& registry() {
    static const std::map<SymmetryClass, ClassSpec> reg = make_registry();
    return reg;
}

}  // namespace

std::string to_string(SymmetryClass c) {
    switch (c) {
        case SymmetryClass::iso_2d: return "iso_2d";
        case SymmetryClass::tetra_2d: return "tetra_2d";
        case SymmetryClass::ortho_2d: return "ortho_2d";
        case SymmetryClass::triclinic_2d: return "triclinic_2d";
        case SymmetryClass::iso_3d: return "iso_3d";
        case SymmetryClass::cubic_3d: return "cubic_3d";
        case SymmetryClass::trans_iso_3d: return "trans_iso_3d";
        case SymmetryClass::trigonal_3d: return "trigonal_3d";
        case SymmetryClass::tetra_3d: return "tetra_3d";
        case SymmetryClass::ortho_3d: return "ortho_3d";
        case SymmetryClass::monoclinic_3d: return "monoclinic_3d";
        case SymmetryClass::triclinic_3d: return "triclinic_3d";
    }
    throw std::logic_error("unknown symmetry class");
}

SymmetryClass class_from_string(const std::string& name) {
    for (SymmetryClass c : all_classes())
        if (to_string(c) == name) return c;
    throw std::invalid_argument("unknown symmetry class name: " + name);
}

const std::vector<SymmetryClass>& all_classes() {
    static const std::vector<SymmetryClass> cs = {
        SymmetryClass::iso_2d,       SymmetryClass::tetra_2d,
        SymmetryClass::ortho_2d,     SymmetryClass::triclinic_2d,
        SymmetryClass::iso_3d,       SymmetryClass::cubic_3d,
        SymmetryClass::trans_iso_3d, SymmetryClass::trigonal_3d,
        SymmetryClass::tetra_3d,     SymmetryClass::ortho_3d,
        SymmetryClass::monoclinic_3d, SymmetryClass::triclinic_3d};
    return cs;
}

const ClassSpec& class_spec(SymmetryClass c) { return registry().at(c); }

bool is_at_least_as_symmetric(SymmetryClass a, SymmetryClass b) {
    if (a == b) return true;
    // walk upward from b through the parents; a must be reachable
    std::vector<SymmetryClass> frontier = {b};
    std::vector<SymmetryClass> seen;
    while (!frontier.empty()) {
        SymmetryClass cur = frontier.back();
        frontier.pop_back();
        for (SymmetryClass p : class_spec(cur).hasse_parents) {
            if (p == a) return true;
            if (std::find(seen.begin(), seen.end(), p) == seen.end()) {
                seen.push_back(p);
                frontier.push_back(p);
            }
        }
    }
    return false;
}

void validate_params(SymmetryClass c, const ParamVector& z) {
    const ClassSpec& s = class_spec(c);
    if (z.q.size() != s.m_q)
        throw std::invalid_argument(to_string(c) + ": expected " + std::to_string(s.m_q) +
                                    " rotation parameters, got " + std::to_string(z.q.size()));
    if (z.p.size() != s.m_v)
        throw std::invalid_argument(to_string(c) + ": expected " + std::to_string(s.m_v) +
                                    " eigen-strain parameters, got " + std::to_string(z.p.size()));
    if (z.mu.size() != s.m_lambda)
        throw std::invalid_argument(to_string(c) + ": expected " + std::to_string(s.m_lambda) +
                                    " log-moduli, got " + std::to_string(z.mu.size()));
}

void LieTriple::validate() const {
    const int d = spatial_dim();
    const int kk = k();
    if (strain_dim(d) != kk)
        throw std::invalid_argument("LieTriple: inconsistent dimensions");
    require_rotation(spatial_rotation);
    const double ortho =
        (strain_rotation.transpose() * strain_rotation - Eigen::MatrixXd::Identity(kk, kk)).norm();
    if (ortho > 1e-10 * kk)
        throw std::invalid_argument("LieTriple: strain rotation is not orthogonal");
    if (!(moduli.minCoeff() > 0.0))
        throw std::invalid_argument("LieTriple: moduli must be strictly positive");
}

KelvinMatrix LieTriple::assemble() const {
    validate();
    const Eigen::MatrixXd tq = Trep(spatial_rotation);
    return KelvinMatrix(tq.transpose() * strain_rotation * moduli.asDiagonal() *
                        strain_rotation.transpose() * tq);
}

Eigen::MatrixXd spatial_rotation_from_params(SymmetryClass c, const Eigen::VectorXd& q) {
    const ClassSpec& s = class_spec(c);
    if (q.size() != s.m_q)
        throw std::invalid_argument("spatial_rotation_from_params: wrong parameter count");
    if (s.spatial_dim == 2)
        return s.m_q == 0 ? Eigen::MatrixXd(Eigen::Matrix2d::Identity())
                          : Eigen::MatrixXd(rot2(q(0)));
    if (s.m_q == 0) return Eigen::Matrix3d::Identity();
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    for (int i = 0; i < s.m_q; ++i) v(i) = q(i);
    return exp_so3(v);
}

Eigen::MatrixXd build_eigvecs(SymmetryClass c, const Eigen::VectorXd& p) {
    const ClassSpec& s = class_spec(c);
    if (p.size() != s.m_v)
        throw std::invalid_argument(to_string(c) + ": expected " + std::to_string(s.m_v) +
                                    " eigen-strain parameters, got " + std::to_string(p.size()));
    const SpecialBasis sb = special_basis(s.spatial_dim);

    switch (c) {
        case SymmetryClass::iso_2d:
        case SymmetryClass::tetra_2d: {
            Eigen::Matrix3d v;
            v.col(0) = sb.n;
            v.col(1) = sb.y;
            v.col(2) = Eigen::Vector3d(0, 0, 1);
            return v;
        }
        case SymmetryClass::ortho_2d: {
            const double cs = std::cos(p(0)), sn = std::sin(p(0));
            Eigen::Matrix3d v;
            v << cs, -sn, 0, sn, cs, 0, 0, 0, 1;
            return v;
        }
        case SymmetryClass::triclinic_2d: {
            const double c1 = std::cos(p(0)), s1 = std::sin(p(0));
            const double c2 = std::cos(p(1)), s2 = std::sin(p(1));
            Eigen::Matrix3d vi, vii;
            vi << 1, 0, 0, 0, c1, -s1, 0, s1, c1;
            vii << c2, -s2, 0, s2, c2, 0, 0, 0, 1;
            return vi * vii;
        }
        case SymmetryClass::iso_3d:
        case SymmetryClass::cubic_3d: {
            Eigen::MatrixXd v = Eigen::MatrixXd::Identity(6, 6);
            v.col(0) = sb.n;
            v.col(1) = sb.y;
            v.col(2) = *sb.z;
            return v;
        }
        case SymmetryClass::tetra_3d:
        case SymmetryClass::trans_iso_3d: {
            const double a = p(0);
            Eigen::MatrixXd v = Eigen::MatrixXd::Identity(6, 6);
            Eigen::VectorXd v1(6), v2(6);
            v1 << std::cos(a), std::cos(a), kSqrt2 * std::sin(a), 0, 0, 0;
            v2 << std::sin(a), std::sin(a), -kSqrt2 * std::cos(a), 0, 0, 0;
            v.col(0) = v1 / kSqrt2;
            v.col(1) = v2 / kSqrt2;
            v.col(2) = sb.y;
            return v;
        }
        case SymmetryClass::trigonal_3d: {
            // s1 = 0 gives the co-axial case v1 = n, v2 = z
            const double a = std::atan(1.0 / kSqrt2) + p(0);
            const double t = p(1);
            Eigen::MatrixXd v(6, 6);
            Eigen::VectorXd col(6);
            col << std::cos(a), std::cos(a), kSqrt2 * std::sin(a), 0, 0, 0;
            v.col(0) = col / kSqrt2;
            col << std::sin(a), std::sin(a), -kSqrt2 * std::cos(a), 0, 0, 0;
            v.col(1) = col / kSqrt2;
            col << std::cos(t), -std::cos(t), 0, -kSqrt2 * std::sin(t), 0, 0;
            v.col(2) = col / kSqrt2;
            col << 0, 0, 0, 0, -std::sin(t), std::cos(t);
            v.col(3) = col;
            col << std::sin(t), -std::sin(t), 0, kSqrt2 * std::cos(t), 0, 0;
            v.col(4) = col / kSqrt2;
            col << 0, 0, 0, 0, std::cos(t), std::sin(t);
            v.col(5) = col;
            return v;
        }
        case SymmetryClass::ortho_3d: {
            Eigen::MatrixXd v = Eigen::MatrixXd::Identity(6, 6);
            v.topLeftCorner(3, 3) = exp_so3(Eigen::Vector3d(p(0), p(1), p(2)));
            return v;
        }
        case SymmetryClass::monoclinic_3d: {
            Eigen::MatrixXd v = Eigen::MatrixXd::Identity(6, 6);
            v.topLeftCorner(4, 4) = exp_skew(skw_upper(p, 4));
            return v;
        }
        case SymmetryClass::triclinic_3d: {
            const SubspaceBases bases = subspace_bases(3);
            Eigen::VectorXd vec = Eigen::VectorXd::Zero(15);
            for (int j = 0; j < 12; ++j) vec += p(j) * bases.complement[j];
            return exp_skew(skw_upper(vec, 6));
        }
    }
    throw std::logic_error("build_eigvecs: unhandled class");
}

Eigen::VectorXd place_moduli(SymmetryClass c, const Eigen::VectorXd& distinct) {
    const ClassSpec& s = class_spec(c);
    if (distinct.size() != s.m_lambda)
        throw std::invalid_argument("place_moduli: expected " + std::to_string(s.m_lambda) +
                                    " distinct moduli");
    Eigen::VectorXd lam(s.k);
    for (int i = 0; i < s.k; ++i) lam(i) = distinct(s.eigen_slot[i]);
    return lam;
}

Eigen::VectorXd build_moduli(SymmetryClass c, const Eigen::VectorXd& mu,
                             double reference_modulus) {
    if (!mu.allFinite()) throw std::invalid_argument("build_moduli: non-finite log-moduli");
    return place_moduli(c, (reference_modulus * mu.array().exp()).matrix());
}

Eigen::VectorXd ordered_moduli(const Eigen::VectorXd& params, double reference_modulus) {
    const int m = static_cast<int>(params.size());
    if (m < 1) throw std::invalid_argument("ordered_moduli: need at least one parameter");
    Eigen::VectorXd lam(m);
    lam(m - 1) = reference_modulus * std::exp(params(m - 1));
    for (int i = m - 2; i >= 0; --i)
        lam(i) = lam(i + 1) + reference_modulus * std::exp(params(i));
    return lam;
}

namespace {

// Residuals of the canonical zeros and equality constraints of the class,
// evaluated on Trep(Q(q)) C Trep(Q(q))^T.
Eigen::VectorXd reduction_residual(const ClassSpec& s, const Eigen::MatrixXd& C,
                                   const Eigen::VectorXd& q) {
    const Eigen::MatrixXd Q = spatial_rotation_from_params(s.cls, q);
    const Eigen::MatrixXd tq = Trep(Q);
    const Eigen::MatrixXd M = tq * C * tq.transpose();
    Eigen::VectorXd r(s.canonical_zeros.size() + s.constraints.size());
    int idx = 0;
    for (auto [i, j] : s.canonical_zeros) r(idx++) = M(i, j);
    for (const LinearConstraint& lc : s.constraints) {
        double v = 0.0;
        for (const auto& t : lc.terms) v += t.coeff * M(t.i, t.j);
        r(idx++) = v;
    }
    return r;
}

// Damped Gauss-Newton (Levenberg style) with deterministic multi-start on the
// m_q rotation parameters. Returns true on ||r||_inf <= tol.
bool solve_reduction(const ClassSpec& s, const Eigen::MatrixXd& C, Eigen::VectorXd& q_out,
                     double tol_abs) {
    const int m = s.m_q;
    std::vector<Eigen::VectorXd> starts;
    starts.push_back(Eigen::VectorXd::Zero(m));
    if (m == 1) {
        for (double a : {0.3, -0.3, 0.7, -0.7, 1.1, -1.1, 1.5, -1.5}) {
            Eigen::VectorXd v(1);
            v << a;
            starts.push_back(v);
        }
    } else {
        // low-discrepancy angles on a few axes
        const double g = 0.61803398874989485;  // golden ratio conjugate
        for (int t = 1; t <= 23; ++t) {
            Eigen::VectorXd v = Eigen::VectorXd::Zero(m);
            double u = std::fmod(g * t, 1.0);
            double w = std::fmod(0.7548776662466927 * t, 1.0);
            double a = std::fmod(0.8191725133961645 * t, 1.0);
            v(0) = (u - 0.5) * 2.8;
            if (m > 1) v(1) = (w - 0.5) * 2.8;
            if (m > 2) v(2) = (a - 0.5) * 2.8;
            starts.push_back(v);
        }
    }

    double best_norm = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_q = Eigen::VectorXd::Zero(m);
    for (const Eigen::VectorXd& q0 : starts) {
        Eigen::VectorXd q = q0;
        Eigen::VectorXd r = reduction_residual(s, C, q);
        double lambda = 1e-8;
        for (int iter = 0; iter < 80; ++iter) {
            if (r.cwiseAbs().maxCoeff() <= tol_abs) break;
            const int nr = static_cast<int>(r.size());
            Eigen::MatrixXd J(nr, m);
            const double h = 1e-6;
            for (int c_i = 0; c_i < m; ++c_i) {
                Eigen::VectorXd qp = q, qm = q;
                qp(c_i) += h;
                qm(c_i) -= h;
                J.col(c_i) = (reduction_residual(s, C, qp) - reduction_residual(s, C, qm)) /
                             (2.0 * h);
            }
            Eigen::MatrixXd JtJ = J.transpose() * J;
            Eigen::VectorXd Jtr = J.transpose() * r;
            bool stepped = false;
            for (int damp = 0; damp < 12; ++damp) {
                Eigen::MatrixXd A = JtJ + lambda * Eigen::MatrixXd::Identity(m, m);
                Eigen::VectorXd dq = A.ldlt().solve(-Jtr);
                Eigen::VectorXd rq = reduction_residual(s, C, q + dq);
                if (rq.squaredNorm() < r.squaredNorm()) {
                    q += dq;
                    r = rq;
                    lambda = std::max(lambda * 0.3, 1e-12);
                    stepped = true;
                    break;
                }
                lambda *= 8.0;
            }
            if (!stepped) break;
        }
        const double rn = r.cwiseAbs().maxCoeff();
        if (rn < best_norm) {
            best_norm = rn;
            best_q = q;
        }
        if (best_norm <= tol_abs) break;
    }
    q_out = best_q;
    return best_norm <= tol_abs;
}

// Root of the (1,3) entry of the rotated 2D matrix over one period, by grid
// scan plus bisection. The entry is a zero-mean trigonometric polynomial in
// the rotation angle, so a sign change exists unless it vanishes identically.
double reduce_angle_2d(const Eigen::MatrixXd& C, double tol_abs) {
    auto f = [&](double theta) {
        const Eigen::MatrixXd tq = Trep(rot2(theta));
        return (tq * C * tq.transpose())(0, 2);
    };
    if (std::abs(f(0.0)) <= tol_abs) return 0.0;
    const int n_grid = 720;
    double prev_t = -kPi / 2, prev_f = f(prev_t);
    double best_t = 0.0, best_f = std::abs(f(0.0));
    for (int i = 1; i <= n_grid; ++i) {
        const double t = -kPi / 2 + kPi * i / n_grid;
        const double ft = f(t);
        if (std::abs(ft) < best_f) {
            best_f = std::abs(ft);
            best_t = t;
        }
        if (prev_f == 0.0 || (prev_f < 0) != (ft < 0)) {
            double lo = prev_t, hi = t, flo = prev_f;
            for (int b = 0; b < 200; ++b) {
                const double mid = 0.5 * (lo + hi);
                const double fm = f(mid);
                if (std::abs(fm) <= tol_abs * 1e-3) return mid;
                if ((flo < 0) != (fm < 0)) {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            return 0.5 * (lo + hi);
        }
        prev_t = t;
        prev_f = ft;
    }
    return best_t;  // no sign change: entry is (numerically) identically zero
}

}  // namespace

ReducedResult build_reduced(SymmetryClass c, const Eigen::VectorXd& mu,
                            const Eigen::VectorXd& p, double reference_modulus) {
    const ClassSpec& s = class_spec(c);
    Eigen::MatrixXd V = build_eigvecs(c, p);
    const Eigen::VectorXd lam = build_moduli(c, mu, reference_modulus);
    Eigen::MatrixXd M = V * lam.asDiagonal() * V.transpose();

    if (c == SymmetryClass::triclinic_2d) {
        const double theta = reduce_angle_2d(M, 1e-12 * std::max(1.0, M.norm()));
        const Eigen::MatrixXd tq = Trep(rot2(theta));
        M = tq * M * tq.transpose();
        V = tq * V;
    } else if (c == SymmetryClass::triclinic_3d) {
        Eigen::VectorXd q;
        if (!solve_reduction(s, M, q, 1e-11 * std::max(1.0, M.norm())))
            throw std::runtime_error("build_reduced: canonical reduction did not converge");
        const Eigen::MatrixXd tq = Trep(spatial_rotation_from_params(c, q));
        M = tq * M * tq.transpose();
        V = tq * V;
    }
    return ReducedResult{KelvinMatrix(0.5 * (M + M.transpose())), V, lam};
}

BuildResult build_full(SymmetryClass c, const ParamVector& z, double reference_modulus) {
    validate_params(c, z);
    ReducedResult red = build_reduced(c, z.mu, z.p, reference_modulus);
    const Eigen::MatrixXd Q = spatial_rotation_from_params(c, z.q);
    const Eigen::MatrixXd tq = Trep(Q);
    const Eigen::MatrixXd C = tq.transpose() * red.C.mat() * tq;
    LieTriple triple{Q, red.V, red.moduli};
    return BuildResult{KelvinMatrix(C), triple};
}

ReducedCheck check_reduced_form(const Eigen::MatrixXd& C, SymmetryClass c, double tol) {
    const ClassSpec& s = class_spec(c);
    ReducedCheck res;
    if (C.rows() != s.k || C.cols() != s.k) {
        res.ok = false;
        res.max_violation = std::numeric_limits<double>::infinity();
        res.worst = "dimension mismatch";
        return res;
    }
    const double scale = std::max(C.norm(), 1e-300);
    res.max_violation = 0.0;
    res.worst = "";
    auto consider = [&](double v, const std::string& what) {
        const double rel = std::abs(v) / scale;
        if (rel > res.max_violation) {
            res.max_violation = rel;
            res.worst = what;
        }
    };
    for (auto [i, j] : s.invariant_zeros)
        consider(C(i, j), "C" + std::to_string(i + 1) + std::to_string(j + 1) + " != 0");
    for (const LinearConstraint& lc : s.constraints) {
        double v = 0.0;
        for (const auto& t : lc.terms) v += t.coeff * C(t.i, t.j);
        consider(v, lc.label);
    }
    res.ok = res.max_violation <= tol;
    return res;
}

namespace {

struct SlotGroup {
    int mu_index;
    std::vector<int> slots;
};

std::vector<SlotGroup> slot_groups(const ClassSpec& s) {
    std::vector<SlotGroup> groups;
    for (int m = 0; m < s.m_lambda; ++m) {
        SlotGroup g;
        g.mu_index = m;
        for (int i = 0; i < s.k; ++i)
            if (s.eigen_slot[i] == m) g.slots.push_back(i);
        groups.push_back(g);
    }
    return groups;
}

}  // namespace

LieTriple recover_triple(const KelvinMatrix& C, SymmetryClass c, double tol) {
    const ClassSpec& s = class_spec(c);
    if (C.dim() != s.k)
        throw std::invalid_argument("recover_triple: matrix dimension does not match class");

    // 1. find the group-reduction rotation
    Eigen::VectorXd q = Eigen::VectorXd::Zero(s.m_q);
    if (s.m_q > 0) {
        if (!solve_reduction(s, C.mat(), q, tol * std::max(1.0, C.mat().norm())))
            throw std::runtime_error("recover_triple: no rotation brings the matrix to the " +
                                     to_string(c) + " pattern; wrong class hypothesis?");
    }
    const Eigen::MatrixXd Q = spatial_rotation_from_params(c, q);
    const Eigen::MatrixXd tq = Trep(Q);
    const Eigen::MatrixXd M = tq * C.mat() * tq.transpose();

    const ReducedCheck chk = check_reduced_form(M, c, std::max(tol, 1e-9));
    if (!chk.ok)
        throw std::runtime_error("recover_triple: reduced matrix violates the " + to_string(c) +
                                 " pattern (" + chk.worst + ", relative " +
                                 std::to_string(chk.max_violation) + ")");

    // 2. eigendecompose the reduced matrix
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()));
    const Eigen::VectorXd evals = es.eigenvalues();   // ascending
    const Eigen::MatrixXd evecs = es.eigenvectors();

    // 3. cluster numerically equal eigenvalues
    struct Cluster {
        double value;
        std::vector<int> cols;
    };
    std::vector<Cluster> clusters;
    const double scale = evals.cwiseAbs().maxCoeff();
    for (int i = 0; i < s.k; ++i) {
        if (!clusters.empty() && std::abs(evals(i) - clusters.back().value) <= 1e-6 * scale) {
            clusters.back().cols.push_back(i);
        } else {
            clusters.push_back({evals(i), {i}});
        }
    }

    // 4. greedily match class slot groups to clusters by subspace alignment
    const Eigen::MatrixXd canon = build_eigvecs(c, Eigen::VectorXd::Zero(s.m_v));
    std::vector<SlotGroup> groups = slot_groups(s);
    std::vector<int> remaining(clusters.size());
    for (std::size_t ci = 0; ci < clusters.size(); ++ci)
        remaining[ci] = static_cast<int>(clusters[ci].cols.size());
    std::vector<std::vector<Eigen::VectorXd>> taken(clusters.size());

    Eigen::MatrixXd V(s.k, s.k);
    Eigen::VectorXd lam(s.k);
    // process larger groups first so multiplicity demands are met
    std::vector<int> order(groups.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return groups[a].slots.size() > groups[b].slots.size();
    });

    for (int gi : order) {
        const SlotGroup& g = groups[gi];
        const int gsize = static_cast<int>(g.slots.size());
        Eigen::MatrixXd target(s.k, gsize);
        for (int j = 0; j < gsize; ++j) target.col(j) = canon.col(g.slots[j]);

        // score clusters by how much of the target lies in their remaining span
        int best_ci = -1;
        double best_score = -1.0;
        for (std::size_t ci = 0; ci < clusters.size(); ++ci) {
            if (remaining[ci] < gsize) continue;
            Eigen::MatrixXd B(s.k, clusters[ci].cols.size());
            for (std::size_t j = 0; j < clusters[ci].cols.size(); ++j)
                B.col(j) = evecs.col(clusters[ci].cols[j]);
            // deflate already taken directions
            for (const Eigen::VectorXd& t : taken[ci])
                B -= t * (t.transpose() * B);
            const double score = (B.transpose() * target).squaredNorm();
            if (score > best_score) {
                best_score = score;
                best_ci = static_cast<int>(ci);
            }
        }
        if (best_ci < 0)
            throw std::runtime_error(
                "recover_triple: eigenvalue multiplicities incompatible with class " +
                to_string(c));

        // orthonormal basis of the remaining cluster subspace
        Eigen::MatrixXd B(s.k, clusters[best_ci].cols.size());
        for (std::size_t j = 0; j < clusters[best_ci].cols.size(); ++j)
            B.col(j) = evecs.col(clusters[best_ci].cols[j]);
        Eigen::MatrixXd rem = B;
        for (const Eigen::VectorXd& t : taken[best_ci])
            rem -= t * (t.transpose() * rem);
        Eigen::JacobiSVD<Eigen::MatrixXd> rem_svd(rem, Eigen::ComputeThinU);
        Eigen::MatrixXd qfull = rem_svd.matrixU().leftCols(remaining[best_ci]);

        // align the subspace basis with the canonical frame (Procrustes)
        Eigen::MatrixXd coords = qfull.transpose() * target;  // remaining x gsize
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(coords, Eigen::ComputeThinU | Eigen::ComputeThinV);
        Eigen::MatrixXd aligned = qfull * (svd.matrixU() * svd.matrixV().transpose());

        for (int j = 0; j < gsize; ++j) {
            Eigen::VectorXd col = aligned.col(j);
            // deterministic sign: largest-magnitude entry positive
            int arg = 0;
            col.cwiseAbs().maxCoeff(&arg);
            if (col(arg) < 0) col = -col;
            V.col(g.slots[j]) = col;
            lam(g.slots[j]) = clusters[best_ci].value;
            taken[best_ci].push_back(col);
        }
        remaining[best_ci] -= gsize;
    }

    LieTriple triple{Q, V, lam};
    const Eigen::MatrixXd back = triple.assemble().mat();
    const double err = (back - C.mat()).norm() / std::max(1.0, C.mat().norm());
    if (err > std::max(tol, 1e-8))
        throw std::runtime_error("recover_triple: reconstruction mismatch " + std::to_string(err) +
                                 "; wrong class hypothesis?");
    return triple;
}

}  // namespace kelvin
