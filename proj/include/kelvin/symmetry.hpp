#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "kelvin/kelvin_matrix.hpp"

namespace kelvin {

// The four 2D and eight 3D elasticity classes.
enum class SymmetryClass {
    iso_2d,
    tetra_2d,
    ortho_2d,
    triclinic_2d,
    iso_3d,
    cubic_3d,
    trans_iso_3d,
    trigonal_3d,
    tetra_3d,
    ortho_3d,
    monoclinic_3d,
    triclinic_3d,
};

std::string to_string(SymmetryClass c);
SymmetryClass class_from_string(const std::string& name);
const std::vector<SymmetryClass>& all_classes();

// Linear constraint sum(coeff * C(i,j)) = 0 on the reduced form.
struct LinearConstraint {
    struct Term {
        int i, j;
        double coeff;
    };
    std::vector<Term> terms;
    std::string label;
};

struct ClassSpec {
    SymmetryClass cls;
    int spatial_dim;  // d
    int k;            // strain dimension
    int m_q;          // spatial rotation parameters
    int m_v;          // eigen-strain distribution parameters
    int m_lambda;     // distinct log-moduli
    int n() const { return m_q + m_v + m_lambda; }

    // slot -> index into the distinct-moduli vector, length k
    std::vector<int> eigen_slot;

    // entries that vanish for every matrix of the class (upper triangle)
    std::vector<std::pair<int, int>> invariant_zeros;
    // equality constraints among entries of the reduced form
    std::vector<LinearConstraint> constraints;
    // invariant zeros plus the zeros induced by the normalizing spatial
    // rotation of the canonical reduced form
    std::vector<std::pair<int, int>> canonical_zeros;

    // spatial generators of the symmetry group, for commutation checks
    std::vector<Eigen::MatrixXd> generators;
    // immediately more symmetric classes
    std::vector<SymmetryClass> hasse_parents;
};

const ClassSpec& class_spec(SymmetryClass c);

// True when a's symmetry group contains b's, i.e. every class-a matrix also
// belongs to class b. Reflexive.
bool is_at_least_as_symmetric(SymmetryClass a, SymmetryClass b);

// Real parameters z = (q, p, mu) of a class.
struct ParamVector {
    Eigen::VectorXd q;   // spatial rotation, length m_q
    Eigen::VectorXd p;   // eigen-strain distribution, length m_v
    Eigen::VectorXd mu;  // log-moduli, length m_lambda
};
void validate_params(SymmetryClass c, const ParamVector& z);

// Product representation (Q, V, Lambda) of a Kelvin matrix:
// C = Trep(Q)^T V Lambda V^T Trep(Q).
struct LieTriple {
    Eigen::MatrixXd spatial_rotation;  // d x d proper rotation
    Eigen::MatrixXd strain_rotation;   // k x k orthogonal
    Eigen::VectorXd moduli;            // length k, strictly positive (GPa)

    int k() const { return static_cast<int>(moduli.size()); }
    int spatial_dim() const { return static_cast<int>(spatial_rotation.rows()); }
    KelvinMatrix assemble() const;
    void validate() const;
};

// Spatial rotation of the class from its q parameters (identity for m_q = 0;
// the transversely isotropic axis pair (q1, q2) maps to (q1, q2, 0)).
Eigen::MatrixXd spatial_rotation_from_params(SymmetryClass c, const Eigen::VectorXd& q);

// Eigen-strain distributor matrix of the class; orthogonal k x k.
Eigen::MatrixXd build_eigvecs(SymmetryClass c, const Eigen::VectorXd& p);

// Distribute exp(mu) (times the reference modulus) into the k diagonal slots.
Eigen::VectorXd build_moduli(SymmetryClass c, const Eigen::VectorXd& mu,
                             double reference_modulus = 1.0);
// Place m_lambda distinct values into the k slots of the class layout.
Eigen::VectorXd place_moduli(SymmetryClass c, const Eigen::VectorXd& distinct);

// Strictly decreasing moduli from parameters (tau_1..tau_{m-1}, mu_m):
// lambda_m = ref * exp(mu_m), lambda_k = lambda_{k+1} + ref * exp(tau_k).
Eigen::VectorXd ordered_moduli(const Eigen::VectorXd& params,
                               double reference_modulus = 1.0);

struct ReducedResult {
    KelvinMatrix C;
    Eigen::MatrixXd V;       // effective distributor after normalization
    Eigen::VectorXd moduli;  // length k
};

// Class-canonical reduced matrix V Lambda V^T. For the triclinic classes the
// result is additionally rotated into the canonical zero pattern; V then
// absorbs that strain-space rotation.
ReducedResult build_reduced(SymmetryClass c, const Eigen::VectorXd& mu,
                            const Eigen::VectorXd& p, double reference_modulus = 1.0);

struct BuildResult {
    KelvinMatrix C;
    LieTriple triple;
};

// Fully oriented Kelvin matrix C = Trep(Q(q))^T * reduced * Trep(Q(q)).
BuildResult build_full(SymmetryClass c, const ParamVector& z,
                       double reference_modulus = 1.0);

struct ReducedCheck {
    bool ok = false;
    double max_violation = 0.0;  // relative to ||C||_F
    std::string worst;           // description of the worst entry/constraint
};

// Verifies the invariant zero pattern and equality constraints of the class
// against C, with violations measured relative to ||C||_F.
ReducedCheck check_reduced_form(const Eigen::MatrixXd& C, SymmetryClass c,
                                double tol = 1e-9);

// Recovers a product representation of C under a class hypothesis: finds the
// spatial rotation minimizing the off-pattern residual, eigendecomposes the
// reduced matrix, and assigns eigenpairs to the class slots. Throws when the
// reduced matrix does not meet the class pattern (wrong hypothesis).
LieTriple recover_triple(const KelvinMatrix& C, SymmetryClass c, double tol = 1e-8);

}  // namespace kelvin
