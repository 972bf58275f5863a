#pragma once

#include <json.hpp>

#include "kelvin/field.hpp"
#include "kelvin/frechet.hpp"
#include "kelvin/kelvin_matrix.hpp"
#include "kelvin/stochastic.hpp"
#include "kelvin/symmetry.hpp"

namespace kelvin {

using json = nlohmann::json;

json to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const json& j);
json to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const json& j);

// {"dim": k, "unit": "GPa", "rows": [[...], ...]}
json to_json(const KelvinMatrix& c);
KelvinMatrix kelvin_from_json(const json& j);

// {"dim": k, "spatial_rotation": ..., "strain_rotation": ..., "moduli": ...}
json to_json(const LieTriple& t);
LieTriple triple_from_json(const json& j);

// {"q": [...], "p": [...], "mu": [...]}
json to_json(const ParamVector& z);
ParamVector params_from_json(const json& j);

// {"class": ..., "z0": ..., "cov": [[...]] | {"iid_sigma": s}, "ordering": b,
//  "seed": n, "reference_modulus": a}
json to_json(const GenConfig& cfg);
GenConfig gen_config_from_json(const json& j);

json to_json(const MeanResult& r);
json to_json(const Sample& s);

}  // namespace kelvin
