#include "kelvin/json_io.hpp"

#include <stdexcept>

namespace kelvin {

json to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty() || !j.front().is_array())
        throw std::invalid_argument("expected an array of rows");
    const int rows = static_cast<int>(j.size());
    const int cols = static_cast<int>(j.front().size());
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (static_cast<int>(j[i].size()) != cols)
            throw std::invalid_argument("ragged matrix rows");
        for (int c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
    }
    return m;
}

json to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

Eigen::VectorXd vector_from_json(const json& j) {
    if (!j.is_array()) throw std::invalid_argument("expected an array");
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j[i].get<double>();
    return v;
}

json to_json(const KelvinMatrix& c) {
    return json{{"dim", c.dim()}, {"unit", "GPa"}, {"rows", to_json(c.mat())}};
}

KelvinMatrix kelvin_from_json(const json& j) {
    if (!j.contains("rows")) throw std::invalid_argument("kelvin matrix: missing 'rows'");
    const Eigen::MatrixXd m = matrix_from_json(j.at("rows"));
    if (j.contains("dim") && j.at("dim").get<int>() != m.rows())
        throw std::invalid_argument("kelvin matrix: 'dim' does not match 'rows'");
    return KelvinMatrix(m);
}

json to_json(const LieTriple& t) {
    return json{{"dim", t.k()},
                {"spatial_rotation", to_json(t.spatial_rotation)},
                {"strain_rotation", to_json(t.strain_rotation)},
                {"moduli", to_json(t.moduli)}};
}

LieTriple triple_from_json(const json& j) {
    LieTriple t;
    t.spatial_rotation = matrix_from_json(j.at("spatial_rotation"));
    t.strain_rotation = matrix_from_json(j.at("strain_rotation"));
    t.moduli = vector_from_json(j.at("moduli"));
    t.validate();
    return t;
}

json to_json(const ParamVector& z) {
    return json{{"q", to_json(z.q)}, {"p", to_json(z.p)}, {"mu", to_json(z.mu)}};
}

ParamVector params_from_json(const json& j) {
    ParamVector z;
    z.q = j.contains("q") ? vector_from_json(j.at("q")) : Eigen::VectorXd();
    z.p = j.contains("p") ? vector_from_json(j.at("p")) : Eigen::VectorXd();
    z.mu = j.contains("mu") ? vector_from_json(j.at("mu")) : Eigen::VectorXd();
    return z;
}

json to_json(const GenConfig& cfg) {
    return json{{"class", to_string(cfg.cls)},
                {"z0", to_json(cfg.z0)},
                {"cov", to_json(cfg.cov)},
                {"ordering", cfg.ordering},
                {"seed", cfg.seed},
                {"reference_modulus", cfg.reference_modulus}};
}

GenConfig gen_config_from_json(const json& j) {
    GenConfig cfg;
    cfg.cls = class_from_string(j.at("class").get<std::string>());
    cfg.z0 = params_from_json(j.at("z0"));
    const int n = class_spec(cfg.cls).n();
    if (!j.contains("cov")) {
        cfg.cov = Eigen::MatrixXd::Zero(n, n);
    } else if (j.at("cov").is_object()) {
        const double s = j.at("cov").at("iid_sigma").get<double>();
        cfg.cov = s * s * Eigen::MatrixXd::Identity(n, n);
    } else {
        cfg.cov = matrix_from_json(j.at("cov"));
    }
    cfg.ordering = j.value("ordering", false);
    cfg.seed = j.value("seed", std::uint64_t(0));
    cfg.reference_modulus = j.value("reference_modulus", 1.0);
    validate_config(cfg);
    return cfg;
}

json to_json(const MeanResult& r) {
    json out{{"mean", to_json(r.mean)},
             {"variance", r.variance},
             {"iterations", r.iterations},
             {"converged", r.converged}};
    if (r.triple) out["triple"] = to_json(*r.triple);
    return out;
}

json to_json(const Sample& s) {
    return json{{"z_fluct", to_json(s.z_fluct)},
                {"kelvin", to_json(s.C)},
                {"triple", to_json(s.triple)}};
}

}  // namespace kelvin
