#include <CLI11.hpp>
#include <Eigen/Eigenvalues>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "kelvin/field.hpp"
#include "kelvin/frechet.hpp"
#include "kelvin/json_io.hpp"
#include "kelvin/kelvin_matrix.hpp"
#include "kelvin/metrics.hpp"
#include "kelvin/rotations.hpp"
#include "kelvin/stochastic.hpp"
#include "kelvin/symmetry.hpp"

namespace fs = std::filesystem;
using namespace kelvin;

namespace {

constexpr double kPi = 3.14159265358979323846;

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
    return j;
}

void write_text(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

// One ensemble entry; triples are recovered from raw matrices on demand.
struct EnsembleItem {
    std::optional<KelvinMatrix> matrix;
    std::optional<LieTriple> triple;
};

EnsembleItem parse_item(const json& j) {
    EnsembleItem it;
    if (j.contains("strain_rotation")) {
        it.triple = triple_from_json(j);
        it.matrix = it.triple->assemble();
    } else {
        it.matrix = kelvin_from_json(j);
    }
    return it;
}

LieTriple item_triple(const EnsembleItem& it, const std::optional<SymmetryClass>& cls,
                      double tol) {
    if (it.triple) return *it.triple;
    if (!cls)
        throw std::invalid_argument(
            "product metric on raw matrices requires --class to recover the representation");
    return recover_triple(*it.matrix, *cls, tol);
}

int cmd_classes() {
    std::ostringstream os;
    os << "class          d  m_Q  m_V  m_L    n  parents\n";
    for (SymmetryClass c : all_classes()) {
        const ClassSpec& s = class_spec(c);
        std::string parents;
        for (std::size_t i = 0; i < s.hasse_parents.size(); ++i) {
            if (i) parents += ", ";
            parents += to_string(s.hasse_parents[i]);
        }
        if (parents.empty()) parents = "-";
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%-13s %2d %4d %4d %4d %4d  %s\n",
                      to_string(c).c_str(), s.spatial_dim, s.m_q, s.m_v, s.m_lambda, s.n(),
                      parents.c_str());
        os << buf;
    }
    std::cout << os.str();
    return 0;
}

int cmd_build(const std::string& config_path, const std::string& out) {
    const json cfg = read_json_file(config_path);
    const SymmetryClass cls = class_from_string(cfg.at("class").get<std::string>());
    const ParamVector z = params_from_json(cfg.at("z0"));
    const double ref = cfg.value("reference_modulus", 1.0);
    const BuildResult r = build_full(cls, z, ref);
    json j{{"class", to_string(cls)},
           {"kelvin", to_json(r.C)},
           {"triple", to_json(r.triple)}};
    write_text(out, dump_json(j));
    return 0;
}

std::string batch_csv(const SampleBatch& batch) {
    std::ostringstream os;
    os << "# unit: GPa\n";
    os.precision(17);
    const int k = batch.samples.empty() ? 6 : batch.samples.front().C.dim();
    os << "sample";
    for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j) os << ",C" << (i + 1) << (j + 1);
    os << "\n";
    for (std::size_t s = 0; s < batch.samples.size(); ++s) {
        os << s;
        const Eigen::MatrixXd& m = batch.samples[s].C.mat();
        for (int i = 0; i < k; ++i)
            for (int j = i; j < k; ++j) os << "," << m(i, j);
        os << "\n";
    }
    return os.str();
}

int cmd_sample(const std::string& config_path, int count, std::optional<std::uint64_t> seed,
               const std::string& format, const std::string& out, bool parallel) {
    GenConfig cfg = gen_config_from_json(read_json_file(config_path));
    if (seed) cfg.seed = *seed;
    if (count < 1) throw std::invalid_argument("--count must be positive");
    const SampleBatch batch = random_kelvin(cfg, count, parallel);
    if (format == "csv") {
        write_text(out, batch_csv(batch));
    } else if (format == "jsonl") {
        std::ostringstream os;
        for (std::size_t i = 0; i < batch.samples.size(); ++i) {
            json j = to_json(batch.samples[i]);
            j["index"] = i;
            j["config_hash"] = batch.hash;
            os << j.dump() << "\n";
        }
        write_text(out, os.str());
    } else {
        throw std::invalid_argument("unknown format: " + format + " (expected jsonl or csv)");
    }
    return 0;
}

int cmd_interpolate(const std::string& config_path, double tol, const std::string& out) {
    const json cfg = read_json_file(config_path);
    const MetricKind kind = metric_from_string(cfg.value("metric", std::string("product")));
    const int grid_n = cfg.value("grid_n", 101);
    std::optional<SymmetryClass> cls;
    if (cfg.contains("class")) cls = class_from_string(cfg.at("class").get<std::string>());
    const EnsembleItem a = parse_item(cfg.at("a"));
    const EnsembleItem b = parse_item(cfg.at("b"));

    InterpolationPath path;
    if (kind == MetricKind::product) {
        path = interpolation_path(item_triple(a, cls, tol), item_triple(b, cls, tol),
                                  linspace01(grid_n));
    } else {
        path = interpolation_path(*a.matrix, *b.matrix, kind, linspace01(grid_n));
    }
    std::ostringstream os;
    write_path_csv(os, path);
    write_text(out, os.str());
    return 0;
}

int cmd_mean(const std::string& input_path, const std::string& metric_flag, double cv, double ct,
             const std::string& class_flag, double tol, const std::string& out) {
    const json in = read_json_file(input_path);
    const MetricKind kind =
        metric_from_string(!metric_flag.empty() ? metric_flag
                                                : in.value("metric", std::string("product")));
    std::optional<SymmetryClass> cls;
    if (!class_flag.empty()) cls = class_from_string(class_flag);
    else if (in.contains("class")) cls = class_from_string(in.at("class").get<std::string>());

    if (!in.contains("items") || !in.at("items").is_array() || in.at("items").empty())
        throw std::invalid_argument("mean input must contain a non-empty 'items' array");
    std::vector<EnsembleItem> items;
    for (const json& j : in.at("items")) items.push_back(parse_item(j));
    Eigen::VectorXd weights;
    if (in.contains("weights")) weights = vector_from_json(in.at("weights"));

    MeanResult res = [&] {
        if (kind == MetricKind::product) {
            std::vector<LieTriple> triples;
            for (const EnsembleItem& it : items) triples.push_back(item_triple(it, cls, tol));
            MetricWeights mw{in.value("cv", cv), in.value("ct", ct)};
            return mean_product(triples, weights, mw);
        }
        if (kind == MetricKind::euclid) {
            std::vector<KelvinMatrix> ms;
            for (const EnsembleItem& it : items) ms.push_back(*it.matrix);
            return mean_euclid(ms, weights);
        }
        throw std::invalid_argument("mean supports the euclid and product metrics");
    }();
    write_text(out, dump_json(to_json(res)));
    return 0;
}

int cmd_field(const std::string& config_path, int count, std::optional<std::uint64_t> seed,
              const std::string& format, const std::string& out, bool parallel) {
    const json j = read_json_file(config_path);
    FieldConfig cfg;
    cfg.cls = class_from_string(j.at("class").get<std::string>());
    cfg.z0 = params_from_json(j.at("z0"));
    const json& mj = j.at("matern");
    cfg.matern = MaternCov{mj.value("nu", 0.5), mj.value("ell", 0.2), mj.value("sigma2", 1.0)};
    const int n = class_spec(cfg.cls).n();
    if (j.at("cross_cov").is_object()) {
        const double s = j.at("cross_cov").at("iid_sigma").get<double>();
        cfg.cross_cov = s * s * Eigen::MatrixXd::Identity(n, n);
    } else {
        cfg.cross_cov = matrix_from_json(j.at("cross_cov"));
    }
    cfg.grid = Grid1D::uniform(j.value("grid_n", 101));
    cfg.trunc_fraction = j.value("truncation", 1.0);
    cfg.rank = j.value("rank", -1);
    cfg.seed = j.value("seed", std::uint64_t(0));
    cfg.ordering = j.value("ordering", false);
    cfg.reference_modulus = j.value("reference_modulus", 1.0);
    if (seed) cfg.seed = *seed;
    if (count < 1) throw std::invalid_argument("--count must be positive");

    const std::vector<FieldSample> fields = sample_random_field(cfg, count, parallel);
    std::ostringstream os;
    if (format == "jsonl") {
        for (const FieldSample& f : fields) {
            json rec{{"index", f.sample_index}};
            json pts = json::array();
            for (int i = 0; i < cfg.grid.size(); ++i) {
                pts.push_back(json{{"x", cfg.grid.x(i)},
                                   {"z_fluct", to_json(f.points[i].z_fluct)},
                                   {"kelvin", to_json(f.points[i].C)},
                                   {"triple", to_json(f.points[i].triple)}});
            }
            rec["points"] = std::move(pts);
            os << rec.dump() << "\n";
        }
    } else if (format == "csv") {
        os << "# unit: GPa\n";
        os.precision(17);
        const int k = class_spec(cfg.cls).k;
        os << "sample,x,det";
        for (int i = 0; i < k; ++i) os << ",lambda" << (i + 1);
        for (int i = 0; i < k; ++i)
            for (int c = i; c < k; ++c) os << ",C" << (i + 1) << (c + 1);
        os << "\n";
        for (const FieldSample& f : fields) {
            for (int i = 0; i < cfg.grid.size(); ++i) {
                const Eigen::MatrixXd& m = f.points[i].C.mat();
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
                os << f.sample_index << "," << cfg.grid.x(i) << "," << m.determinant();
                for (int l = k - 1; l >= 0; --l) os << "," << es.eigenvalues()(l);
                for (int r = 0; r < k; ++r)
                    for (int c = r; c < k; ++c) os << "," << m(r, c);
                os << "\n";
            }
        }
    } else {
        throw std::invalid_argument("unknown format: " + format + " (expected jsonl or csv)");
    }
    write_text(out, os.str());
    return 0;
}

int cmd_ymod(const std::string& input_path, int ntheta, int nphi, const std::string& out) {
    const KelvinMatrix c = kelvin_from_json(read_json_file(input_path));
    if (c.dim() != 6) throw std::invalid_argument("ymod requires a 3D (6x6) Kelvin matrix");
    if (ntheta < 2 || nphi < 2) throw std::invalid_argument("grid must have at least 2x2 points");
    std::ostringstream os;
    os << "# unit: GPa, angles in degrees\n";
    os << "theta_deg,phi_deg,young_modulus\n";
    os.precision(17);
    for (int i = 0; i < ntheta; ++i) {
        const double theta = kPi * i / (ntheta - 1);
        for (int j = 0; j < nphi; ++j) {
            const double phi = 2.0 * kPi * j / nphi;
            const double y = directional_young_modulus(c, Direction::from_angles(theta, phi));
            os << theta * 180.0 / kPi << "," << phi * 180.0 / kPi << "," << y << "\n";
        }
    }
    write_text(out, os.str());
    return 0;
}

int cmd_bone_demo(const std::string& out_dir, int grid_n) {
    if (out_dir.empty()) throw std::invalid_argument("--out directory is required");
    fs::create_directories(out_dir);

    const OrthotropicConstants bone = cortical_femoral_bone();
    const Eigen::MatrixXd s_voigt = compliance_from_orthotropic(bone);
    const KelvinMatrix a = voigt_to_kelvin(s_voigt.inverse());
    const LieTriple ta = recover_triple(a, SymmetryClass::ortho_3d);

    // endpoint variations: scaled shear moduli, spatial rotation, eigen-strain
    LieTriple tb_scale = ta;
    tb_scale.moduli(4) *= 5.0;
    tb_scale.moduli(5) *= 5.0;
    LieTriple tb_rot = ta;
    tb_rot.spatial_rotation = exp_so3(Eigen::Vector3d(0, kPi / 3.0, 0)) * ta.spatial_rotation;
    LieTriple tb_eig = ta;
    Eigen::MatrixXd w = Eigen::MatrixXd::Identity(6, 6);
    w.topLeftCorner(3, 3) = exp_so3(Eigen::Vector3d(0, kPi / 3.0, 0));
    tb_eig.strain_rotation = w * ta.strain_rotation;

    const std::vector<double> ts = linspace01(grid_n);
    json summary;
    summary["young_modulus"] = {
        {"axis1", directional_young_modulus(a, Direction(Eigen::Vector3d(1, 0, 0)))},
        {"axis2", directional_young_modulus(a, Direction(Eigen::Vector3d(0, 1, 0)))},
        {"axis3", directional_young_modulus(a, Direction(Eigen::Vector3d(0, 0, 1)))}};

    struct Variation {
        std::string name;
        const LieTriple& tb;
    };
    const std::vector<Variation> variations = {
        {"scaling", tb_scale}, {"rotation", tb_rot}, {"eigenstrain", tb_eig}};

    for (const Variation& v : variations) {
        const KelvinMatrix b = v.tb.assemble();
        const InterpolationPath riem = interpolation_path(ta, v.tb, ts);
        const InterpolationPath eucl = interpolation_path(a, b, MetricKind::euclid, ts);
        {
            std::ofstream f(fs::path(out_dir) / (v.name + "_product.csv"));
            write_path_csv(f, riem);
        }
        {
            std::ofstream f(fs::path(out_dir) / (v.name + "_euclid.csv"));
            write_path_csv(f, eucl);
        }
        const double det0 = a.det(), det1 = b.det();
        double riem_dev = 0.0, eucl_interior_min = std::numeric_limits<double>::infinity(),
               eucl_above_riem = std::numeric_limits<double>::infinity();
        for (int i = 0; i < grid_n; ++i) {
            riem_dev = std::max(riem_dev, std::abs(riem.samples[i].C.det() - det0));
            if (i > 0 && i + 1 < grid_n) {
                eucl_interior_min = std::min(eucl_interior_min, eucl.samples[i].C.det());
                eucl_above_riem = std::min(
                    eucl_above_riem, eucl.samples[i].C.det() - riem.samples[i].C.det());
            }
        }
        json verdict;
        if (v.name == "scaling") {
            verdict["euclid_det_above_riemannian"] = eucl_above_riem > 0.0;
            verdict["min_euclid_minus_riemannian_det"] = eucl_above_riem;
        } else {
            verdict["product_det_constant"] = riem_dev <= 1e-8 * det0;
            verdict["max_product_det_deviation_rel"] = riem_dev / det0;
            const double margin =
                (eucl_interior_min - std::max(det0, det1)) / std::max(det0, det1);
            verdict["euclid_swelling"] = margin > 1e-6;
            verdict["euclid_swelling_margin_rel"] = margin;
        }
        summary["variations"][v.name] = verdict;
    }
    std::ofstream f(fs::path(out_dir) / "summary.json");
    f << summary.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kelvin-matrix elasticity toolbox: build, sample, average and interpolate "
                 "SPD elasticity tensors with controlled symmetry class"};
    app.require_subcommand(1);

    std::string config_path, input_path, out, format = "jsonl", metric_flag, class_flag;
    std::optional<std::uint64_t> seed;
    int count = 1, grid_n = 101, ntheta = 37, nphi = 72;
    double cv = 1.0, ct = 1.0, tol = 1e-8;
    bool parallel = false;

    app.add_subcommand("classes", "List the twelve symmetry classes and parameter counts");

    CLI::App* build = app.add_subcommand("build", "Build a Kelvin matrix from parameters");
    build->add_option("--config", config_path, "JSON config with class and z0")->required();
    build->add_option("--out", out, "output file (default stdout)");

    CLI::App* sample = app.add_subcommand("sample", "Sample random Kelvin matrices");
    sample->add_option("--config", config_path, "JSON generator config")->required();
    sample->add_option("--count", count, "number of samples")->required();
    sample->add_option("--seed", seed, "override the config seed");
    sample->add_option("--format", format, "jsonl or csv");
    sample->add_option("--out", out, "output file (default stdout)");
    sample->add_flag("--parallel", parallel, "generate samples in parallel");

    CLI::App* interp =
        app.add_subcommand("interpolate", "Geodesic interpolation between two endpoints");
    interp->add_option("--config", config_path, "JSON config with a, b, metric, grid_n")
        ->required();
    interp->add_option("--tol", tol, "representation recovery tolerance");
    interp->add_option("--out", out, "output CSV (default stdout)");

    CLI::App* mean = app.add_subcommand("mean", "Frechet mean of an ensemble");
    mean->add_option("--input", input_path, "JSON with items and optional weights")->required();
    mean->add_option("--metric", metric_flag, "euclid or product");
    mean->add_option("--class", class_flag, "class hypothesis for raw-matrix product means");
    mean->add_option("--cv", cv, "spatial rotation weight");
    mean->add_option("--ct", ct, "strain rotation weight");
    mean->add_option("--tol", tol, "representation recovery tolerance");
    mean->add_option("--out", out, "output file (default stdout)");

    CLI::App* field = app.add_subcommand("field", "Sample correlated 1D random fields");
    field->add_option("--config", config_path, "JSON field config")->required();
    field->add_option("--count", count, "number of realizations")->required();
    field->add_option("--seed", seed, "override the config seed");
    field->add_option("--format", format, "jsonl or csv");
    field->add_option("--out", out, "output file (default stdout)");
    field->add_flag("--parallel", parallel, "generate realizations in parallel");

    CLI::App* ymod = app.add_subcommand("ymod", "Directional Young's modulus surface");
    ymod->add_option("--input", input_path, "Kelvin matrix JSON")->required();
    ymod->add_option("--ntheta", ntheta, "polar grid points");
    ymod->add_option("--nphi", nphi, "azimuthal grid points");
    ymod->add_option("--out", out, "output CSV (default stdout)");

    CLI::App* demo = app.add_subcommand(
        "bone-demo", "Cortical bone example: build, interpolate, compare metrics");
    demo->add_option("--out", out, "output directory")->required();
    demo->add_option("--grid-n", grid_n, "interpolation grid size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand("classes")) return cmd_classes();
        if (app.got_subcommand(build)) return cmd_build(config_path, out);
        if (app.got_subcommand(sample))
            return cmd_sample(config_path, count, seed, format, out, parallel);
        if (app.got_subcommand(interp)) return cmd_interpolate(config_path, tol, out);
        if (app.got_subcommand(mean))
            return cmd_mean(input_path, metric_flag, cv, ct, class_flag, tol, out);
        if (app.got_subcommand(field))
            return cmd_field(config_path, count, seed, format, out, parallel);
        if (app.got_subcommand(ymod)) return cmd_ymod(input_path, ntheta, nphi, out);
        if (app.got_subcommand(demo)) return cmd_bone_demo(out, grid_n);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
