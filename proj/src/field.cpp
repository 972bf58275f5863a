#include "kelvin/field.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "kelvin/parallel.hpp"

namespace kelvin {

Grid1D Grid1D::uniform(int n, double a, double b) {
    if (n < 2) throw std::invalid_argument("Grid1D: need at least 2 points");
    if (!(b > a)) throw std::invalid_argument("Grid1D: empty interval");
    Grid1D g;
    g.x = Eigen::VectorXd::LinSpaced(n, a, b);
    return g;
}

void validate_grid(const Grid1D& g) {
    if (g.size() < 2) throw std::invalid_argument("Grid1D: need at least 2 points");
    for (int i = 1; i < g.size(); ++i)
        if (!(g.x(i) > g.x(i - 1)))
            throw std::invalid_argument("Grid1D: points must be strictly increasing");
    if (g.x(0) < -1e-12 || g.x(g.size() - 1) > 1.0 + 1e-12)
        throw std::invalid_argument("Grid1D: points must lie in [0, 1]");
}

double matern_cov(double h, const MaternCov& m) {
    if (!(m.nu > 0.0) || !(m.ell > 0.0) || !(m.sigma2 > 0.0))
        throw std::invalid_argument("matern_cov: parameters must be positive");
    if (h < 0.0) throw std::invalid_argument("matern_cov: distance must be non-negative");
    if (h == 0.0) return m.sigma2;
    const double r = h / m.ell;
    if (std::abs(m.nu - 0.5) < 1e-12) return m.sigma2 * std::exp(-r);
    if (std::abs(m.nu - 1.5) < 1e-12) {
        const double a = std::sqrt(3.0) * r;
        return m.sigma2 * (1.0 + a) * std::exp(-a);
    }
    if (std::abs(m.nu - 2.5) < 1e-12) {
        const double a = std::sqrt(5.0) * r;
        return m.sigma2 * (1.0 + a + a * a / 3.0) * std::exp(-a);
    }
    const double a = std::sqrt(2.0 * m.nu) * r;
    const double c = m.sigma2 * std::pow(2.0, 1.0 - m.nu) / std::tgamma(m.nu);
    return c * std::pow(a, m.nu) * std::cyl_bessel_k(m.nu, a);
}

namespace {

Eigen::VectorXd trapezoid_weights(const Grid1D& g) {
    const int n = g.size();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    for (int i = 0; i + 1 < n; ++i) {
        const double half = 0.5 * (g.x(i + 1) - g.x(i));
        w(i) += half;
        w(i + 1) += half;
    }
    return w;
}

}  // namespace

KLExpansion kl_decompose(const Grid1D& grid, const Eigen::MatrixXd& kernel_matrix) {
    validate_grid(grid);
    const int n = grid.size();
    if (kernel_matrix.rows() != n || kernel_matrix.cols() != n)
        throw std::invalid_argument("kl_decompose: kernel matrix does not match the grid");
    if ((kernel_matrix - kernel_matrix.transpose()).norm() >
        1e-10 * std::max(1.0, kernel_matrix.norm()))
        throw std::invalid_argument("kl_decompose: kernel matrix must be symmetric");

    KLExpansion kl;
    kl.quad_weights = trapezoid_weights(grid);
    const Eigen::VectorXd ws = kl.quad_weights.cwiseSqrt();
    const Eigen::MatrixXd b =
        ws.asDiagonal() * (0.5 * (kernel_matrix + kernel_matrix.transpose())) * ws.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b);
    const double trace = std::max(es.eigenvalues().cwiseAbs().sum(), 1e-300);
    Eigen::VectorXd vals = es.eigenvalues();
    if (vals.minCoeff() < -1e-10 * trace)
        throw std::invalid_argument("kl_decompose: kernel is not positive semidefinite "
                                    "(eigenvalue " + std::to_string(vals.minCoeff()) + ")");
    // descending order, modes scaled back by W^{-1/2}
    kl.eigenvalues.resize(n);
    kl.modes.resize(n, n);
    for (int i = 0; i < n; ++i) {
        const int src = n - 1 - i;
        kl.eigenvalues(i) = std::max(vals(src), 0.0);
        kl.modes.col(i) = es.eigenvectors().col(src).cwiseQuotient(ws);
    }
    return kl;
}

KLExpansion kl_decompose(const Grid1D& grid,
                         const std::function<double(double, double)>& kernel) {
    const int n = grid.size();
    Eigen::MatrixXd k(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            k(i, j) = kernel(grid.x(i), grid.x(j));
            k(j, i) = k(i, j);
        }
    return kl_decompose(grid, k);
}

int KLExpansion::rank_for_fraction(double fraction) const {
    if (!(fraction > 0.0) || fraction > 1.0)
        throw std::invalid_argument("rank_for_fraction: fraction must be in (0, 1]");
    const double total = eigenvalues.sum();
    if (total <= 0.0) return 0;
    double acc = 0.0;
    for (int i = 0; i < eigenvalues.size(); ++i) {
        acc += eigenvalues(i);
        if (acc >= fraction * total - 1e-15 * total) return i + 1;
    }
    return static_cast<int>(eigenvalues.size());
}

Eigen::MatrixXd KLExpansion::reconstruct(int rank) const {
    const int n = static_cast<int>(eigenvalues.size());
    const int r = rank < 0 ? n : std::min(rank, n);
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    for (int l = 0; l < r; ++l)
        k += eigenvalues(l) * modes.col(l) * modes.col(l).transpose();
    return k;
}

Eigen::VectorXd kl_project(const KLExpansion& kl, const Eigen::VectorXd& field_values,
                           int rank) {
    const int n = static_cast<int>(kl.eigenvalues.size());
    if (field_values.size() != n)
        throw std::invalid_argument("kl_project: field length does not match the grid");
    const int r = rank < 0 ? n : std::min(rank, n);
    Eigen::VectorXd zeta(r);
    for (int l = 0; l < r; ++l) {
        const double alpha = std::sqrt(kl.eigenvalues(l));
        if (alpha <= 0.0) {
            zeta(l) = 0.0;
            continue;
        }
        zeta(l) = kl.modes.col(l).cwiseProduct(kl.quad_weights).dot(field_values) / alpha;
    }
    return zeta;
}

std::vector<FieldSample> sample_random_field(const FieldConfig& cfg, int count, bool parallel) {
    validate_grid(cfg.grid);
    validate_params(cfg.cls, cfg.z0);
    const ClassSpec& spec = class_spec(cfg.cls);
    const int n = spec.n();
    if (cfg.cross_cov.rows() != n || cfg.cross_cov.cols() != n)
        throw std::invalid_argument("sample_random_field: cross covariance must be " +
                                    std::to_string(n) + "x" + std::to_string(n));
    const Eigen::MatrixXd l_cross = covariance_factor(cfg.cross_cov);

    // unit-variance spatial correlation kernel shared by all parameters
    const double s2 = matern_cov(0.0, cfg.matern);
    const KLExpansion kl = kl_decompose(cfg.grid, [&](double x, double y) {
        return matern_cov(std::abs(x - y), cfg.matern) / s2;
    });
    const int rank = cfg.rank >= 0 ? std::min<int>(cfg.rank, cfg.grid.size())
                                   : kl.rank_for_fraction(cfg.trunc_fraction);
    const Eigen::VectorXd alpha = kl.alphas();

    const int npts = cfg.grid.size();
    const FieldSample placeholder;
    std::vector<FieldSample> out(count, placeholder);
    parallel_for(
        count,
        [&](std::size_t w) {
            SampleRng rng(cfg.seed, w);
            // independent standard normal block xi_l in R^n per retained mode
            Eigen::MatrixXd zeta(n, rank);
            for (int l = 0; l < rank; ++l)
                for (int j = 0; j < n; ++j) zeta(j, l) = rng.normal();
            const Eigen::MatrixXd coeff = l_cross * zeta;  // n x rank
            FieldSample fs;
            fs.sample_index = static_cast<int>(w);
            fs.points.reserve(npts);
            for (int i = 0; i < npts; ++i) {
                Eigen::VectorXd zf = Eigen::VectorXd::Zero(n);
                for (int l = 0; l < rank; ++l) zf += alpha(l) * kl.modes(i, l) * coeff.col(l);
                LieTriple t = triple_from_fluctuation(cfg.cls, cfg.z0, zf, cfg.ordering,
                                                      cfg.reference_modulus);
                fs.points.push_back(FieldPoint{std::move(zf), t, t.assemble()});
            }
            out[w] = std::move(fs);
        },
        parallel);
    return out;
}

InterpField interpolate_field(const LieTriple& a, const LieTriple& b, const Grid1D& grid) {
    validate_grid(grid);
    InterpField f;
    f.grid = grid;
    f.kind = MetricKind::product;
    f.values.reserve(grid.size());
    for (int i = 0; i < grid.size(); ++i) f.values.push_back(geodesic(a, b, grid.x(i)));
    return f;
}

InterpField interpolate_field(const KelvinMatrix& a, const KelvinMatrix& b, const Grid1D& grid,
                              MetricKind kind) {
    validate_grid(grid);
    if (kind == MetricKind::product)
        throw std::invalid_argument("interpolate_field: product metric needs triple endpoints");
    InterpField f;
    f.grid = grid;
    f.kind = kind;
    f.values.reserve(grid.size());
    for (int i = 0; i < grid.size(); ++i)
        f.values.push_back(kind == MetricKind::euclid ? geodesic_euclid(a, b, grid.x(i))
                                                      : geodesic_log_euclid(a, b, grid.x(i)));
    return f;
}

void write_field_csv(std::ostream& os, const InterpField& field) {
    os << "# unit: GPa\n";
    os.precision(17);
    if (field.values.empty()) return;
    const int k = field.values.front().dim();
    os << "x,det";
    for (int i = 0; i < k; ++i) os << ",lambda" << (i + 1);
    for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j) os << ",C" << (i + 1) << (j + 1);
    os << "\n";
    for (int row = 0; row < field.grid.size(); ++row) {
        const KelvinMatrix& c = field.values[row];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.mat(), Eigen::EigenvaluesOnly);
        os << field.grid.x(row) << "," << c.det();
        for (int i = k - 1; i >= 0; --i) os << "," << es.eigenvalues()(i);
        for (int i = 0; i < k; ++i)
            for (int j = i; j < k; ++j) os << "," << c.mat()(i, j);
        os << "\n";
    }
}

}  // namespace kelvin
