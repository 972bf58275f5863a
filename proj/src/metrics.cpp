#include "kelvin/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "kelvin/rotations.hpp"

namespace kelvin {

std::string to_string(MetricKind k) {
    switch (k) {
        case MetricKind::euclid: return "euclid";
        case MetricKind::product: return "product";
        case MetricKind::log_euclid: return "log_euclid";
    }
    throw std::logic_error("unknown metric kind");
}

MetricKind metric_from_string(const std::string& name) {
    if (name == "euclid") return MetricKind::euclid;
    if (name == "product") return MetricKind::product;
    if (name == "log_euclid") return MetricKind::log_euclid;
    throw std::invalid_argument("unknown metric kind: " + name);
}

double dist_euclid(const KelvinMatrix& a, const KelvinMatrix& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("dist_euclid: dimension mismatch");
    return (a.mat() - b.mat()).norm();
}

double dist_rot(const Eigen::MatrixXd& q1, const Eigen::MatrixXd& q2) {
    if (q1.rows() != q2.rows()) throw std::invalid_argument("dist_rot: dimension mismatch");
    return log_rotation(q1 * q2.transpose()).norm();
}

double dist_logdiag(const Eigen::VectorXd& l1, const Eigen::VectorXd& l2) {
    if (l1.size() != l2.size()) throw std::invalid_argument("dist_logdiag: dimension mismatch");
    if (!(l1.minCoeff() > 0.0) || !(l2.minCoeff() > 0.0))
        throw std::invalid_argument("dist_logdiag: entries must be strictly positive");
    return (l1.array().log() - l2.array().log()).matrix().norm();
}

double dist_product(const LieTriple& a, const LieTriple& b, MetricWeights w) {
    if (a.k() != b.k() || a.spatial_dim() != b.spatial_dim())
        throw std::invalid_argument("dist_product: dimension mismatch");
    if (!(w.c_v > 0.0) || !(w.c_t > 0.0))
        throw std::invalid_argument("dist_product: weights must be positive");
    const double th_l = dist_logdiag(a.moduli, b.moduli);
    const double th_q = dist_rot(a.spatial_rotation, b.spatial_rotation);
    const double th_v = dist_rot(a.strain_rotation, b.strain_rotation);
    return std::sqrt(th_l * th_l + w.c_v * th_q * th_q + w.c_t * th_v * th_v);
}

namespace {

// Groups of indices with (relatively) equal moduli in b.
std::vector<std::vector<int>> equal_groups(const Eigen::VectorXd& lam, double rtol) {
    const int k = static_cast<int>(lam.size());
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return lam(a) < lam(b); });
    const double scale = lam.cwiseAbs().maxCoeff();
    std::vector<std::vector<int>> groups;
    for (int i : idx) {
        if (!groups.empty() && std::abs(lam(groups.back().back()) - lam(i)) <= rtol * scale)
            groups.back().push_back(i);
        else
            groups.push_back({i});
    }
    return groups;
}

void all_permutations(const std::vector<int>& items, std::vector<std::vector<int>>& out) {
    std::vector<int> perm = items;
    std::sort(perm.begin(), perm.end());
    do {
        out.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
}

int permutation_parity(const std::vector<int>& perm) {
    int inversions = 0;
    for (std::size_t i = 0; i < perm.size(); ++i)
        for (std::size_t j = i + 1; j < perm.size(); ++j)
            if (perm[i] > perm[j]) ++inversions;
    return inversions % 2 == 0 ? 1 : -1;
}

}  // namespace

double dist_product_canonical(const LieTriple& a, const LieTriple& b, MetricWeights w,
                              double degeneracy_rtol) {
    if (a.k() != b.k() || a.spatial_dim() != b.spatial_dim())
        throw std::invalid_argument("dist_product_canonical: dimension mismatch");
    const int k = a.k();
    const double th_l = dist_logdiag(a.moduli, b.moduli);
    const double th_q = dist_rot(a.spatial_rotation, b.spatial_rotation);

    // enumerate column permutations of b's V within equal-moduli groups
    const std::vector<std::vector<int>> groups = equal_groups(b.moduli, degeneracy_rtol);
    std::vector<std::vector<std::vector<int>>> group_perms(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) all_permutations(groups[g], group_perms[g]);

    const double det_target = a.strain_rotation.determinant() * b.strain_rotation.determinant();

    double best_v = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> choice(groups.size(), 0);
    while (true) {
        // assemble the permuted column order
        std::vector<int> order(k);
        int parity = 1;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            const std::vector<int>& src = groups[g];
            const std::vector<int>& dst = group_perms[g][choice[g]];
            parity *= permutation_parity(dst);
            for (std::size_t j = 0; j < src.size(); ++j) order[src[j]] = dst[j];
        }
        Eigen::MatrixXd vb(k, k);
        for (int i = 0; i < k; ++i) vb.col(i) = b.strain_rotation.col(order[i]);

        // sign flips: det of the flipped matrix must match a's for the log
        for (unsigned mask = 0; mask < (1u << k); ++mask) {
            int flips = __builtin_popcount(mask);
            const double det_s = (flips % 2 == 0) ? 1.0 : -1.0;
            if (det_s * parity * det_target < 0.0) continue;
            Eigen::MatrixXd vs = vb;
            for (int i = 0; i < k; ++i)
                if (mask & (1u << i)) vs.col(i) = -vs.col(i);
            try {
                best_v = std::min(best_v, dist_rot(a.strain_rotation, vs));
            } catch (const BranchBoundaryError&) {
                // this representative sits at the branch boundary; skip it
            }
        }
        // advance the mixed-radix counter over group permutations
        std::size_t g = 0;
        while (g < groups.size()) {
            if (++choice[g] < group_perms[g].size()) break;
            choice[g] = 0;
            ++g;
        }
        if (g == groups.size()) break;
    }
    if (!std::isfinite(best_v))
        throw std::runtime_error("dist_product_canonical: no representative admits a logarithm");
    return std::sqrt(th_l * th_l + w.c_v * th_q * th_q + w.c_t * best_v * best_v);
}

LieTriple geodesic_triple(const LieTriple& a, const LieTriple& b, double t) {
    if (t < -1e-12 || t > 1.0 + 1e-12)
        throw std::invalid_argument("geodesic_triple: t must lie in [0, 1]");
    if (a.k() != b.k() || a.spatial_dim() != b.spatial_dim())
        throw std::invalid_argument("geodesic_triple: dimension mismatch");
    LieTriple out;
    const Eigen::MatrixXd lq = log_rotation(b.spatial_rotation * a.spatial_rotation.transpose());
    out.spatial_rotation = exp_skew(t * lq) * a.spatial_rotation;
    const Eigen::MatrixXd lv = log_rotation(b.strain_rotation * a.strain_rotation.transpose());
    out.strain_rotation = exp_skew(t * lv) * a.strain_rotation;
    out.moduli = ((1.0 - t) * a.moduli.array().log() + t * b.moduli.array().log()).exp();
    return out;
}

KelvinMatrix geodesic(const LieTriple& a, const LieTriple& b, double t) {
    return geodesic_triple(a, b, t).assemble();
}

KelvinMatrix geodesic_euclid(const KelvinMatrix& a, const KelvinMatrix& b, double t) {
    if (a.dim() != b.dim()) throw std::invalid_argument("geodesic_euclid: dimension mismatch");
    try {
        return KelvinMatrix((1.0 - t) * a.mat() + t * b.mat());
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error("geodesic_euclid: interpolant at t = " + std::to_string(t) +
                                 " left the SPD cone numerically: " + e.what());
    }
}

KelvinMatrix geodesic_log_euclid(const KelvinMatrix& a, const KelvinMatrix& b, double t) {
    if (a.dim() != b.dim()) throw std::invalid_argument("geodesic_log_euclid: dimension mismatch");
    auto logm = [](const Eigen::MatrixXd& m) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
        return Eigen::MatrixXd(es.eigenvectors() *
                               es.eigenvalues().array().log().matrix().asDiagonal() *
                               es.eigenvectors().transpose());
    };
    const Eigen::MatrixXd h = (1.0 - t) * logm(a.mat()) + t * logm(b.mat());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    return KelvinMatrix(es.eigenvectors() * es.eigenvalues().array().exp().matrix().asDiagonal() *
                        es.eigenvectors().transpose());
}

InterpolationPath interpolation_path(const KelvinMatrix& a, const KelvinMatrix& b,
                                     MetricKind kind, const std::vector<double>& ts) {
    if (kind == MetricKind::product)
        throw std::invalid_argument(
            "interpolation_path: the product metric needs triple endpoints");
    InterpolationPath path;
    path.kind = kind;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (i > 0 && ts[i] <= ts[i - 1])
            throw std::invalid_argument("interpolation_path: parameters must be increasing");
        path.samples.push_back(
            {ts[i], kind == MetricKind::euclid ? geodesic_euclid(a, b, ts[i])
                                               : geodesic_log_euclid(a, b, ts[i])});
    }
    return path;
}

InterpolationPath interpolation_path(const LieTriple& a, const LieTriple& b,
                                     const std::vector<double>& ts) {
    InterpolationPath path;
    path.kind = MetricKind::product;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (i > 0 && ts[i] <= ts[i - 1])
            throw std::invalid_argument("interpolation_path: parameters must be increasing");
        path.samples.push_back({ts[i], geodesic(a, b, ts[i])});
    }
    return path;
}

void write_path_csv(std::ostream& os, const InterpolationPath& path) {
    os << "# unit: GPa\n";
    os.precision(17);
    if (path.samples.empty()) return;
    const int k = path.samples.front().C.dim();
    os << "t,det";
    for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j) os << ",C" << (i + 1) << (j + 1);
    os << "\n";
    for (const PathSample& s : path.samples) {
        os << s.t << "," << s.C.det();
        for (int i = 0; i < k; ++i)
            for (int j = i; j < k; ++j) os << "," << s.C.mat()(i, j);
        os << "\n";
    }
}

std::vector<double> linspace01(int n) {
    if (n < 2) throw std::invalid_argument("linspace01: need at least 2 points");
    std::vector<double> ts(n);
    for (int i = 0; i < n; ++i) ts[i] = static_cast<double>(i) / (n - 1);
    return ts;
}

}  // namespace kelvin
