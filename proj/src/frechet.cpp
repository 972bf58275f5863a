#include "kelvin/frechet.hpp"

#include <cmath>
#include <stdexcept>

#include "kelvin/parallel.hpp"
#include "kelvin/rotations.hpp"

namespace kelvin {

namespace {
constexpr double kPi = 3.14159265358979323846;

Eigen::MatrixXd weighted_matrix_sum(const std::vector<Eigen::MatrixXd>& terms) {
    return tree_reduce<Eigen::MatrixXd>(
        std::vector<Eigen::MatrixXd>(terms),
        [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return a + b; },
        Eigen::MatrixXd::Zero(terms.front().rows(), terms.front().cols()));
}
}  // namespace

Eigen::VectorXd normalized_weights(const Eigen::VectorXd& w, std::size_t count) {
    if (count == 0) throw std::invalid_argument("ensemble must be non-empty");
    if (w.size() == 0) return Eigen::VectorXd::Constant(count, 1.0 / double(count));
    if (static_cast<std::size_t>(w.size()) != count)
        throw std::invalid_argument("weight count does not match ensemble size");
    if (!(w.minCoeff() > 0.0)) throw std::invalid_argument("weights must be positive");
    const double sum = w.sum();
    if (std::abs(sum - 1.0) > 1e-12) return w / sum;
    return w;
}

MeanResult mean_euclid(const std::vector<KelvinMatrix>& items, const Eigen::VectorXd& weights) {
    const Eigen::VectorXd w = normalized_weights(weights, items.size());
    const int k = items.front().dim();
    std::vector<Eigen::MatrixXd> terms;
    terms.reserve(items.size());
    for (std::size_t j = 0; j < items.size(); ++j) {
        if (items[j].dim() != k)
            throw std::invalid_argument("mean_euclid: mixed dimensions in ensemble");
        terms.push_back(w(j) * items[j].mat());
    }
    const Eigen::MatrixXd m = weighted_matrix_sum(terms);
    MeanResult res{KelvinMatrix(m), std::nullopt, 0.0, 0, true};
    double var = 0.0;
    for (std::size_t j = 0; j < items.size(); ++j)
        var += w(j) * (items[j].mat() - m).squaredNorm();
    res.variance = var;
    return res;
}

Eigen::VectorXd mean_logdiag(const std::vector<Eigen::VectorXd>& lambdas,
                             const Eigen::VectorXd& weights) {
    const Eigen::VectorXd w = normalized_weights(weights, lambdas.size());
    const int k = static_cast<int>(lambdas.front().size());
    std::vector<Eigen::MatrixXd> terms;
    terms.reserve(lambdas.size());
    for (std::size_t j = 0; j < lambdas.size(); ++j) {
        if (lambdas[j].size() != k)
            throw std::invalid_argument("mean_logdiag: mixed dimensions");
        if (!(lambdas[j].minCoeff() > 0.0))
            throw std::invalid_argument("mean_logdiag: entries must be positive");
        terms.push_back(w(j) * lambdas[j].array().log().matrix());
    }
    return weighted_matrix_sum(terms).array().exp();
}

Eigen::MatrixXd mean_rotation(const std::vector<Eigen::MatrixXd>& qs,
                              const Eigen::VectorXd& weights, MeanOptions opts,
                              int* iterations_out) {
    const Eigen::VectorXd w = normalized_weights(weights, qs.size());
    const int n = static_cast<int>(qs.front().rows());
    for (const Eigen::MatrixXd& q : qs)
        if (q.rows() != n || q.cols() != n)
            throw std::invalid_argument("mean_rotation: mixed dimensions");

    // central point for the dispersion gate: projection of the weighted
    // chordal mean onto the orthogonal matrices with the members' determinant
    // sign (V factors of a triple ensemble may consistently carry det -1)
    Eigen::MatrixXd center;
    {
        std::vector<Eigen::MatrixXd> terms(qs.size());
        for (std::size_t j = 0; j < qs.size(); ++j) terms[j] = w(j) * qs[j];
        const Eigen::MatrixXd chordal = weighted_matrix_sum(terms);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(chordal,
                                              Eigen::ComputeFullU | Eigen::ComputeFullV);
        const double target = qs.front().determinant() < 0.0 ? -1.0 : 1.0;
        Eigen::VectorXd diag = Eigen::VectorXd::Ones(n);
        const double base = (svd.matrixU() * svd.matrixV().transpose()).determinant();
        diag(n - 1) = base * target < 0.0 ? -1.0 : 1.0;
        center = svd.matrixU() * diag.asDiagonal() * svd.matrixV().transpose();
    }

    // every member must stay within a quarter turn of the center
    for (std::size_t j = 0; j < qs.size(); ++j) {
        const std::vector<double> angles = rotation_plane_angles(qs[j] * center.transpose());
        if (!angles.empty() && angles.front() >= kPi / 2.0 + 1e-9)
            throw std::runtime_error(
                "mean_rotation: ensemble dispersion exceeds the pi/2 geodesic ball "
                "(plane angle " + std::to_string(angles.front()) + ")");
    }

    // initial guess: member with the smallest weighted squared distance sum;
    // for large ensembles the all-pairs scan is skipped in favour of the
    // chordal center
    Eigen::MatrixXd mean = center;
    if (qs.size() <= 256) {
        std::vector<double> cost(qs.size(), 0.0);
        parallel_for(
            qs.size(),
            [&](std::size_t i) {
                double c = 0.0;
                for (std::size_t j = 0; j < qs.size(); ++j) {
                    const double d = dist_rot(qs[i], qs[j]);
                    c += w(j) * d * d;
                }
                cost[i] = c;
            },
            opts.parallel && qs.size() > 64);
        std::size_t best = 0;
        for (std::size_t i = 1; i < qs.size(); ++i)
            if (cost[i] < cost[best]) best = i;
        mean = qs[best];
    }

    int iter = 0;
    for (; iter < opts.max_iter; ++iter) {
        std::vector<Eigen::MatrixXd> terms(qs.size());
        parallel_for(
            qs.size(),
            [&](std::size_t j) {
                terms[j] = w(j) * log_rotation(qs[j] * mean.transpose());
            },
            opts.parallel && qs.size() > 64);
        const Eigen::MatrixXd delta = weighted_matrix_sum(terms);
        if (delta.norm() <= opts.grad_tol) {
            if (iterations_out) *iterations_out = iter + 1;
            return mean;
        }
        mean = exp_skew(0.5 * (delta - delta.transpose())) * mean;
    }
    throw std::runtime_error("mean_rotation: no convergence after " +
                             std::to_string(opts.max_iter) + " iterations");
}

MeanResult mean_product(const std::vector<LieTriple>& items, const Eigen::VectorXd& weights,
                        MetricWeights mw, MeanOptions opts) {
    const Eigen::VectorXd w = normalized_weights(weights, items.size());
    const int k = items.front().k();
    std::vector<Eigen::MatrixXd> qs, vs;
    std::vector<Eigen::VectorXd> lams;
    qs.reserve(items.size());
    vs.reserve(items.size());
    lams.reserve(items.size());
    for (const LieTriple& t : items) {
        if (t.k() != k) throw std::invalid_argument("mean_product: mixed dimensions");
        qs.push_back(t.spatial_rotation);
        vs.push_back(t.strain_rotation);
        lams.push_back(t.moduli);
    }
    int it_q = 1, it_v = 1;
    LieTriple mean;
    mean.spatial_rotation = mean_rotation(qs, w, opts, &it_q);
    mean.strain_rotation = mean_rotation(vs, w, opts, &it_v);
    mean.moduli = mean_logdiag(lams, w);

    MeanResult res{mean.assemble(), mean, 0.0, std::max(it_q, it_v), true};
    double var = 0.0;
    for (std::size_t j = 0; j < items.size(); ++j) {
        const double d = dist_product(mean, items[j], mw);
        var += w(j) * d * d;
    }
    res.variance = var;
    return res;
}

}  // namespace kelvin
