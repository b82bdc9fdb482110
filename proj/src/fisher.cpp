#include "msda/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace msda {

FisherDirections recover_fisher(const CoefMatrix& theta, const SuffStats& stats)
{
    const int K = stats.num_classes();
    if (theta.rows() != stats.p() || theta.cols() != K - 1)
        throw InputError("coefficient matrix must be p x (K-1)");

    FisherDirections out;
    const auto& support = theta.active_blocks();
    const Index s = static_cast<Index>(support.size());
    if (s == 0) {
        out.eta = Matrix::Zero(stats.p(), 0);
        return out;
    }

    Matrix theta0 = Matrix::Zero(s, K);
    theta0.rightCols(K - 1) = theta.theta()(support, Eigen::all);
    const Matrix pi = Matrix::Identity(K, K) - Matrix::Constant(K, K, 1.0 / K);
    const Matrix means = stats.class_means()(support, Eigen::all);
    const Vector grand = means * stats.priors();
    const Matrix delta0 = means.colwise() - grand;
    const Matrix m = theta0 * pi * delta0.transpose();

    Eigen::EigenSolver<Matrix> es(m);
    const double scale = m.norm();
    std::vector<Index> accepted;
    for (Index i = 0; i < s; ++i) {
        const auto ev = es.eigenvalues()[i];
        if (ev.real() > 1e-10 * scale && std::abs(ev.imag()) <= 1e-8 * scale) accepted.push_back(i);
    }
    std::stable_sort(accepted.begin(), accepted.end(), [&](Index a, Index b) {
        return es.eigenvalues()[a].real() > es.eigenvalues()[b].real();
    });
    if (static_cast<Index>(accepted.size()) > K - 1) accepted.resize(static_cast<std::size_t>(K - 1));

    Matrix cov_dd(s, s);
    for (Index c = 0; c < s; ++c) cov_dd.col(c) = stats.cov_column(support[c])(support);

    out.eta = Matrix::Zero(stats.p(), static_cast<Index>(accepted.size()));
    for (std::size_t c = 0; c < accepted.size(); ++c) {
        Vector v = es.eigenvectors().col(accepted[c]).real();
        const double quad = v.dot(cov_dd * v);
        v /= quad > 0.0 ? std::sqrt(quad) : v.norm();
        Index pivot = 0;
        v.cwiseAbs().maxCoeff(&pivot);
        if (v[pivot] < 0.0) v = -v;
        for (Index r = 0; r < s; ++r) out.eta(support[r], static_cast<Index>(c)) = v[r];
        out.eigenvalues.push_back(es.eigenvalues()[accepted[c]].real());
    }
    return out;
}

} // namespace msda
