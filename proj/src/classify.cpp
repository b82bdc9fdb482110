#include "msda/classify.hpp"

#include <cmath>

namespace msda {

FittedClassifier make_projected_classifier(Matrix projection, Matrix proj_means,
                                           const Matrix& proj_cov, Vector log_priors)
{
    FittedClassifier clf;
    const Index d = projection.cols();
    clf.degenerate = (projection.array() == 0.0).all();
    clf.projection = std::move(projection);
    clf.proj_means = std::move(proj_means);
    clf.log_priors = std::move(log_priors);
    clf.proj_prec = Matrix::Zero(d, d);
    clf.projected_rank = 0;
    if (clf.degenerate || d == 0) return clf;

    Eigen::SelfAdjointEigenSolver<Matrix> eig(proj_cov);
    const Vector& values = eig.eigenvalues();
    const double largest = values.maxCoeff();
    if (!(largest > 0.0)) return clf;
    Vector inv = Vector::Zero(d);
    for (Index i = 0; i < d; ++i) {
        if (values[i] > 1e-10 * largest) {
            inv[i] = 1.0 / values[i];
            ++clf.projected_rank;
        }
    }
    const Matrix& vecs = eig.eigenvectors();
    clf.proj_prec = vecs * inv.asDiagonal() * vecs.transpose();
    clf.proj_prec = 0.5 * (clf.proj_prec + clf.proj_prec.transpose()).eval();
    return clf;
}

FittedClassifier fit_projected_lda(const LabeledDataset& data, const CoefMatrix& theta, PriorMode priors)
{
    const int K = data.num_classes();
    if (theta.rows() != data.p() || theta.cols() != K - 1)
        throw InputError("coefficient matrix must be p x (K-1)");

    const auto counts = data.class_counts();
    Vector log_priors(K);
    for (int k = 0; k < K; ++k)
        log_priors[k] = priors == PriorMode::Uniform
                            ? -std::log(static_cast<double>(K))
                            : std::log(static_cast<double>(counts[k]) / static_cast<double>(data.n()));

    const auto& active = theta.active_blocks();
    const Index d = K - 1;
    Matrix means = Matrix::Zero(d, K);
    if (active.empty())
        return make_projected_classifier(theta.theta(), std::move(means), Matrix::Zero(d, d), std::move(log_priors));

    Matrix z = data.features()(Eigen::all, active) * theta.theta()(active, Eigen::all);
    const auto& y = data.labels();
    for (Index i = 0; i < data.n(); ++i) means.col(y[i]) += z.row(i).transpose();
    for (int k = 0; k < K; ++k) means.col(k) /= static_cast<double>(counts[k]);
    for (Index i = 0; i < data.n(); ++i) z.row(i) -= means.col(y[i]).transpose();
    const Matrix cov = z.transpose() * z / static_cast<double>(data.n() - K);
    return make_projected_classifier(theta.theta(), std::move(means), cov, std::move(log_priors));
}

Matrix FittedClassifier::scores(const Matrix& x) const
{
    if (x.cols() != projection.rows())
        throw InputError("expected " + std::to_string(projection.rows()) + " feature columns, got " +
                         std::to_string(x.cols()));
    for (Index i = 0; i < x.rows(); ++i)
        if (!x.row(i).allFinite()) throw InputError("non-finite value in input row " + std::to_string(i + 1));

    const int K = num_classes();
    Matrix out = log_priors.transpose().replicate(x.rows(), 1);
    if (degenerate) return out;

    std::vector<Index> rows;
    for (Index j = 0; j < projection.rows(); ++j)
        if ((projection.row(j).array() != 0.0).any()) rows.push_back(j);
    const Matrix z = x(Eigen::all, rows) * projection(rows, Eigen::all);
    const Matrix weights = proj_prec * proj_means;  // (K-1) x K
    out.noalias() += z * weights;
    for (int k = 0; k < K; ++k) out.col(k).array() -= 0.5 * proj_means.col(k).dot(weights.col(k));
    return out;
}

std::vector<int> FittedClassifier::predict(const Matrix& x) const
{
    const Matrix s = scores(x);
    std::vector<int> labels(static_cast<std::size_t>(x.rows()));
    for (Index i = 0; i < s.rows(); ++i) {
        int best = 0;
        for (Index k = 1; k < s.cols(); ++k)
            if (s(i, k) > s(i, best)) best = static_cast<int>(k);
        labels[static_cast<std::size_t>(i)] = best;
    }
    return labels;
}

double error_rate(const std::vector<int>& predicted, const std::vector<int>& truth)
{
    if (predicted.size() != truth.size()) throw InputError("prediction count mismatch");
    if (truth.empty()) return 0.0;
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) wrong += predicted[i] != truth[i];
    return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

} // namespace msda
