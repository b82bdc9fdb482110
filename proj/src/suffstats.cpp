#include "msda/suffstats.hpp"

#include <cmath>

namespace msda {

SuffStats SuffStats::compute(const LabeledDataset& data, const StatsOptions& options)
{
    SuffStats s;
    s.n_ = data.n();
    s.p_ = data.p();
    s.num_classes_ = data.num_classes();
    s.class_counts_ = data.class_counts();
    s.memo_columns_ = options.memo_columns;

    const int K = s.num_classes_;
    const Matrix& x = data.features();
    const auto& y = data.labels();

    s.priors_.resize(K);
    for (int k = 0; k < K; ++k) {
        if (s.class_counts_[k] == 0) throw InputError("class with zero rows");
        s.priors_[k] = options.priors == PriorMode::Uniform
                           ? 1.0 / K
                           : static_cast<double>(s.class_counts_[k]) / static_cast<double>(s.n_);
    }

    s.class_means_ = Matrix::Zero(s.p_, K);
    for (Index i = 0; i < s.n_; ++i) s.class_means_.col(y[i]) += x.row(i).transpose();
    for (int k = 0; k < K; ++k) s.class_means_.col(k) /= static_cast<double>(s.class_counts_[k]);

    s.delta_.resize(s.p_, K - 1);
    for (int k = 1; k < K; ++k) s.delta_.col(k - 1) = s.class_means_.col(k) - s.class_means_.col(0);

    auto centered = std::make_shared<Matrix>(x);
    for (Index i = 0; i < s.n_; ++i) centered->row(i) -= s.class_means_.col(y[i]).transpose();

    const double denom = static_cast<double>(s.n_ - K);
    s.cov_diag_ = centered->colwise().squaredNorm().transpose() / denom;

    bool dense = false;
    switch (options.mode) {
    case CovMode::Dense: dense = true; break;
    case CovMode::OnDemand: dense = false; break;
    case CovMode::Auto: dense = s.p_ <= options.dense_max_p; break;
    }
    if (dense) {
        if (s.p_ > 0 && s.p_ > options.dense_max_entries / s.p_)
            throw InputError("dense covariance exceeds the memory budget (p = " + std::to_string(s.p_) + ")");
        auto cov = std::make_shared<Matrix>(s.p_, s.p_);
        cov->setZero();
        cov->selfadjointView<Eigen::Lower>().rankUpdate(centered->transpose(), 1.0 / denom);
        *cov = cov->selfadjointView<Eigen::Lower>();
        // Keep the diagonal bit-identical to the on-demand route.
        cov->diagonal() = s.cov_diag_;
        s.dense_cov_ = std::move(cov);
    } else {
        s.centered_ = std::move(centered);
        s.memo_ = std::make_shared<detail::ColumnMemo>(s.memo_columns_);
    }
    return s;
}

const Matrix& SuffStats::dense_cov() const
{
    if (!dense_cov_) throw std::logic_error("covariance is not materialized in on-demand mode");
    return *dense_cov_;
}

std::shared_ptr<const Vector> SuffStats::cov_column_shared(Index j) const
{
    if (j < 0 || j >= p_) throw InputError("feature index out of range");
    if (dense_cov_) return std::make_shared<const Vector>(dense_cov_->col(j));
    return memo_->get(j, [&]() -> Vector {
        Vector col = centered_->transpose() * centered_->col(j) / static_cast<double>(n_ - num_classes_);
        col[j] = cov_diag_[j];
        return col;
    });
}

Vector SuffStats::cov_column(Index j) const
{
    if (dense_cov_) {
        if (j < 0 || j >= p_) throw InputError("feature index out of range");
        return dense_cov_->col(j);
    }
    return *cov_column_shared(j);
}

Matrix SuffStats::cov_times(const Matrix& m) const
{
    if (m.rows() != p_) throw InputError("dimension mismatch in cov_times");
    if (dense_cov_) return (*dense_cov_) * m;
    const Matrix projected = (*centered_) * m;
    return centered_->transpose() * projected / static_cast<double>(n_ - num_classes_);
}

SuffStats SuffStats::rescaled(const Vector& scale) const
{
    if (scale.size() != p_ || !(scale.array() > 0.0).all())
        throw InputError("scale must be positive with length p");
    SuffStats s = *this;
    const Vector inv = scale.cwiseInverse();
    s.class_means_ = inv.asDiagonal() * class_means_;
    s.delta_ = inv.asDiagonal() * delta_;
    s.cov_diag_ = cov_diag_.cwiseProduct(inv.cwiseAbs2());
    if (dense_cov_) {
        auto cov = std::make_shared<Matrix>(inv.asDiagonal() * (*dense_cov_) * inv.asDiagonal());
        cov->diagonal() = s.cov_diag_;
        s.dense_cov_ = std::move(cov);
    } else {
        s.centered_ = std::make_shared<Matrix>((*centered_) * inv.asDiagonal());
        s.memo_ = std::make_shared<detail::ColumnMemo>(memo_columns_);
    }
    return s;
}

Vector SuffStats::standardizing_scale() const
{
    Vector scale(p_);
    for (Index j = 0; j < p_; ++j) scale[j] = cov_diag_[j] > 0.0 ? std::sqrt(cov_diag_[j]) : 1.0;
    return scale;
}

} // namespace msda
