#include "msda/screening.hpp"

#include <limits>
#include <numeric>

namespace msda {

std::vector<double> f_statistics(const LabeledDataset& data)
{
    const int K = data.num_classes();
    const Index n = data.n();
    const Matrix& x = data.features();
    const auto& y = data.labels();
    const auto counts = data.class_counts();

    Matrix means = Matrix::Zero(K, data.p());
    for (Index i = 0; i < n; ++i) means.row(y[i]) += x.row(i);
    for (int k = 0; k < K; ++k) means.row(k) /= static_cast<double>(counts[k]);
    const Eigen::RowVectorXd grand = x.colwise().mean();

    Eigen::RowVectorXd between = Eigen::RowVectorXd::Zero(data.p());
    for (int k = 0; k < K; ++k)
        between += static_cast<double>(counts[k]) * (means.row(k) - grand).array().square().matrix();
    Eigen::RowVectorXd within = Eigen::RowVectorXd::Zero(data.p());
    for (Index i = 0; i < n; ++i) within += (x.row(i) - means.row(y[i])).array().square().matrix();

    std::vector<double> f(static_cast<std::size_t>(data.p()));
    for (Index j = 0; j < data.p(); ++j) {
        const double num = between[j] / static_cast<double>(K - 1);
        const double den = within[j] / static_cast<double>(n - K);
        if (den > 0.0)
            f[static_cast<std::size_t>(j)] = num / den;
        else
            f[static_cast<std::size_t>(j)] = num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    return f;
}

ScreeningReport f_screen(const LabeledDataset& data, Index d_n)
{
    if (d_n < 1 || d_n > data.p()) throw InputError("d_n must lie in [1, p]");
    ScreeningReport report;
    report.f_stats = f_statistics(data);
    report.d_n = d_n;

    std::vector<Index> order(report.f_stats.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return report.f_stats[static_cast<std::size_t>(a)] > report.f_stats[static_cast<std::size_t>(b)];
    });
    order.resize(static_cast<std::size_t>(d_n));
    report.kept = std::move(order);
    return report;
}

} // namespace msda
