#include "msda/modelsel.hpp"

#include <cmath>
#include <random>

#include "msda/classify.hpp"
#include "msda/suffstats.hpp"

namespace msda {

namespace {

bool folds_usable(const std::vector<int>& folds, const std::vector<int>& labels, int K, int n_folds)
{
    for (int f = 0; f < n_folds; ++f) {
        std::vector<Index> counts(K, 0);
        Index n_train = 0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (folds[i] == f) continue;
            ++counts[labels[i]];
            ++n_train;
        }
        if (n_train <= K) return false;
        for (Index c : counts)
            if (c == 0) return false;
    }
    return true;
}

} // namespace

std::vector<int> stratified_folds(const std::vector<int>& labels, int num_classes, int n_folds,
                                  std::uint64_t seed)
{
    if (n_folds < 2) throw InputError("need at least 2 folds");
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0xF01Du};
    std::mt19937_64 rng(seq);
    std::vector<int> folds(labels.size(), -1);
    std::size_t offset = 0;
    for (int k = 0; k < num_classes; ++k) {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == k) rows.push_back(i);
        std::shuffle(rows.begin(), rows.end(), rng);
        for (std::size_t r = 0; r < rows.size(); ++r)
            folds[rows[r]] = static_cast<int>((offset + r) % static_cast<std::size_t>(n_folds));
        offset += rows.size();
    }
    return folds;
}

std::size_t argmin_first(const std::vector<double>& values)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] < values[best] - 1e-12) best = i;
    return best;
}

CVResult cross_validate(const LabeledDataset& data, const CVOptions& options)
{
    const int F = options.n_folds;
    const int K = data.num_classes();
    if (F < 2) throw InputError("need at least 2 folds");
    for (Index c : data.class_counts())
        if (c < F) throw InputError("every class needs at least n_folds members");

    CVResult result;
    const SuffStats full = SuffStats::compute(data);
    result.lambdas = lambda_grid(path_lambda_max(full, options.path.standardize), options.path.n_lambda,
                                 options.path.lambda_min_ratio);

    result.seed = options.seed;
    result.fold_assignments = stratified_folds(data.labels(), K, F, result.seed);
    if (!folds_usable(result.fold_assignments, data.labels(), K, F)) {
        result.seed = options.seed + 1;
        result.fold_assignments = stratified_folds(data.labels(), K, F, result.seed);
        if (!folds_usable(result.fold_assignments, data.labels(), K, F))
            throw InputError("cross-validation folds lose a class even after re-drawing");
    }

    const std::size_t L = result.lambdas.size();
    std::vector<std::vector<double>> errors(static_cast<std::size_t>(F), std::vector<double>(L, 0.0));
    parallel_for(static_cast<std::size_t>(F), options.jobs, [&](std::size_t f) {
        std::vector<Index> train_rows, test_rows;
        for (std::size_t i = 0; i < result.fold_assignments.size(); ++i)
            (result.fold_assignments[i] == static_cast<int>(f) ? test_rows : train_rows).push_back(static_cast<Index>(i));
        const LabeledDataset train = data.subset_rows(train_rows);
        const Matrix test_x = data.features()(test_rows, Eigen::all);
        std::vector<int> test_y;
        for (Index r : test_rows) test_y.push_back(data.labels()[static_cast<std::size_t>(r)]);

        const SolutionPath path = fit_path(SuffStats::compute(train), options.path, result.lambdas);
        for (std::size_t l = 0; l < L; ++l) {
            const FittedClassifier clf = fit_projected_lda(train, path.solutions[l], options.priors);
            errors[f][l] = error_rate(clf.predict(test_x), test_y);
        }
    });

    result.mean_cv_error.assign(L, 0.0);
    result.se_cv_error.assign(L, 0.0);
    for (std::size_t l = 0; l < L; ++l) {
        double mean = 0.0;
        for (int f = 0; f < F; ++f) mean += errors[static_cast<std::size_t>(f)][l];
        mean /= F;
        double ss = 0.0;
        for (int f = 0; f < F; ++f) ss += std::pow(errors[static_cast<std::size_t>(f)][l] - mean, 2);
        result.mean_cv_error[l] = mean;
        result.se_cv_error[l] = std::sqrt(ss / (F - 1)) / std::sqrt(static_cast<double>(F));
    }
    result.best_index = argmin_first(result.mean_cv_error);
    result.best_lambda = result.lambdas[result.best_index];
    return result;
}

SelectionMetrics selection_metrics(const std::vector<Index>& estimated, const std::vector<Index>& truth)
{
    std::set<Index> true_set(truth.begin(), truth.end());
    std::set<Index> est_set(estimated.begin(), estimated.end());
    SelectionMetrics m;
    for (Index j : est_set) (true_set.count(j) ? m.correct : m.incorrect)++;
    return m;
}

} // namespace msda
