#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "msda/common.hpp"
#include "msda/dataset.hpp"
#include "msda/solver.hpp"

namespace msda {

struct CVOptions {
    int n_folds = 5;
    std::uint64_t seed = 42;
    int jobs = 1;
    PathOptions path;
    PriorMode priors = PriorMode::Empirical;
};

struct CVResult {
    std::vector<double> lambdas;
    std::vector<double> mean_cv_error;
    std::vector<double> se_cv_error;
    double best_lambda = 0.0;
    std::size_t best_index = 0;
    std::vector<int> fold_assignments;
    std::uint64_t seed = 0;
};

/**
 * Stratified fold assignment: each class's rows are shuffled and dealt to
 * folds round-robin, continuing the rotation across classes so remainders
 * are spread over different folds.
 */
std::vector<int> stratified_folds(const std::vector<int>& labels, int num_classes,
                                  int n_folds, std::uint64_t seed);

/**
 * K-fold cross-validation of the penalized path. The lambda grid comes from
 * the full data and is shared by all folds. The best lambda minimizes the mean
 * fold error; ties go to the larger lambda.
 */
CVResult cross_validate(const LabeledDataset& data, const CVOptions& options);

/// Index of the minimum; ties to the earliest entry (largest lambda on a descending grid).
std::size_t argmin_first(const std::vector<double>& values);

struct SelectionMetrics {
    int correct = 0;    ///< C
    int incorrect = 0;  ///< IC
};

SelectionMetrics selection_metrics(const std::vector<Index>& estimated,
                                   const std::vector<Index>& truth);

} // namespace msda
