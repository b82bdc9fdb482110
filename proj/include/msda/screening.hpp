#pragma once

#include <vector>

#include "msda/common.hpp"
#include "msda/dataset.hpp"

namespace msda {

struct ScreeningReport {
    std::vector<double> f_stats;
    /// Indices of the d_n largest statistics, in rank order.
    std::vector<Index> kept;
    Index d_n = 0;
};

/// One-way ANOVA F statistic of every feature against the class labels.
std::vector<double> f_statistics(const LabeledDataset& data);

/**
 * Keeps the d_n features with the largest F statistics (ties to the lower
 * index). A feature with zero within-class variance but distinct class means
 * scores +inf; a feature that is constant within and across classes scores 0.
 */
ScreeningReport f_screen(const LabeledDataset& data, Index d_n);

} // namespace msda
