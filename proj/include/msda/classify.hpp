#pragma once

#include <vector>

#include "msda/common.hpp"
#include "msda/dataset.hpp"
#include "msda/solver.hpp"
#include "msda/suffstats.hpp"

namespace msda {

/// Classical LDA fit on the (K-1)-dimensional scores X * theta.
struct FittedClassifier {
    Matrix projection;   ///< p x (K-1)
    Matrix proj_means;   ///< (K-1) x K, column k is the projected mean of class k
    Matrix proj_prec;    ///< (pseudo-)inverse of the projected pooled covariance
    Vector log_priors;   ///< length K
    int projected_rank = 0;
    /// Set when the projection is zero; prediction then uses the priors only.
    bool degenerate = false;

    int num_classes() const { return static_cast<int>(log_priors.size()); }

    /// Discriminant scores, one row per sample and one column per class.
    Matrix scores(const Matrix& x) const;
    /// 0-based class per row; ties go to the smallest class index.
    std::vector<int> predict(const Matrix& x) const;
};

FittedClassifier fit_projected_lda(const LabeledDataset& data, const CoefMatrix& theta,
                                   PriorMode priors = PriorMode::Empirical);

/**
 * LDA in the projected space from given projected means and covariance.
 * Eigenvalues below 1e-10 times the largest are dropped in the pseudo-inverse.
 */
FittedClassifier make_projected_classifier(Matrix projection, Matrix proj_means,
                                           const Matrix& proj_cov, Vector log_priors);

double error_rate(const std::vector<int>& predicted, const std::vector<int>& truth);

} // namespace msda
