#pragma once

#include <vector>

#include "msda/common.hpp"
#include "msda/solver.hpp"
#include "msda/suffstats.hpp"

namespace msda {

struct FisherDirections {
    Matrix eta;                    ///< p x r, r <= K-1
    std::vector<double> eigenvalues;  ///< descending, positive
};

/**
 * Fisher discriminant directions from the Bayes directions theta.
 *
 * Forms theta0 = (0, theta), Pi = I_K - 11'/K and delta0 with columns
 * mu_k - mu_bar (mu_bar prior-weighted), restricted to the rows in the
 * support of theta. The right eigenvectors of theta0 Pi delta0' with
 * positive eigenvalues are the directions; they are scaled to unit length
 * in the pooled covariance metric and embedded back with zeros off-support.
 */
FisherDirections recover_fisher(const CoefMatrix& theta, const SuffStats& stats);

} // namespace msda
