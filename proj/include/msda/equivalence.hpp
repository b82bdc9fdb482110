#pragma once

#include <vector>

#include "msda/common.hpp"
#include "msda/dataset.hpp"
#include "msda/suffstats.hpp"

namespace msda {

struct DsdaFit {
    Vector theta;
    double intercept = 0.0;
    double kkt = 0.0;
    int sweeps = 0;
};

/**
 * l1-penalized least squares of the raw class labels (1 or 2) on the
 * features with a free intercept:
 *   min sum_i (y_i - b - x_i' theta)^2 + lambda * ||theta||_1.
 * Solved by coordinate descent on the centered Gram matrix until the KKT
 * residual is below `kkt_tol`.
 */
DsdaFit solve_dsda(const LabeledDataset& data, double lambda, double kkt_tol = 1e-8,
                   int max_sweeps = 100000);

/// Smallest lambda at which solve_dsda returns a zero direction.
double dsda_lambda_max(const LabeledDataset& data);

/**
 * Stationarity residual of min phi' S phi + penalty * ||phi||_1 subject to
 * phi' delta = 1, with the multiplier set to its value at a KKT point.
 */
double road_kkt_residual(const SuffStats& stats, const Vector& phi, double penalty);

struct EquivalenceReport {
    double lambda = 0.0;
    bool skipped = false;
    double c0 = 0.0;              ///< msda(lambda)' delta
    double c1 = 0.0;              ///< dsda(lambda)' delta
    double a = 0.0;               ///< n |c1| / |c0|
    double cosine_literal = 0.0;  ///< cos(msda(lambda), dsda(a lambda))
    double road_penalty = 0.0;    ///< 2 lambda / |c0|
    double road_kkt_residual = 0.0;
    double road_kkt_residual_literal = 0.0;  ///< residual at lambda / |c0|
    double dsda_lambda = 0.0;     ///< (n - 2) c road_penalty
    double cosine_msda_dsda = 0.0;
    double msda_kkt = 0.0;
    double dsda_kkt = 0.0;
};

/**
 * Binary MSDA against ROAD and DSDA at each lambda (unstandardized problem).
 *
 * With phi = msda(lambda) / c0, phi solves ROAD at penalty 2 lambda / |c0|.
 * DSDA at penalty mu equals c * ROAD(mu / ((n - 2) c)), and the matching
 * DSDA penalty is (n - 2) c * road_penalty with
 * c = 2 n pi1 pi2 / ((n - 2) nu + 2 n pi1 pi2), nu the ROAD multiplier.
 * The mapping with a = n |c1(lambda)| / |c0(lambda)| is reported alongside.
 */
std::vector<EquivalenceReport> check_binary_equivalence(const LabeledDataset& data,
                                                  const std::vector<double>& lambdas,
                                                  double solver_tol = 1e-12);

} // namespace msda
