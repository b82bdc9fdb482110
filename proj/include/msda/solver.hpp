#pragma once

#include <optional>
#include <vector>

#include "msda/common.hpp"
#include "msda/suffstats.hpp"

namespace msda {

/// p x (K-1) discriminant directions; column k-1 contrasts class k with class 0.
class CoefMatrix {
public:
    CoefMatrix() = default;
    explicit CoefMatrix(Matrix theta);
    static CoefMatrix zeros(Index p, Index num_directions);

    const Matrix& theta() const { return theta_; }
    Index rows() const { return theta_.rows(); }
    Index cols() const { return theta_.cols(); }
    /// Sorted indices of rows with any nonzero entry.
    const std::vector<Index>& active_blocks() const { return active_; }
    bool is_zero() const { return active_.empty(); }

private:
    Matrix theta_;
    std::vector<Index> active_;
};

struct SolverOptions {
    /// Stop when a sweep changes no coefficient by more than this.
    double tol = 1e-6;
    int max_sweeps = 1000;
    bool active_set = true;
    double lambda = 0.0;
    /// Record the objective after every sweep in the diagnostics.
    bool track_objective = false;
};

struct SolveDiagnostics {
    int sweeps = 0;
    double max_change = 0.0;
    double kkt = 0.0;
    bool converged = false;
    std::vector<double> objective_trace;
};

struct SolveResult {
    CoefMatrix coef;
    SolveDiagnostics diagnostics;
};

/// Mutable iterate of the block coordinate descent; `cache` tracks S * theta.
class SolverState {
public:
    SolverState(const SuffStats& stats, const Matrix& theta);

    const Matrix& theta() const { return theta_; }
    const Matrix& cache() const { return cache_; }
    int sweep_count() const { return sweeps_; }
    double last_max_change() const { return last_max_change_; }

    /// Recomputes the cache from scratch.
    void resync(const SuffStats& stats);

private:
    friend double block_update(SolverState&, const SuffStats&, Index, double);
    friend SolveResult solve(const SuffStats&, const SolverOptions&, const std::optional<CoefMatrix>&);

    Matrix theta_;
    Matrix cache_;
    Eigen::RowVectorXd scratch_;
    int sweeps_ = 0;
    double last_max_change_ = 0.0;
};

/// v * (1 - t / ||v||)_+, and 0 when ||v|| = 0.
Vector group_soft_threshold(const Vector& v, double t);

/**
 * Exact minimization over row j with all other rows held fixed.
 * Zero-variance features are left at zero. Returns the max-abs change of the row.
 */
double block_update(SolverState& state, const SuffStats& stats, Index j, double lambda);

SolveResult solve(const SuffStats& stats, const SolverOptions& options,
                  const std::optional<CoefMatrix>& warm_start = std::nullopt);

/// sum_k { theta_k' S theta_k / 2 - delta_k' theta_k } + lambda * sum_j ||theta_j.||
double objective(const SuffStats& stats, const Matrix& theta, double lambda);

/// Smallest lambda at which the zero solution is optimal.
double lambda_max(const SuffStats& stats);

/// Largest violation of the optimality conditions; 0 iff theta is a minimizer.
double kkt_residual(const SuffStats& stats, const Matrix& theta, double lambda);

struct SolutionPath {
    std::vector<double> lambdas;
    std::vector<CoefMatrix> solutions;
    std::vector<double> kkt_residuals;
    std::vector<int> sweeps;
    std::vector<bool> converged;
};

/// Geometric grid from lambda_max down to lambda_max * min_ratio.
std::vector<double> lambda_grid(double lambda_max, int n_lambda, double min_ratio);

SolutionPath solve_path(const SuffStats& stats, int n_lambda, double lambda_min_ratio,
                        const SolverOptions& options);
SolutionPath solve_path(const SuffStats& stats, const std::vector<double>& lambdas,
                        const SolverOptions& options);

struct PathOptions {
    int n_lambda = 100;
    double lambda_min_ratio = 0.05;
    /// Solve on features divided by their pooled within-class standard deviation.
    bool standardize = true;
    SolverOptions solver;
};

/**
 * Path on optionally standardized statistics, with the coefficients mapped
 * back to the original feature scale. Lambdas (and KKT residuals) refer to
 * the problem actually solved, i.e. the standardized one when enabled.
 */
SolutionPath fit_path(const SuffStats& stats, const PathOptions& options,
                      const std::optional<std::vector<double>>& lambdas = std::nullopt);

/// lambda_max of the problem fit_path would solve.
double path_lambda_max(const SuffStats& stats, bool standardize);

} // namespace msda
