#include "msda/solver.hpp"

#include <cmath>

namespace msda {

namespace {

std::vector<Index> nonzero_rows(const Matrix& theta)
{
    std::vector<Index> rows;
    for (Index j = 0; j < theta.rows(); ++j)
        if ((theta.row(j).array() != 0.0).any()) rows.push_back(j);
    return rows;
}

// S * theta using only the nonzero rows of theta.
Matrix cov_times_sparse(const SuffStats& stats, const Matrix& theta)
{
    const auto rows = nonzero_rows(theta);
    Matrix out = Matrix::Zero(stats.p(), theta.cols());
    if (rows.empty()) return out;
    if (stats.is_dense()) {
        const Matrix& cov = stats.dense_cov();
        for (Index j : rows) out.noalias() += cov.col(j) * theta.row(j);
        return out;
    }
    if (static_cast<Index>(rows.size()) * 4 > stats.p()) return stats.cov_times(theta);
    for (Index j : rows) out.noalias() += *stats.cov_column_shared(j) * theta.row(j);
    return out;
}

void check_dims(const SuffStats& stats, const Matrix& theta)
{
    if (theta.rows() != stats.p() || theta.cols() != stats.num_classes() - 1)
        throw InputError("coefficient matrix must be p x (K-1)");
}

} // namespace

CoefMatrix::CoefMatrix(Matrix theta) : theta_(std::move(theta))
{
    if (!theta_.allFinite()) throw InputError("coefficients must be finite");
    active_ = nonzero_rows(theta_);
}

CoefMatrix CoefMatrix::zeros(Index p, Index num_directions)
{
    return CoefMatrix(Matrix::Zero(p, num_directions));
}

SolverState::SolverState(const SuffStats& stats, const Matrix& theta) : theta_(theta)
{
    check_dims(stats, theta_);
    for (Index j = 0; j < theta_.rows(); ++j)
        if (stats.zero_variance(j)) theta_.row(j).setZero();
    resync(stats);
}

void SolverState::resync(const SuffStats& stats)
{
    cache_ = cov_times_sparse(stats, theta_);
}

Vector group_soft_threshold(const Vector& v, double t)
{
    const double norm = v.norm();
    if (norm == 0.0 || t >= norm) return Vector::Zero(v.size());
    return v * (1.0 - t / norm);
}

namespace {

// Exact minimizer of row j given the rest; `col` is column j of the covariance
// restricted to the rows held in `cache`. Returns the max-abs change of the row.
template <class Col>
double update_row(Matrix& theta, Matrix& cache, Index j, Index cache_row, const Eigen::RowVectorXd& delta_j,
                  double sjj, double lambda, const Col& col, Eigen::RowVectorXd& g)
{
    const Index d = theta.cols();
    double sq = 0.0;
    for (Index k = 0; k < d; ++k) {
        g[k] = delta_j[k] - (cache(cache_row, k) - sjj * theta(j, k));
        sq += g[k] * g[k];
    }
    const double norm = std::sqrt(sq);
    const double factor = norm <= lambda ? 0.0 : (1.0 - lambda / norm) / sjj;
    double change = 0.0;
    for (Index k = 0; k < d; ++k) {
        g[k] = factor == 0.0 ? 0.0 : g[k] * factor;
        change = std::max(change, std::abs(g[k] - theta(j, k)));
    }
    if (change == 0.0) return 0.0;
    for (Index k = 0; k < d; ++k) {
        const double diff = g[k] - theta(j, k);
        if (diff == 0.0) continue;
        theta(j, k) = g[k];
        cache.col(k).noalias() += col * diff;
    }
    return change;
}

} // namespace

double block_update(SolverState& state, const SuffStats& stats, Index j, double lambda)
{
    if (stats.zero_variance(j)) return 0.0;
    if (state.scratch_.size() != state.theta_.cols()) state.scratch_.resize(state.theta_.cols());
    const Eigen::RowVectorXd delta_j = stats.delta().row(j);
    const double sjj = stats.cov_diag()[j];
    if (stats.is_dense())
        return update_row(state.theta_, state.cache_, j, j, delta_j, sjj, lambda, stats.dense_cov().col(j),
                          state.scratch_);
    return update_row(state.theta_, state.cache_, j, j, delta_j, sjj, lambda, *stats.cov_column_shared(j),
                      state.scratch_);
}

SolveResult solve(const SuffStats& stats, const SolverOptions& options,
                  const std::optional<CoefMatrix>& warm_start)
{
    if (!(options.tol > 0.0)) throw InputError("tol must be positive");
    if (options.max_sweeps < 1) throw InputError("max_sweeps must be at least 1");
    if (!(options.lambda >= 0.0) || !std::isfinite(options.lambda))
        throw InputError("lambda must be finite and non-negative");

    const Index p = stats.p();
    const Index d = stats.num_classes() - 1;
    SolverState state(stats, warm_start ? warm_start->theta() : Matrix::Zero(p, d));
    state.scratch_.resize(d);
    const double lambda = options.lambda;
    SolveDiagnostics diag;

    auto after_sweep = [&](double change) {
        ++state.sweeps_;
        state.last_max_change_ = change;
        if (options.track_objective) diag.objective_trace.push_back(objective(stats, state.theta_, lambda));
    };
    auto full_sweep = [&]() {
        double change = 0.0;
        for (Index j = 0; j < p; ++j) change = std::max(change, block_update(state, stats, j, lambda));
        after_sweep(change);
        return change;
    };

    // Sweeps over the active rows only, on the covariance restricted to them.
    // Rows of the cache outside the active set go stale and are resynced afterwards.
    auto active_phase = [&](const std::vector<Index>& active) {
        const Index a = static_cast<Index>(active.size());
        if (a == 0) return;
        Matrix s_aa(a, a);
        for (Index c = 0; c < a; ++c) {
            if (stats.is_dense())
                s_aa.col(c) = stats.dense_cov().col(active[static_cast<std::size_t>(c)])(active);
            else
                s_aa.col(c) = (*stats.cov_column_shared(active[static_cast<std::size_t>(c)]))(active);
        }
        Matrix theta_a = state.theta_(active, Eigen::all);
        Matrix cache_a = state.cache_(active, Eigen::all);
        const Matrix delta_a = stats.delta()(active, Eigen::all);
        const Vector diag_a = stats.cov_diag()(active);
        auto write_back = [&]() { state.theta_(active, Eigen::all) = theta_a; };
        while (state.sweeps_ < options.max_sweeps) {
            double change = 0.0;
            for (Index i = 0; i < a; ++i) {
                const Eigen::RowVectorXd delta_i = delta_a.row(i);
                change = std::max(change, update_row(theta_a, cache_a, i, i, delta_i, diag_a[i], lambda,
                                                     s_aa.col(i), state.scratch_));
            }
            if (options.track_objective) write_back();
            after_sweep(change);
            if (change < options.tol) break;
        }
        write_back();
    };

    if (options.track_objective) diag.objective_trace.push_back(objective(stats, state.theta_, lambda));

    for (;;) {
        const auto before = nonzero_rows(state.theta_);
        const double change = full_sweep();
        if (change < options.tol && nonzero_rows(state.theta_) == before) {
            diag.converged = true;
            break;
        }
        if (state.sweeps_ >= options.max_sweeps) break;
        if (!options.active_set) continue;

        active_phase(nonzero_rows(state.theta_));
        if (state.sweeps_ >= options.max_sweeps) break;
        state.resync(stats);
    }

    diag.sweeps = state.sweeps_;
    diag.max_change = state.last_max_change_;
    diag.kkt = kkt_residual(stats, state.theta_, lambda);
    return SolveResult{CoefMatrix(state.theta_), std::move(diag)};
}

double objective(const SuffStats& stats, const Matrix& theta, double lambda)
{
    check_dims(stats, theta);
    const Matrix s_theta = cov_times_sparse(stats, theta);
    double value = 0.5 * theta.cwiseProduct(s_theta).sum() - stats.delta().cwiseProduct(theta).sum();
    value += lambda * theta.rowwise().norm().sum();
    return value;
}

double lambda_max(const SuffStats& stats)
{
    double best = 0.0;
    for (Index j = 0; j < stats.p(); ++j)
        if (!stats.zero_variance(j)) best = std::max(best, stats.delta().row(j).norm());
    return best;
}

double kkt_residual(const SuffStats& stats, const Matrix& theta, double lambda)
{
    check_dims(stats, theta);
    const Matrix grad = cov_times_sparse(stats, theta) - stats.delta();
    double residual = 0.0;
    for (Index j = 0; j < stats.p(); ++j) {
        if (stats.zero_variance(j)) continue;
        const double norm = theta.row(j).norm();
        if (norm > 0.0) {
            const Eigen::RowVectorXd r = grad.row(j) + lambda * theta.row(j) / norm;
            residual = std::max(residual, r.cwiseAbs().maxCoeff());
        } else {
            residual = std::max(residual, grad.row(j).norm() - lambda);
        }
    }
    return residual;
}

std::vector<double> lambda_grid(double lmax, int n_lambda, double min_ratio)
{
    if (n_lambda < 1) throw InputError("n_lambda must be at least 1");
    if (!(min_ratio > 0.0 && min_ratio < 1.0)) throw InputError("lambda_min_ratio must lie in (0, 1)");
    if (!(lmax > 0.0)) return {0.0};
    std::vector<double> grid(static_cast<std::size_t>(n_lambda));
    grid[0] = lmax;
    for (int i = 1; i < n_lambda; ++i)
        grid[static_cast<std::size_t>(i)] = lmax * std::pow(min_ratio, static_cast<double>(i) / (n_lambda - 1));
    return grid;
}

SolutionPath solve_path(const SuffStats& stats, int n_lambda, double lambda_min_ratio,
                        const SolverOptions& options)
{
    if (n_lambda < 2) throw InputError("n_lambda must be at least 2");
    return solve_path(stats, lambda_grid(lambda_max(stats), n_lambda, lambda_min_ratio), options);
}

SolutionPath solve_path(const SuffStats& stats, const std::vector<double>& lambdas,
                        const SolverOptions& options)
{
    if (lambdas.empty()) throw InputError("empty lambda sequence");
    for (std::size_t i = 1; i < lambdas.size(); ++i)
        if (!(lambdas[i] < lambdas[i - 1])) throw InputError("lambdas must be strictly descending");

    SolutionPath path;
    std::optional<CoefMatrix> warm;
    for (double lambda : lambdas) {
        SolverOptions opts = options;
        opts.lambda = lambda;
        SolveResult res = solve(stats, opts, warm);
        path.lambdas.push_back(lambda);
        path.kkt_residuals.push_back(res.diagnostics.kkt);
        path.sweeps.push_back(res.diagnostics.sweeps);
        path.converged.push_back(res.diagnostics.converged);
        warm = res.coef;
        path.solutions.push_back(std::move(res.coef));
    }
    return path;
}

double path_lambda_max(const SuffStats& stats, bool standardize)
{
    if (!standardize) return lambda_max(stats);
    // Same arithmetic as rescaled() so the first path point is exactly zero.
    const Vector inv = stats.standardizing_scale().cwiseInverse();
    double best = 0.0;
    for (Index j = 0; j < stats.p(); ++j)
        if (!stats.zero_variance(j)) best = std::max(best, (stats.delta().row(j) * inv[j]).norm());
    return best;
}

SolutionPath fit_path(const SuffStats& stats, const PathOptions& options,
                      const std::optional<std::vector<double>>& lambdas)
{
    const std::vector<double> grid =
        lambdas ? *lambdas
                : lambda_grid(path_lambda_max(stats, options.standardize), options.n_lambda,
                              options.lambda_min_ratio);
    if (!options.standardize) return solve_path(stats, grid, options.solver);

    const Vector scale = stats.standardizing_scale();
    SolutionPath path = solve_path(stats.rescaled(scale), grid, options.solver);
    const Vector inv = scale.cwiseInverse();
    for (auto& coef : path.solutions) coef = CoefMatrix(inv.asDiagonal() * coef.theta());
    return path;
}

} // namespace msda
