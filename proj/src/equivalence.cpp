#include "msda/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "msda/solver.hpp"

namespace msda {

namespace {

struct CenteredDesign {
    Matrix gram;   // Xc' Xc
    Vector cross;  // Xc' yc
    Vector x_mean;
    double y_mean = 0.0;
};

CenteredDesign center_binary(const LabeledDataset& data)
{
    if (data.num_classes() != 2) throw InputError("binary data (K = 2) required");
    CenteredDesign d;
    const Matrix& x = data.features();
    Vector y(data.n());
    for (Index i = 0; i < data.n(); ++i) y[i] = data.labels()[static_cast<std::size_t>(i)] + 1.0;
    d.x_mean = x.colwise().mean().transpose();
    d.y_mean = y.mean();
    const Matrix xc = x.rowwise() - d.x_mean.transpose();
    d.gram = xc.transpose() * xc;
    d.cross = xc.transpose() * (y.array() - d.y_mean).matrix();
    return d;
}

double soft(double v, double t)
{
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

// Optimality violation of min theta' G theta - 2 c' theta + lambda ||theta||_1.
double lasso_kkt(const CenteredDesign& d, const Vector& theta, double lambda)
{
    const Vector grad = 2.0 * (d.gram * theta - d.cross);
    double r = 0.0;
    for (Index j = 0; j < theta.size(); ++j) {
        if (d.gram(j, j) <= 0.0) continue;
        if (theta[j] != 0.0)
            r = std::max(r, std::abs(grad[j] + lambda * (theta[j] > 0 ? 1.0 : -1.0)));
        else
            r = std::max(r, std::abs(grad[j]) - lambda);
    }
    return r;
}

double cosine(const Vector& a, const Vector& b)
{
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

DsdaFit solve_centered(const CenteredDesign& d, double lambda, double kkt_tol, int max_sweeps)
{
    if (!(lambda >= 0.0)) throw InputError("lambda must be non-negative");
    const Index p = d.gram.rows();
    DsdaFit fit;
    fit.theta = Vector::Zero(p);
    Vector g_theta = Vector::Zero(p);
    for (;;) {
        double change = 0.0;
        for (Index j = 0; j < p; ++j) {
            const double gjj = d.gram(j, j);
            if (gjj <= 0.0) continue;
            const double old = fit.theta[j];
            const double r = d.cross[j] - g_theta[j] + gjj * old;
            const double updated = soft(r, 0.5 * lambda) / gjj;
            if (updated != old) {
                g_theta += d.gram.col(j) * (updated - old);
                fit.theta[j] = updated;
                change = std::max(change, std::abs(updated - old));
            }
        }
        ++fit.sweeps;
        if (change < 1e-10 || fit.sweeps >= max_sweeps) {
            g_theta = d.gram * fit.theta;
            fit.kkt = lasso_kkt(d, fit.theta, lambda);
            if (fit.kkt <= kkt_tol || fit.sweeps >= max_sweeps) break;
        }
    }
    fit.intercept = d.y_mean - d.x_mean.dot(fit.theta);
    return fit;
}

} // namespace

DsdaFit solve_dsda(const LabeledDataset& data, double lambda, double kkt_tol, int max_sweeps)
{
    return solve_centered(center_binary(data), lambda, kkt_tol, max_sweeps);
}

double dsda_lambda_max(const LabeledDataset& data)
{
    return 2.0 * center_binary(data).cross.cwiseAbs().maxCoeff();
}

double road_kkt_residual(const SuffStats& stats, const Vector& phi, double penalty)
{
    if (stats.num_classes() != 2) throw InputError("binary statistics required");
    const Vector delta = stats.delta().col(0);
    const Vector s_phi = stats.cov_times(phi).col(0);
    const double constraint = phi.dot(delta);
    // Multiplier implied by phi' (stationarity) together with phi' delta = 1.
    const double nu = (2.0 * phi.dot(s_phi) + penalty * phi.lpNorm<1>()) / constraint;
    const Vector r = 2.0 * s_phi - nu * delta;
    double residual = std::abs(constraint - 1.0);
    for (Index j = 0; j < phi.size(); ++j) {
        if (stats.zero_variance(j)) continue;
        if (phi[j] != 0.0)
            residual = std::max(residual, std::abs(r[j] + penalty * (phi[j] > 0 ? 1.0 : -1.0)));
        else
            residual = std::max(residual, std::abs(r[j]) - penalty);
    }
    return residual;
}

std::vector<EquivalenceReport> check_binary_equivalence(const LabeledDataset& data,
                                                  const std::vector<double>& lambdas, double solver_tol)
{
    if (data.num_classes() != 2) throw InputError("binary data (K = 2) required");
    const SuffStats stats = SuffStats::compute(data);
    const CenteredDesign design = center_binary(data);
    const Vector delta = stats.delta().col(0);
    const double n = static_cast<double>(data.n());
    const double between = 2.0 * n * stats.priors()[0] * stats.priors()[1];

    std::vector<EquivalenceReport> reports;
    for (double lambda : lambdas) {
        EquivalenceReport rep;
        rep.lambda = lambda;
        SolverOptions opts;
        opts.lambda = lambda;
        opts.tol = solver_tol;
        opts.max_sweeps = 100000;
        const SolveResult msda = solve(stats, opts);
        const Vector theta = msda.coef.theta().col(0);
        rep.msda_kkt = msda.diagnostics.kkt;
        rep.c0 = theta.dot(delta);
        if (rep.c0 == 0.0) {
            rep.skipped = true;
            reports.push_back(rep);
            continue;
        }

        // Literal mapping: DSDA at a * lambda with a = n |c1(lambda)| / |c0(lambda)|.
        const DsdaFit at_lambda = solve_centered(design, lambda, 1e-8, 100000);
        rep.c1 = at_lambda.theta.dot(delta);
        rep.a = n * std::abs(rep.c1) / std::abs(rep.c0);
        rep.cosine_literal = rep.c1 == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                                           : cosine(theta, solve_centered(design, rep.a * lambda, 1e-8, 100000).theta);

        const Vector phi = theta / rep.c0;
        rep.road_penalty = 2.0 * lambda / std::abs(rep.c0);
        rep.road_kkt_residual = road_kkt_residual(stats, phi, rep.road_penalty);
        rep.road_kkt_residual_literal = road_kkt_residual(stats, phi, lambda / std::abs(rep.c0));

        const double nu = 2.0 * phi.dot(stats.cov_times(phi).col(0)) + rep.road_penalty * phi.lpNorm<1>();
        const double scale = between / ((n - 2.0) * nu + between);
        rep.dsda_lambda = (n - 2.0) * scale * rep.road_penalty;
        const DsdaFit mapped = solve_centered(design, rep.dsda_lambda, 1e-8, 100000);
        rep.dsda_kkt = mapped.kkt;
        rep.cosine_msda_dsda = cosine(theta, mapped.theta);
        reports.push_back(rep);
    }
    return reports;
}

} // namespace msda
