#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "msda/classify.hpp"
#include "msda/common.hpp"
#include "msda/dataset.hpp"
#include "msda/modelsel.hpp"
#include "msda/solver.hpp"

namespace msda {

enum class CovKind { Identity, AR, CS, BlockCS };

/// Structured covariance with unit diagonal.
struct Covariance {
    CovKind kind = CovKind::Identity;
    double rho = 0.0;
    Index block_size = 0;  ///< BlockCS only

    double entry(Index i, Index j) const;
    Matrix dense(Index p) const;
    /// Draws rows of N(0, Sigma) into `out` (m x p).
    void sample(std::mt19937_64& rng, Matrix& out) const;
    void validate(Index p) const;
};

struct ModelSpec {
    int id = 0;  ///< 1..6 for the built-in models, 0 for custom
    int num_classes = 0;
    Index p = 0;
    Matrix beta;  ///< p x K
    Covariance cov;
    Matrix mu;    ///< p x K, Sigma * beta
    std::vector<Index> true_support;
    /// Coefficients contain the uniform perturbations of models 3 and 4.
    bool random_coefficients = false;
};

/// Built-in models 1..6 (0-based support indices). `coef_seed` drives the
/// uniform perturbations of models 3 and 4.
ModelSpec make_model(int id, std::uint64_t coef_seed = 0);

/// Completes a spec from K, p, beta and cov: computes mu and the true support.
ModelSpec make_custom_model(Matrix beta, Covariance cov);

/// Reads a custom model from JSON (see README for the schema).
ModelSpec load_model_spec(const std::string& path);

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream);

LabeledDataset sample_dataset(const ModelSpec& spec, const std::vector<Index>& counts,
                              std::mt19937_64& rng);
LabeledDataset sample_dataset(const ModelSpec& spec, Index n_per_class, std::uint64_t seed);
/// `total` rows with classes assigned round-robin.
LabeledDataset sample_balanced(const ModelSpec& spec, Index total, std::mt19937_64& rng);

/// Bayes rule with the true parameters and uniform priors.
class BayesOracle {
public:
    explicit BayesOracle(const ModelSpec& spec);
    std::vector<int> predict(const Matrix& x) const;
    /// Same rule expressed as projected LDA on the true directions.
    FittedClassifier as_classifier() const;
    const Matrix& theta() const { return theta_; }

private:
    Matrix theta_;  ///< p x K with a zero first column
    Vector offset_; ///< -(mu_k + mu_0)' theta_k / 2 + log pi_k
    Matrix mu_;
    std::vector<Index> support_;
    Covariance cov_;
};

BayesOracle bayes_classifier(const ModelSpec& spec);

enum class Tuning { Validation, CV };

struct ReplicateOptions {
    Tuning tuning = Tuning::Validation;
    /// Keep the model's coefficients instead of redrawing them per replicate.
    bool fixed_coefficients = false;
    Index train_per_class = 75;
    Index test_size = 1000;
    /// Seed of the test draw; defaults to the replicate seed.
    std::optional<std::uint64_t> test_seed;
    int cv_folds = 5;
    PathOptions path;
};

struct ReplicateResult {
    double test_error = 0.0;
    double bayes_error = 0.0;
    SelectionMetrics selection;
    double chosen_lambda = 0.0;
    Index support_size = 0;
    std::uint64_t seed = 0;
};

ReplicateResult run_replicate(const ModelSpec& spec, std::uint64_t seed,
                              const ReplicateOptions& options = {});

struct MetricSummary {
    std::string name;
    double median = 0.0;
    double se = 0.0;
};

struct StudySummary {
    int model_id = 0;
    int num_classes = 0;
    Index p = 0;
    Index true_support_size = 0;
    int n_replicates = 0;
    std::uint64_t base_seed = 0;
    std::vector<MetricSummary> metrics;  ///< error, bayes_error, C, IC, lambda
    std::vector<ReplicateResult> replicates;
    double wall_seconds = 0.0;

    const MetricSummary& metric(const std::string& name) const;
};

/// Median of the values (mean of the middle two for even counts).
double median(std::vector<double> values);
/// Bootstrap standard error of the median.
double bootstrap_median_se(const std::vector<double>& values, int resamples, std::uint64_t seed);

StudySummary run_study(const ModelSpec& spec, int n_replicates, std::uint64_t base_seed,
                       const ReplicateOptions& options = {}, int jobs = 1);

/// One row per metric: metric,median,se. Wall time is not included.
void write_summary_csv(const StudySummary& summary, std::ostream& out);
void write_summary_table(const StudySummary& summary, std::ostream& out);

} // namespace msda
