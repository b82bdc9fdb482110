#include "msda/simbench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include <json.hpp>

namespace msda {

namespace {

constexpr Index kModelDimension = 800;

std::string fmt(const char* spec, double value)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, value);
    return buf;
}

// Sigma * b for a structured covariance, without forming Sigma.
Matrix structured_multiply(const Covariance& cov, const Matrix& b)
{
    const Index p = b.rows();
    Matrix out(p, b.cols());
    switch (cov.kind) {
    case CovKind::Identity:
        out = b;
        break;
    case CovKind::AR:
        for (Index c = 0; c < b.cols(); ++c) {
            Vector fwd(p), bwd(p);
            for (Index i = 0; i < p; ++i) fwd[i] = b(i, c) + (i > 0 ? cov.rho * fwd[i - 1] : 0.0);
            for (Index i = p - 1; i >= 0; --i) bwd[i] = b(i, c) + (i + 1 < p ? cov.rho * bwd[i + 1] : 0.0);
            out.col(c) = fwd + bwd - b.col(c);
        }
        break;
    case CovKind::CS:
        out = (1.0 - cov.rho) * b;
        out.rowwise() += cov.rho * b.colwise().sum();
        break;
    case CovKind::BlockCS:
        for (Index start = 0; start < p; start += cov.block_size) {
            const Index len = std::min(cov.block_size, p - start);
            const auto blk = b.middleRows(start, len);
            out.middleRows(start, len) = (1.0 - cov.rho) * blk;
            out.middleRows(start, len).rowwise() += cov.rho * blk.colwise().sum();
        }
        break;
    }
    return out;
}

std::vector<Index> support_of(const Matrix& beta)
{
    std::vector<Index> support;
    for (Index j = 0; j < beta.rows(); ++j) {
        for (Index k = 1; k < beta.cols(); ++k) {
            if (beta(j, k) != beta(j, 0)) {
                support.push_back(j);
                break;
            }
        }
    }
    return support;
}

} // namespace

double Covariance::entry(Index i, Index j) const
{
    if (i == j) return 1.0;
    switch (kind) {
    case CovKind::Identity: return 0.0;
    case CovKind::AR: return std::pow(rho, static_cast<double>(std::abs(i - j)));
    case CovKind::CS: return rho;
    case CovKind::BlockCS: return i / block_size == j / block_size ? rho : 0.0;
    }
    return 0.0;
}

Matrix Covariance::dense(Index p) const
{
    Matrix s(p, p);
    for (Index j = 0; j < p; ++j)
        for (Index i = 0; i < p; ++i) s(i, j) = entry(i, j);
    return s;
}

void Covariance::validate(Index p) const
{
    switch (kind) {
    case CovKind::Identity: break;
    case CovKind::AR:
        if (!(std::abs(rho) < 1.0)) throw InputError("AR correlation must satisfy |rho| < 1");
        break;
    case CovKind::CS:
    case CovKind::BlockCS:
        if (!(rho >= 0.0 && rho < 1.0)) throw InputError("CS correlation must lie in [0, 1)");
        if (kind == CovKind::BlockCS && (block_size < 1 || p % block_size != 0))
            throw InputError("block size must divide p");
        break;
    }
}

void Covariance::sample(std::mt19937_64& rng, Matrix& out) const
{
    std::normal_distribution<double> normal(0.0, 1.0);
    const Index p = out.cols();
    for (Index i = 0; i < out.rows(); ++i) {
        switch (kind) {
        case CovKind::Identity:
            for (Index j = 0; j < p; ++j) out(i, j) = normal(rng);
            break;
        case CovKind::AR: {
            const double innov = std::sqrt(1.0 - rho * rho);
            double prev = normal(rng);
            out(i, 0) = prev;
            for (Index j = 1; j < p; ++j) {
                prev = rho * prev + innov * normal(rng);
                out(i, j) = prev;
            }
            break;
        }
        case CovKind::CS:
        case CovKind::BlockCS: {
            const Index blk = kind == CovKind::CS ? p : block_size;
            const double shared = std::sqrt(rho), own = std::sqrt(1.0 - rho);
            for (Index start = 0; start < p; start += blk) {
                const double z = normal(rng);
                for (Index j = start; j < std::min(start + blk, p); ++j) out(i, j) = shared * z + own * normal(rng);
            }
            break;
        }
        }
    }
}

ModelSpec make_custom_model(Matrix beta, Covariance cov)
{
    ModelSpec spec;
    spec.p = beta.rows();
    spec.num_classes = static_cast<int>(beta.cols());
    if (spec.num_classes < 2) throw InputError("a model needs at least 2 classes");
    if (spec.p < 1) throw InputError("a model needs at least one feature");
    cov.validate(spec.p);
    spec.cov = cov;
    spec.mu = structured_multiply(cov, beta);
    spec.true_support = support_of(beta);
    spec.beta = std::move(beta);
    return spec;
}

ModelSpec make_model(int id, std::uint64_t coef_seed)
{
    const Index p = kModelDimension;
    Matrix beta;
    Covariance cov;
    bool random = false;
    switch (id) {
    case 1:
    case 2: {
        const int K = id == 1 ? 4 : 6;
        const double value = id == 1 ? 1.6 : 2.5;
        beta = Matrix::Zero(p, K);
        for (int k = 0; k < K; ++k) beta(2 * k, k) = beta(2 * k + 1, k) = value;
        cov = id == 1 ? Covariance{CovKind::AR, 0.5, 0} : Covariance{CovKind::BlockCS, 0.5, 160};
        break;
    }
    case 3:
    case 4: {
        const int K = 4;
        auto rng = make_rng(coef_seed, 0xC0EFu);
        std::uniform_real_distribution<double> u(-0.25, 0.25);
        beta = Matrix::Zero(p, K);
        for (int k = 0; k < K; ++k)
            for (Index j = 0; j < 4; ++j) beta(j, k) = (k + 1) + u(rng);
        cov = Covariance{CovKind::CS, id == 3 ? 0.5 : 0.8, 0};
        random = true;
        break;
    }
    case 5:
    case 6: {
        beta = Matrix::Zero(p, 4);
        for (Index j = 0; j < 8; ++j) beta(j, 1) = 1.2;
        for (Index j = 0; j < 8; ++j) beta(j, 2) = j < 4 ? -1.2 : 1.2;
        for (Index j = 0; j < 8; ++j) beta(j, 3) = j % 2 == 0 ? -1.2 : 1.2;
        cov = Covariance{CovKind::AR, id == 5 ? 0.5 : 0.8, 0};
        break;
    }
    default:
        throw InputError("model id must be in 1..6");
    }
    ModelSpec spec = make_custom_model(std::move(beta), cov);
    spec.id = id;
    spec.random_coefficients = random;
    return spec;
}

ModelSpec load_model_spec(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot open model spec: " + path);
    nlohmann::json j;
    try {
        in >> j;
        const int K = j.at("K").get<int>();
        const Index p = j.at("p").get<Index>();
        if (K < 2 || p < 1) throw InputError("model spec needs K >= 2 and p >= 1");
        Matrix beta = Matrix::Zero(p, K);
        for (const auto& e : j.at("beta")) {
            const Index f = e.at("feature").get<Index>();
            const int c = e.at("class").get<int>();
            if (f < 1 || f > p || c < 1 || c > K) throw InputError("beta entry out of range");
            beta(f - 1, c - 1) = e.at("value").get<double>();
        }
        const auto& cj = j.at("covariance");
        const std::string type = cj.at("type").get<std::string>();
        Covariance cov;
        if (type == "identity") cov.kind = CovKind::Identity;
        else if (type == "ar") cov.kind = CovKind::AR;
        else if (type == "cs") cov.kind = CovKind::CS;
        else if (type == "block_cs") cov.kind = CovKind::BlockCS;
        else throw InputError("unknown covariance type: " + type);
        cov.rho = cj.value("rho", 0.0);
        cov.block_size = cj.value("block_size", Index{0});
        return make_custom_model(std::move(beta), cov);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed model spec: ") + e.what());
    }
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

LabeledDataset sample_dataset(const ModelSpec& spec, const std::vector<Index>& counts, std::mt19937_64& rng)
{
    if (static_cast<int>(counts.size()) != spec.num_classes) throw InputError("one count per class required");
    Index total = 0;
    for (Index c : counts) {
        if (c < 1) throw InputError("every class needs at least one row");
        total += c;
    }
    Matrix x(total, spec.p);
    spec.cov.sample(rng, x);
    std::vector<int> y(static_cast<std::size_t>(total));
    Index row = 0;
    for (int k = 0; k < spec.num_classes; ++k) {
        for (Index i = 0; i < counts[k]; ++i, ++row) {
            x.row(row) += spec.mu.col(k).transpose();
            y[static_cast<std::size_t>(row)] = k;
        }
    }
    return LabeledDataset(std::move(x), std::move(y), spec.num_classes);
}

LabeledDataset sample_dataset(const ModelSpec& spec, Index n_per_class, std::uint64_t seed)
{
    if (n_per_class < 1) throw InputError("n_per_class must be at least 1");
    auto rng = make_rng(seed, 0);
    return sample_dataset(spec, std::vector<Index>(static_cast<std::size_t>(spec.num_classes), n_per_class), rng);
}

LabeledDataset sample_balanced(const ModelSpec& spec, Index total, std::mt19937_64& rng)
{
    Matrix x(total, spec.p);
    spec.cov.sample(rng, x);
    std::vector<int> y(static_cast<std::size_t>(total));
    for (Index i = 0; i < total; ++i) {
        const int k = static_cast<int>(i % spec.num_classes);
        x.row(i) += spec.mu.col(k).transpose();
        y[static_cast<std::size_t>(i)] = k;
    }
    return LabeledDataset(std::move(x), std::move(y), spec.num_classes);
}

BayesOracle::BayesOracle(const ModelSpec& spec) : mu_(spec.mu), support_(spec.true_support), cov_(spec.cov)
{
    const int K = spec.num_classes;
    theta_ = spec.beta.colwise() - spec.beta.col(0);
    offset_.resize(K);
    // Score of class k relative to class 0: theta_k' (x - (mu_k + mu_0) / 2) + log pi_k.
    for (int k = 0; k < K; ++k)
        offset_[k] = -0.5 * (spec.mu.col(k) + spec.mu.col(0)).dot(theta_.col(k)) - std::log(static_cast<double>(K));
}

std::vector<int> BayesOracle::predict(const Matrix& x) const
{
    if (x.cols() != theta_.rows()) throw InputError("dimension mismatch");
    Matrix s = x(Eigen::all, support_) * theta_(support_, Eigen::all);
    s.rowwise() += offset_.transpose();
    std::vector<int> labels(static_cast<std::size_t>(x.rows()));
    for (Index i = 0; i < s.rows(); ++i) {
        Index best = 0;
        for (Index k = 1; k < s.cols(); ++k)
            if (s(i, k) > s(i, best)) best = k;
        labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    return labels;
}

FittedClassifier BayesOracle::as_classifier() const
{
    const int K = static_cast<int>(theta_.cols());
    const Matrix dirs = theta_.rightCols(K - 1);
    const Matrix sigma_dirs = structured_multiply(cov_, dirs);
    return make_projected_classifier(dirs, dirs.transpose() * mu_, dirs.transpose() * sigma_dirs,
                                     Vector::Constant(K, -std::log(static_cast<double>(K))));
}

BayesOracle bayes_classifier(const ModelSpec& spec) { return BayesOracle(spec); }

ReplicateResult run_replicate(const ModelSpec& spec, std::uint64_t seed, const ReplicateOptions& options)
{
    ModelSpec model = spec;
    if (spec.random_coefficients && !options.fixed_coefficients && spec.id != 0)
        model = make_model(spec.id, make_rng(seed, 1)());

    const std::vector<Index> counts(static_cast<std::size_t>(model.num_classes), options.train_per_class);
    auto train_rng = make_rng(seed, 2);
    auto valid_rng = make_rng(seed, 3);
    auto test_rng = make_rng(options.test_seed.value_or(seed), 4);
    const LabeledDataset train = sample_dataset(model, counts, train_rng);
    const LabeledDataset test = sample_balanced(model, options.test_size, test_rng);

    std::size_t chosen = 0;
    SolutionPath path;
    if (options.tuning == Tuning::Validation) {
        const LabeledDataset valid = sample_dataset(model, counts, valid_rng);
        path = fit_path(SuffStats::compute(train), options.path);
        std::vector<double> errors;
        for (const auto& coef : path.solutions)
            errors.push_back(error_rate(fit_projected_lda(train, coef).predict(valid.features()), valid.labels()));
        chosen = argmin_first(errors);
    } else {
        CVOptions cv;
        cv.n_folds = options.cv_folds;
        cv.seed = make_rng(seed, 5)();
        cv.path = options.path;
        const CVResult res = cross_validate(train, cv);
        path = fit_path(SuffStats::compute(train), options.path, res.lambdas);
        chosen = res.best_index;
    }

    const CoefMatrix& coef = path.solutions[chosen];
    ReplicateResult r;
    r.seed = seed;
    r.chosen_lambda = path.lambdas[chosen];
    r.test_error = error_rate(fit_projected_lda(train, coef).predict(test.features()), test.labels());
    r.bayes_error = error_rate(bayes_classifier(model).predict(test.features()), test.labels());
    r.selection = selection_metrics(coef.active_blocks(), model.true_support);
    r.support_size = static_cast<Index>(coef.active_blocks().size());
    return r;
}

double median(std::vector<double> values)
{
    if (values.empty()) throw InputError("median of an empty sample");
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size() / 2;
    return values.size() % 2 == 1 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

double bootstrap_median_se(const std::vector<double>& values, int resamples, std::uint64_t seed)
{
    if (values.size() < 2) return 0.0;
    auto rng = make_rng(seed, 0xB007u);
    std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
    std::vector<double> medians;
    std::vector<double> sample(values.size());
    for (int b = 0; b < resamples; ++b) {
        for (auto& v : sample) v = values[pick(rng)];
        medians.push_back(median(sample));
    }
    double mean = 0.0;
    for (double m : medians) mean += m;
    mean /= static_cast<double>(medians.size());
    double ss = 0.0;
    for (double m : medians) ss += (m - mean) * (m - mean);
    return std::sqrt(ss / static_cast<double>(medians.size() - 1));
}

const MetricSummary& StudySummary::metric(const std::string& name) const
{
    for (const auto& m : metrics)
        if (m.name == name) return m;
    throw std::out_of_range("no metric named " + name);
}

StudySummary run_study(const ModelSpec& spec, int n_replicates, std::uint64_t base_seed,
                       const ReplicateOptions& options, int jobs)
{
    if (n_replicates < 1) throw InputError("need at least one replicate");
    const auto start = std::chrono::steady_clock::now();

    StudySummary summary;
    summary.model_id = spec.id;
    summary.num_classes = spec.num_classes;
    summary.p = spec.p;
    summary.true_support_size = static_cast<Index>(spec.true_support.size());
    summary.n_replicates = n_replicates;
    summary.base_seed = base_seed;
    summary.replicates.resize(static_cast<std::size_t>(n_replicates));
    parallel_for(static_cast<std::size_t>(n_replicates), jobs, [&](std::size_t i) {
        summary.replicates[i] = run_replicate(spec, base_seed + i, options);
    });

    const std::vector<std::pair<std::string, double (*)(const ReplicateResult&)>> columns = {
        {"error", [](const ReplicateResult& r) { return r.test_error; }},
        {"bayes_error", [](const ReplicateResult& r) { return r.bayes_error; }},
        {"C", [](const ReplicateResult& r) { return static_cast<double>(r.selection.correct); }},
        {"IC", [](const ReplicateResult& r) { return static_cast<double>(r.selection.incorrect); }},
        {"lambda", [](const ReplicateResult& r) { return r.chosen_lambda; }},
    };
    std::uint64_t stream = 0;
    for (const auto& [name, get] : columns) {
        std::vector<double> values;
        for (const auto& r : summary.replicates) values.push_back(get(r));
        summary.metrics.push_back({name, median(values), bootstrap_median_se(values, 200, base_seed + 7919 * ++stream)});
    }
    summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return summary;
}

void write_summary_csv(const StudySummary& summary, std::ostream& out)
{
    out << "model,K,p,replicates,metric,median,se\n";
    for (const auto& m : summary.metrics) {
        out << summary.model_id << ',' << summary.num_classes << ',' << summary.p << ','
            << summary.n_replicates << ',' << m.name << ',' << fmt("%.10g", m.median) << ','
            << fmt("%.10g", m.se) << '\n';
    }
}

void write_summary_table(const StudySummary& summary, std::ostream& out)
{
    const auto& err = summary.metric("error");
    const auto& bayes = summary.metric("bayes_error");
    const auto& c = summary.metric("C");
    const auto& ic = summary.metric("IC");
    const std::string title = summary.model_id > 0 ? "Model " + std::to_string(summary.model_id) : "Custom model";
    out << title << " (K=" << summary.num_classes << ", p=" << summary.p << ", " << summary.n_replicates
        << " replicates)\n";
    out << "            Bayes      Ours\n";
    out << "Error(%)    " << fmt("%-10.1f", 100.0 * bayes.median) << ' ' << fmt("%.1f", 100.0 * err.median) << '\n';
    out << "            " << fmt("(%.2f)", 100.0 * bayes.se) << "     " << fmt("(%.2f)", 100.0 * err.se) << '\n';
    out << "C           " << fmt("%-10g", static_cast<double>(summary.true_support_size)) << ' ' << fmt("%g", c.median) << '\n';
    out << "                       " << fmt("(%.1f)", c.se) << '\n';
    out << "IC          " << fmt("%-10g", 0.0) << ' ' << fmt("%g", ic.median) << '\n';
    out << "                       " << fmt("(%.1f)", ic.se) << '\n';
    out << "wall time: " << fmt("%.1f", summary.wall_seconds) << " s\n";
}

} // namespace msda
