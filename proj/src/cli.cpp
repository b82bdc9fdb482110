#include "msda/cli.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "msda/artifact.hpp"
#include "msda/classify.hpp"
#include "msda/dataset.hpp"
#include "msda/equivalence.hpp"
#include "msda/fisher.hpp"
#include "msda/modelsel.hpp"
#include "msda/screening.hpp"
#include "msda/simbench.hpp"
#include "msda/solver.hpp"
#include "msda/suffstats.hpp"

namespace msda {

namespace {

class NonConvergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shortest round-trip text, independent of the global locale.
std::string num(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

struct DataArgs {
    std::string input;
    std::string label_column = "0";
    bool no_header = false;
    std::string baseline;
};

struct FitArgs {
    int n_lambda = 100;
    double ratio = 0.05;
    int folds = 5;
    double tol = 1e-6;
    int max_sweeps = 1000;
    bool standardize = true;
    std::string priors = "empirical";
};

void add_data_options(CLI::App* cmd, DataArgs& a, bool required = true)
{
    auto* opt = cmd->add_option("-i,--input", a.input, "Labeled CSV file");
    if (required) opt->required();
    cmd->add_option("--label-column", a.label_column, "Label column name or 0-based index")
        ->capture_default_str();
    cmd->add_flag("--no-header", a.no_header, "The CSV has no header row");
    cmd->add_option("--baseline", a.baseline, "Label of the baseline class (default: first seen)");
}

void add_fit_options(CLI::App* cmd, FitArgs& a)
{
    cmd->add_option("--n-lambda", a.n_lambda, "Number of lambda values")->capture_default_str()->check(CLI::Range(1, 100000));
    cmd->add_option("--lambda-min-ratio", a.ratio, "Smallest lambda as a fraction of lambda_max")
        ->capture_default_str()
        ->check(CLI::Range(1e-12, 1.0 - 1e-12));
    cmd->add_option("--folds", a.folds, "Cross-validation folds")->capture_default_str()->check(CLI::Range(2, 1000));
    cmd->add_option("--tol", a.tol, "Coordinate descent tolerance")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--max-sweeps", a.max_sweeps, "Sweep limit per lambda")->capture_default_str()->check(CLI::Range(1, 100000000));
    cmd->add_flag("--standardize,!--no-standardize", a.standardize,
                  "Solve on features scaled by their pooled within-class standard deviation")
        ->capture_default_str();
    cmd->add_option("--priors", a.priors, "Class priors: empirical or uniform")
        ->capture_default_str()
        ->check(CLI::IsMember({"empirical", "uniform"}));
}

PathOptions path_options(const FitArgs& a)
{
    PathOptions p;
    p.n_lambda = a.n_lambda;
    p.lambda_min_ratio = a.ratio;
    p.standardize = a.standardize;
    p.solver.tol = a.tol;
    p.solver.max_sweeps = a.max_sweeps;
    return p;
}

PriorMode prior_mode(const FitArgs& a)
{
    return a.priors == "uniform" ? PriorMode::Uniform : PriorMode::Empirical;
}

LabeledDataset load_data(const DataArgs& a)
{
    CsvOptions opts;
    opts.has_header = !a.no_header;
    int index = 0;
    const auto* first = a.label_column.data();
    const auto* last = first + a.label_column.size();
    const auto res = std::from_chars(first, last, index);
    if (res.ec == std::errc{} && res.ptr == last)
        opts.label_column = index;
    else
        opts.label_column = a.label_column;
    LabeledDataset data = load_csv(a.input, opts);
    if (a.baseline.empty()) return data;
    const auto& names = data.class_names();
    const auto it = std::find(names.begin(), names.end(), a.baseline);
    if (it == names.end()) throw InputError("baseline class not found: " + a.baseline);
    return data.with_baseline(static_cast<int>(it - names.begin()));
}

// Relabels `data` so its classes follow the order of `names`.
LabeledDataset align_classes(const LabeledDataset& data, const std::vector<std::string>& names)
{
    if (static_cast<int>(names.size()) != data.num_classes())
        throw InputError("class count differs from the model's");
    std::vector<int> map(names.size());
    for (std::size_t k = 0; k < names.size(); ++k) {
        const auto& have = data.class_names();
        const auto it = std::find(have.begin(), have.end(), names[k]);
        if (it == have.end()) throw InputError("class missing from the data: " + names[k]);
        map[static_cast<std::size_t>(it - have.begin())] = static_cast<int>(k);
    }
    std::vector<int> labels;
    labels.reserve(data.labels().size());
    for (int y : data.labels()) labels.push_back(map[static_cast<std::size_t>(y)]);
    return LabeledDataset(data.features(), std::move(labels), data.num_classes(), data.feature_names(), names);
}

// Writes to `path`, or to `fallback` when the path is empty or "-".
template <class Body>
void emit(const std::string& path, std::ostream& fallback, Body&& body)
{
    if (path.empty() || path == "-") {
        body(fallback);
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write file: " + path);
    body(static_cast<std::ostream&>(f));
    if (!f) throw InputError("write failed: " + path);
}

std::string timestamp()
{
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_path_csv(std::ostream& out, const SolutionPath& path, const CVResult* cv)
{
    out << "lambda,active,kkt_residual,sweeps,converged";
    if (cv) out << ",cv_error,cv_se";
    out << '\n';
    for (std::size_t l = 0; l < path.lambdas.size(); ++l) {
        out << num(path.lambdas[l]) << ',' << path.solutions[l].active_blocks().size() << ','
            << num(path.kkt_residuals[l]) << ',' << path.sweeps[l] << ',' << (path.converged[l] ? 1 : 0);
        if (cv) out << ',' << num(cv->mean_cv_error[l]) << ',' << num(cv->se_cv_error[l]);
        out << '\n';
    }
}

struct Context {
    std::ostream& out;
    std::ostream& err;
    std::uint64_t seed = 42;
    int jobs = 1;
};

int cmd_fit(const Context& ctx, const DataArgs& d, const FitArgs& f, const std::string& output,
            const std::string& path_out, std::optional<Index> screen, std::optional<double> fixed_lambda)
{
    const LabeledDataset raw = load_data(d);
    LabeledDataset data = raw;
    std::optional<std::vector<Index>> map;
    if (screen) {
        const ScreeningReport rep = f_screen(raw, *screen);
        std::vector<Index> kept = rep.kept;
        std::sort(kept.begin(), kept.end());
        data = raw.subset_columns(kept);
        map = kept;
    }

    const PathOptions popts = path_options(f);
    const SuffStats stats = SuffStats::compute(data);
    SolutionPath path;
    std::optional<CVResult> cv;
    std::size_t chosen = 0;
    if (fixed_lambda) {
        if (!(*fixed_lambda >= 0.0)) throw InputError("lambda must be non-negative");
        path = fit_path(stats, popts, std::vector<double>{*fixed_lambda});
    } else {
        CVOptions copts;
        copts.n_folds = f.folds;
        copts.seed = ctx.seed;
        copts.jobs = ctx.jobs;
        copts.path = popts;
        copts.priors = prior_mode(f);
        cv = cross_validate(data, copts);
        path = fit_path(stats, popts, cv->lambdas);
        chosen = cv->best_index;
    }

    if (!path_out.empty())
        emit(path_out, ctx.out, [&](std::ostream& o) { write_path_csv(o, path, cv ? &*cv : nullptr); });
    if (!path.converged[chosen])
        throw NonConvergence("solver did not converge at the selected lambda " + num(path.lambdas[chosen]));

    ModelArtifact art;
    art.coef = path.solutions[chosen];
    art.classifier = fit_projected_lda(data, art.coef, prior_mode(f));
    art.lambda = path.lambdas[chosen];
    art.screening_map = map;
    art.input_features = raw.p();
    art.class_names = data.class_names();
    art.feature_names = raw.feature_names();
    art.metadata.created = timestamp();
    art.metadata.seed = ctx.seed;
    art.metadata.standardized = f.standardize;
    save_model(art, output);

    if (art.classifier.degenerate)
        ctx.err << "warning: empty support; the classifier predicts from the priors only\n";
    ctx.out << "lambda," << num(art.lambda) << "\nactive," << art.coef.active_blocks().size() << '\n';
    return kExitOk;
}

int cmd_predict(const Context& ctx, const std::string& model_path, const std::string& input,
                bool no_header, const std::string& label_column, const std::string& output)
{
    const ModelArtifact art = load_model(model_path);
    Matrix x;
    std::vector<std::string> truth;
    if (label_column.empty()) {
        x = load_feature_csv(input, !no_header);
    } else {
        DataArgs d;
        d.input = input;
        d.no_header = no_header;
        d.label_column = label_column;
        const LabeledDataset data = load_data(d);
        x = data.features();
        for (int y : data.labels()) truth.push_back(data.class_names()[static_cast<std::size_t>(y)]);
    }
    const std::vector<int> pred = art.predict(x);
    emit(output, ctx.out, [&](std::ostream& o) {
        o << "label\n";
        for (int k : pred)
            o << (art.class_names.empty() ? std::to_string(k) : art.class_names[static_cast<std::size_t>(k)]) << '\n';
    });
    if (!truth.empty()) {
        std::size_t wrong = 0;
        for (std::size_t i = 0; i < pred.size(); ++i)
            if (art.class_names.empty() || art.class_names[static_cast<std::size_t>(pred[i])] != truth[i]) ++wrong;
        ctx.err << "error_rate," << num(static_cast<double>(wrong) / static_cast<double>(pred.size())) << '\n';
    }
    return kExitOk;
}

int cmd_cv(const Context& ctx, const DataArgs& d, const FitArgs& f, const std::string& output)
{
    const LabeledDataset data = load_data(d);
    CVOptions copts;
    copts.n_folds = f.folds;
    copts.seed = ctx.seed;
    copts.jobs = ctx.jobs;
    copts.path = path_options(f);
    copts.priors = prior_mode(f);
    const CVResult cv = cross_validate(data, copts);
    emit(output, ctx.out, [&](std::ostream& o) {
        o << "lambda,cv_error,cv_se,best\n";
        for (std::size_t l = 0; l < cv.lambdas.size(); ++l)
            o << num(cv.lambdas[l]) << ',' << num(cv.mean_cv_error[l]) << ',' << num(cv.se_cv_error[l]) << ','
              << (l == cv.best_index ? 1 : 0) << '\n';
    });
    if (!output.empty() && output != "-") ctx.out << "best_lambda," << num(cv.best_lambda) << '\n';
    return kExitOk;
}

int cmd_path(const Context& ctx, const DataArgs& d, const FitArgs& f, const std::string& output)
{
    const LabeledDataset data = load_data(d);
    const SolutionPath path = fit_path(SuffStats::compute(data), path_options(f));
    emit(output, ctx.out, [&](std::ostream& o) { write_path_csv(o, path, nullptr); });
    for (bool c : path.converged)
        if (!c) throw NonConvergence("solver did not converge on part of the path");
    return kExitOk;
}

int cmd_screen(const Context& ctx, const DataArgs& d, Index d_n, const std::string& output)
{
    const LabeledDataset data = load_data(d);
    const ScreeningReport rep = f_screen(data, d_n);
    emit(output, ctx.out, [&](std::ostream& o) {
        o << "rank,feature,index,f_stat\n";
        for (std::size_t r = 0; r < rep.kept.size(); ++r) {
            const Index j = rep.kept[r];
            const std::string name = data.feature_names().empty() ? "x" + std::to_string(j + 1)
                                                                  : data.feature_names()[static_cast<std::size_t>(j)];
            o << r + 1 << ',' << name << ',' << j + 1 << ',' << num(rep.f_stats[static_cast<std::size_t>(j)]) << '\n';
        }
    });
    return kExitOk;
}

struct SimArgs {
    int model = 0;
    std::string spec;
    int replicates = 0;
    std::string tuning = "validation";
    bool fixed = false;
    Index train_per_class = 75;
    Index test_size = 1000;
    std::string output;
    std::string table;
};

int cmd_simulate(const Context& ctx, const SimArgs& s, const FitArgs& f)
{
    if (s.replicates < 1) throw InputError("replicates must be at least 1");
    if (s.train_per_class < 2) throw InputError("train-per-class must be at least 2");
    if (s.test_size < 1) throw InputError("test-size must be at least 1");
    ModelSpec spec;
    if (!s.spec.empty()) {
        if (s.model != 0) throw InputError("give either --model or --spec, not both");
        spec = load_model_spec(s.spec);
    } else {
        if (s.model < 1 || s.model > 6) throw InputError("model id must be in 1..6");
        spec = make_model(s.model, make_rng(ctx.seed, 1)());
    }
    ReplicateOptions ropts;
    ropts.tuning = s.tuning == "cv" ? Tuning::CV : Tuning::Validation;
    ropts.fixed_coefficients = s.fixed;
    ropts.train_per_class = s.train_per_class;
    ropts.test_size = s.test_size;
    ropts.cv_folds = f.folds;
    ropts.path = path_options(f);
    const StudySummary summary = run_study(spec, s.replicates, ctx.seed, ropts, ctx.jobs);
    emit(s.output, ctx.out, [&](std::ostream& o) { write_summary_csv(summary, o); });
    if (s.table != "none") {
        if (s.output.empty() || s.output == "-") {
            if (!s.table.empty()) emit(s.table, ctx.out, [&](std::ostream& o) { write_summary_table(summary, o); });
        } else {
            emit(s.table, ctx.out, [&](std::ostream& o) { write_summary_table(summary, o); });
        }
    }
    return kExitOk;
}

struct EquivArgs {
    Index n = 100;
    Index p = 50;
    int grid = 20;
    double ratio = 0.05;
    std::string output;
};

LabeledDataset generated_binary(Index n, Index p, std::uint64_t seed)
{
    if (n < 4 || p < 1) throw InputError("generated instance needs n >= 4 and p >= 1");
    Matrix beta = Matrix::Zero(p, 2);
    for (Index j = 0; j < std::min<Index>(p, 5); ++j) beta(j, 1) = 0.8;
    Covariance cov;
    cov.kind = CovKind::AR;
    cov.rho = 0.5;
    const ModelSpec spec = make_custom_model(beta, cov);
    std::mt19937_64 rng = make_rng(seed, 6);
    return sample_dataset(spec, std::vector<Index>{n / 2, n - n / 2}, rng);
}

int cmd_equiv(const Context& ctx, const DataArgs& d, const EquivArgs& e)
{
    const LabeledDataset data = d.input.empty() ? generated_binary(e.n, e.p, ctx.seed) : load_data(d);
    if (data.num_classes() != 2) throw InputError("equivalence check needs binary data (K = 2)");
    const SuffStats stats = SuffStats::compute(data);
    const std::vector<double> grid = lambda_grid(lambda_max(stats), e.grid, e.ratio);
    const auto reports = check_binary_equivalence(data, grid);
    emit(e.output, ctx.out, [&](std::ostream& o) {
        o << "lambda,skipped,c0,c1,a,cosine_literal,road_penalty,road_kkt_residual,road_kkt_residual_literal,"
             "dsda_lambda,cosine_msda_dsda,msda_kkt,dsda_kkt\n";
        for (const auto& r : reports) {
            o << num(r.lambda) << ',' << (r.skipped ? 1 : 0) << ',' << num(r.c0);
            if (r.skipped) {
                o << ",,,,,,,,," << num(r.msda_kkt) << ",\n";
                continue;
            }
            o << ',' << num(r.c1) << ',' << num(r.a) << ',' << num(r.cosine_literal) << ',' << num(r.road_penalty)
              << ',' << num(r.road_kkt_residual) << ',' << num(r.road_kkt_residual_literal) << ','
              << num(r.dsda_lambda) << ',' << num(r.cosine_msda_dsda) << ',' << num(r.msda_kkt) << ','
              << num(r.dsda_kkt) << '\n';
        }
    });
    return kExitOk;
}

int cmd_fisher(const Context& ctx, const std::string& model_path, const DataArgs& d, const std::string& output)
{
    const ModelArtifact art = load_model(model_path);
    LabeledDataset data = load_data(d);
    if (data.p() != art.input_features) throw InputError("data has a different feature count than the model");
    if (art.screening_map) data = data.subset_columns(*art.screening_map);
    if (!art.class_names.empty()) data = align_classes(data, art.class_names);
    const FisherDirections fd = recover_fisher(art.coef, SuffStats::compute(data));
    emit(output, ctx.out, [&](std::ostream& o) {
        o << "feature";
        for (std::size_t c = 0; c < fd.eigenvalues.size(); ++c) o << ",eta" << c + 1;
        o << '\n' << "eigenvalue";
        for (double v : fd.eigenvalues) o << ',' << num(v);
        o << '\n';
        for (Index r = 0; r < fd.eta.rows(); ++r) {
            const Index j = art.screening_map ? (*art.screening_map)[static_cast<std::size_t>(r)] : r;
            o << (art.feature_names.empty() ? "x" + std::to_string(j + 1)
                                            : art.feature_names[static_cast<std::size_t>(j)]);
            for (Index c = 0; c < fd.eta.cols(); ++c) o << ',' << num(fd.eta(r, c));
            o << '\n';
        }
    });
    return kExitOk;
}

std::optional<std::uint64_t> env_seed()
{
    const char* s = std::getenv("MSDA_SEED");
    if (!s || !*s) return std::nullopt;
    std::uint64_t v = 0;
    const char* end = s + std::char_traits<char>::length(s);
    const auto res = std::from_chars(s, end, v);
    if (res.ec != std::errc{} || res.ptr != end) throw InputError(std::string("invalid MSDA_SEED: ") + s);
    return v;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Multiclass sparse discriminant analysis"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", "msda 1.0.0");

    std::uint64_t seed = 42;
    int jobs = default_jobs();
    auto* seed_opt = app.add_option("--seed", seed, "Random seed (default 42, or MSDA_SEED)");
    app.add_option("--jobs", jobs, "Worker threads for folds and replicates")
        ->capture_default_str()
        ->check(CLI::Range(1, 4096));

    DataArgs data;
    FitArgs fit;
    std::string output, path_out, model_path;
    std::optional<Index> screen;
    std::optional<double> fixed_lambda;

    auto* fit_cmd = app.add_subcommand("fit", "Fit a model (cross-validated lambda unless --lambda is given)");
    add_data_options(fit_cmd, data);
    add_fit_options(fit_cmd, fit);
    fit_cmd->add_option("-o,--output", output, "Model file to write")->required();
    fit_cmd->add_option("--path-out", path_out, "Also write the solution path CSV here");
    fit_cmd->add_option("--screen", screen, "Keep the d_n features with the largest F statistics")->check(CLI::PositiveNumber);
    fit_cmd->add_option("--lambda", fixed_lambda, "Fixed lambda (on the standardized scale when standardizing)");

    std::string predict_input, predict_label;
    bool predict_no_header = false;
    auto* predict_cmd = app.add_subcommand("predict", "Predict class labels with a saved model");
    predict_cmd->add_option("-m,--model", model_path, "Model file")->required();
    predict_cmd->add_option("-i,--input", predict_input, "Feature CSV")->required();
    predict_cmd->add_flag("--no-header", predict_no_header, "The CSV has no header row");
    predict_cmd->add_option("--label-column", predict_label,
                            "Ignore this label column and report the error rate against it");
    predict_cmd->add_option("-o,--output", output, "Label CSV to write (default stdout)");

    auto* cv_cmd = app.add_subcommand("cv", "Cross-validation error along the lambda path");
    add_data_options(cv_cmd, data);
    add_fit_options(cv_cmd, fit);
    cv_cmd->add_option("-o,--output", output, "CSV to write (default stdout)");

    auto* path_cmd = app.add_subcommand("path", "Solution path summary");
    add_data_options(path_cmd, data);
    add_fit_options(path_cmd, fit);
    path_cmd->add_option("-o,--output", output, "CSV to write (default stdout)");

    Index d_n = 0;
    auto* screen_cmd = app.add_subcommand("screen", "Rank features by their F statistic");
    add_data_options(screen_cmd, data);
    screen_cmd->add_option("--d-n", d_n, "Number of features to keep")->required();
    screen_cmd->add_option("-o,--output", output, "CSV to write (default stdout)");

    SimArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Run the simulation study for one model");
    sim_cmd->add_option("--model", sim.model, "Built-in model id 1..6");
    sim_cmd->add_option("--spec", sim.spec, "Custom model JSON file");
    sim_cmd->add_option("--replicates", sim.replicates, "Number of replicates")->required();
    sim_cmd->add_option("--tuning", sim.tuning, "validation or cv")
        ->capture_default_str()
        ->check(CLI::IsMember({"validation", "cv"}));
    sim_cmd->add_flag("--fixed-coefficients", sim.fixed, "Do not redraw random coefficients per replicate");
    sim_cmd->add_option("--train-per-class", sim.train_per_class, "Training rows per class")->capture_default_str();
    sim_cmd->add_option("--test-size", sim.test_size, "Test rows per replicate")->capture_default_str();
    sim_cmd->add_option("-o,--output", sim.output, "Summary CSV (default stdout)");
    sim_cmd->add_option("--table", sim.table, "Text table file ('-' for stdout, 'none' to skip)");
    add_fit_options(sim_cmd, fit);

    EquivArgs eq;
    auto* equiv_cmd = app.add_subcommand("equiv", "Binary equivalence check against DSDA and ROAD");
    add_data_options(equiv_cmd, data, false);
    equiv_cmd->add_option("--n", eq.n, "Rows of the generated instance")->capture_default_str();
    equiv_cmd->add_option("--p", eq.p, "Features of the generated instance")->capture_default_str();
    equiv_cmd->add_option("--grid", eq.grid, "Number of lambda values")->capture_default_str()->check(CLI::Range(1, 100000));
    equiv_cmd->add_option("--lambda-min-ratio", eq.ratio, "Smallest lambda as a fraction of lambda_max")
        ->capture_default_str();
    equiv_cmd->add_option("-o,--output", eq.output, "CSV to write (default stdout)");

    auto* fisher_cmd = app.add_subcommand("fisher", "Recover Fisher directions from a saved model");
    fisher_cmd->add_option("-m,--model", model_path, "Model file")->required();
    add_data_options(fisher_cmd, data);
    fisher_cmd->add_option("-o,--output", output, "CSV to write (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        Context ctx{out, err};
        ctx.jobs = jobs;
        if (seed_opt->count() > 0)
            ctx.seed = seed;
        else if (auto s = env_seed())
            ctx.seed = *s;

        if (*fit_cmd) return cmd_fit(ctx, data, fit, output, path_out, screen, fixed_lambda);
        if (*predict_cmd) return cmd_predict(ctx, model_path, predict_input, predict_no_header, predict_label, output);
        if (*cv_cmd) return cmd_cv(ctx, data, fit, output);
        if (*path_cmd) return cmd_path(ctx, data, fit, output);
        if (*screen_cmd) return cmd_screen(ctx, data, d_n, output);
        if (*sim_cmd) return cmd_simulate(ctx, sim, fit);
        if (*equiv_cmd) return cmd_equiv(ctx, data, eq);
        if (*fisher_cmd) return cmd_fisher(ctx, model_path, data, output);
    } catch (const NonConvergence& e) {
        err << "error: " << e.what() << '\n';
        return kExitNonConvergence;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return kExitInput;
}

} // namespace msda
