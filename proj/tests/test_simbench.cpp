#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "msda/simbench.hpp"

using namespace msda;

TEST_SUITE("simbench")
{
    TEST_CASE("built-in models have the documented supports and structure")
    {
        const std::vector<std::size_t> sizes{8, 12, 4, 4, 8, 8};
        const std::vector<int> classes{4, 6, 4, 4, 4, 4};
        for (int id = 1; id <= 6; ++id) {
            const ModelSpec m = make_model(id, 5);
            CHECK(m.p == 800);
            CHECK(m.num_classes == classes[static_cast<std::size_t>(id - 1)]);
            CHECK(m.true_support.size() == sizes[static_cast<std::size_t>(id - 1)]);
            for (std::size_t j = 0; j < m.true_support.size(); ++j) CHECK(m.true_support[j] == static_cast<Index>(j));
            const Matrix direct = m.cov.dense(800) * m.beta;
            CHECK((direct - m.mu).cwiseAbs().maxCoeff() <= 1e-10);
        }
        CHECK(make_model(1).cov.entry(0, 2) == doctest::Approx(0.25));
        CHECK(make_model(2).cov.entry(0, 159) == 0.5);
        CHECK(make_model(2).cov.entry(159, 160) == 0.0);
        CHECK(make_model(4).cov.entry(3, 700) == 0.8);
        CHECK(make_model(6).cov.entry(10, 11) == 0.8);
        CHECK_THROWS_AS(make_model(0), InputError);
        CHECK_THROWS_AS(make_model(7), InputError);
    }

    TEST_CASE("model coefficients follow their definitions")
    {
        const ModelSpec m1 = make_model(1);
        CHECK(m1.beta(0, 0) == 1.6);
        CHECK(m1.beta(7, 3) == 1.6);
        CHECK(m1.beta(2, 0) == 0.0);
        const ModelSpec m3 = make_model(3, 11);
        for (int k = 0; k < 4; ++k)
            for (Index j = 0; j < 4; ++j) {
                CHECK(m3.beta(j, k) >= k + 1 - 0.25);
                CHECK(m3.beta(j, k) <= k + 1 + 0.25);
            }
        CHECK(m3.random_coefficients);
        CHECK(make_model(3, 11).beta == m3.beta);
        CHECK(make_model(3, 12).beta != m3.beta);
        const ModelSpec m5 = make_model(5);
        CHECK(m5.beta.col(0).isZero(0.0));
        CHECK(m5.beta(0, 2) == -1.2);
        CHECK(m5.beta(5, 2) == 1.2);
        CHECK(m5.beta(0, 3) == -1.2);
        CHECK(m5.beta(1, 3) == 1.2);
    }

    TEST_CASE("sampling is deterministic and reproduces the moments")
    {
        const ModelSpec m = make_model(1);
        const LabeledDataset a = sample_dataset(m, 5, 99), b = sample_dataset(m, 5, 99);
        CHECK(a.features() == b.features());
        CHECK(a.labels() == b.labels());

        for (CovKind kind : {CovKind::AR, CovKind::CS, CovKind::BlockCS, CovKind::Identity}) {
            Covariance cov{kind, 0.5, kind == CovKind::BlockCS ? Index{2} : Index{0}};
            const ModelSpec spec = make_custom_model(Matrix::Zero(4, 2), cov);
            auto rng = make_rng(4, 4);
            Matrix x(100000, 4);
            spec.cov.sample(rng, x);
            const Matrix c = (x.transpose() * x) / static_cast<double>(x.rows());
            CHECK((c - cov.dense(4)).cwiseAbs().maxCoeff() <= 0.02);
        }
        const ModelSpec cs3 = make_custom_model(Matrix::Zero(3, 2), Covariance{CovKind::CS, 0.5, 0});
        auto rng = make_rng(8, 8);
        Matrix x(100000, 3);
        cs3.cov.sample(rng, x);
        const Matrix c = (x.transpose() * x) / 100000.0;
        CHECK(std::abs(c(0, 1) - 0.5) <= 0.01);
        CHECK(std::abs(c(0, 2) - 0.5) <= 0.01);
        CHECK(std::abs(c(1, 2) - 0.5) <= 0.01);
    }

    TEST_CASE("class means converge to mu")
    {
        const ModelSpec m = make_custom_model((Matrix(5, 3) << 1, 0, 2, 0, 1, 0, 3, 0, 1, 0, 0, 0, 1, 1, 1).finished(),
                                              Covariance{CovKind::AR, 0.6, 0});
        const Index n = 10000;
        const LabeledDataset d = sample_dataset(m, n, 3);
        const SuffStats s = SuffStats::compute(d);
        CHECK((s.class_means() - m.mu).cwiseAbs().maxCoeff() <= 5.0 * std::sqrt(5.0) / std::sqrt(static_cast<double>(n)));
    }

    TEST_CASE("covariance validation")
    {
        CHECK_THROWS_AS(make_custom_model(Matrix::Zero(4, 2), Covariance{CovKind::CS, 1.0, 0}), InputError);
        CHECK_THROWS_AS(make_custom_model(Matrix::Zero(4, 2), Covariance{CovKind::CS, -0.1, 0}), InputError);
        CHECK_THROWS_AS(make_custom_model(Matrix::Zero(4, 2), Covariance{CovKind::AR, 1.0, 0}), InputError);
        CHECK_THROWS_AS(make_custom_model(Matrix::Zero(5, 2), Covariance{CovKind::BlockCS, 0.3, 2}), InputError);
    }

    TEST_CASE("Bayes oracle agrees with the projected LDA route")
    {
        for (int id : {1, 3, 5}) {
            const ModelSpec m = make_model(id, 2);
            auto rng = make_rng(1, 4);
            const LabeledDataset test = sample_balanced(m, 3000, rng);
            const BayesOracle oracle(m);
            const auto a = oracle.predict(test.features());
            const auto b = oracle.as_classifier().predict(test.features());
            std::size_t differ = 0;
            for (std::size_t i = 0; i < a.size(); ++i) differ += a[i] != b[i];
            CHECK(differ == 0);
        }
    }

    TEST_CASE("indistinguishable classes give chance error")
    {
        const ModelSpec m = make_custom_model(Matrix::Constant(6, 3, 0.7), Covariance{CovKind::AR, 0.3, 0});
        CHECK(m.true_support.empty());
        auto rng = make_rng(2, 2);
        const LabeledDataset test = sample_balanced(m, 900, rng);
        CHECK(error_rate(bayes_classifier(m).predict(test.features()), test.labels()) ==
              doctest::Approx(2.0 / 3.0));
    }

    TEST_CASE("Model 1 Bayes error is near its reference value")
    {
        const ModelSpec m = make_model(1);
        auto rng = make_rng(123, 4);
        const LabeledDataset test = sample_balanced(m, 20000, rng);
        CHECK(std::abs(error_rate(bayes_classifier(m).predict(test.features()), test.labels()) - 0.110) <= 0.01);
    }

    TEST_CASE("medians and bootstrap standard errors")
    {
        CHECK(median({3.0, 1.0, 2.0}) == 2.0);
        CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
        CHECK_THROWS_AS(median({}), InputError);
        CHECK(bootstrap_median_se({5.0}, 200, 1) == 0.0);
        CHECK(bootstrap_median_se({2.0, 2.0, 2.0}, 200, 1) == 0.0);
        const std::vector<double> v{1, 5, 2, 8, 3, 9, 4, 7, 6, 0};
        CHECK(bootstrap_median_se(v, 200, 3) == bootstrap_median_se(v, 200, 3));
        CHECK(bootstrap_median_se(v, 200, 3) > 0.0);
    }

    TEST_CASE("small custom study is reproducible and independent of the worker count")
    {
        Matrix beta = Matrix::Zero(30, 3);
        beta(0, 1) = beta(1, 2) = 2.0;
        const ModelSpec m = make_custom_model(beta, Covariance{CovKind::AR, 0.5, 0});
        ReplicateOptions o;
        o.train_per_class = 30;
        o.test_size = 300;
        o.path.n_lambda = 20;
        const StudySummary a = run_study(m, 4, 10, o, 1);
        const StudySummary b = run_study(m, 4, 10, o, 3);
        std::ostringstream sa, sb;
        write_summary_csv(a, sa);
        write_summary_csv(b, sb);
        CHECK(sa.str() == sb.str());
        CHECK(sa.str().rfind("model,K,p,replicates,metric,median,se\n", 0) == 0);
        for (const auto& r : a.replicates) {
            CHECK(r.test_error >= 0.0);
            CHECK(r.test_error <= 1.0);
            CHECK(r.selection.correct <= 2);
            CHECK(r.selection.correct + r.selection.incorrect == r.support_size);
        }
        CHECK_THROWS_AS(run_study(m, 0, 1, o), InputError);

        const StudySummary one = run_study(m, 1, 10, o);
        CHECK(one.metric("error").median == one.replicates[0].test_error);
        CHECK(one.metric("C").median == one.replicates[0].selection.correct);
        CHECK(one.metric("error").se == 0.0);

        std::ostringstream table;
        write_summary_table(a, table);
        CHECK(table.str().find("Error(%)") != std::string::npos);
    }

    TEST_CASE("replicates are deterministic and Bayes error depends only on the test draw")
    {
        Matrix beta = Matrix::Zero(20, 2);
        beta(0, 1) = 1.5;
        const ModelSpec m = make_custom_model(beta, Covariance{CovKind::CS, 0.3, 0});
        ReplicateOptions o;
        o.train_per_class = 25;
        o.test_size = 400;
        o.path.n_lambda = 15;
        o.test_seed = 77;
        const ReplicateResult a = run_replicate(m, 1, o), b = run_replicate(m, 1, o), c = run_replicate(m, 2, o);
        CHECK(a.test_error == b.test_error);
        CHECK(a.chosen_lambda == b.chosen_lambda);
        CHECK(a.bayes_error == c.bayes_error);

        o.tuning = Tuning::CV;
        const ReplicateResult cv = run_replicate(m, 1, o);
        CHECK(cv.test_error <= 1.0);
    }

    TEST_CASE("model spec files")
    {
        testutil::TempDir dir;
        const auto path = dir.write("m.json", R"({"K": 3, "p": 10,
            "beta": [{"feature": 1, "class": 2, "value": 1.5}, {"feature": 2, "class": 3, "value": -1.0}],
            "covariance": {"type": "block_cs", "rho": 0.4, "block_size": 5}})");
        const ModelSpec m = load_model_spec(path);
        CHECK(m.num_classes == 3);
        CHECK(m.p == 10);
        CHECK(m.true_support == std::vector<Index>{0, 1});
        CHECK(m.mu(4, 1) == doctest::Approx(0.6));
        CHECK(m.mu(5, 1) == 0.0);
        const auto bad = dir.write("b.json", R"({"K": 3, "p": 10, "beta": [{"feature": 11, "class": 1, "value": 1}],
            "covariance": {"type": "identity"}})");
        CHECK_THROWS_AS(load_model_spec(bad), InputError);
        CHECK_THROWS_AS(load_model_spec(dir.write("c.json", "{")), InputError);
        CHECK_THROWS_AS(load_model_spec(dir.file("none.json")), InputError);
    }
}
