#include <doctest.h>

#include <random>
#include <set>

#include "helpers.hpp"
#include "msda/modelsel.hpp"

using namespace msda;

namespace {

CVOptions quick(int folds, std::uint64_t seed)
{
    CVOptions o;
    o.n_folds = folds;
    o.seed = seed;
    o.path.n_lambda = 15;
    return o;
}

} // namespace

TEST_SUITE("modelsel")
{
    TEST_CASE("stratified folds partition rows and balance classes")
    {
        std::vector<int> labels;
        for (int i = 0; i < 53; ++i) labels.push_back(i % 3 == 0 ? 0 : (i % 3 == 1 ? 1 : 2));
        const auto folds = stratified_folds(labels, 3, 5, 17);
        REQUIRE(folds.size() == labels.size());
        std::vector<std::vector<int>> per(5, std::vector<int>(3, 0));
        for (std::size_t i = 0; i < folds.size(); ++i) {
            REQUIRE(folds[i] >= 0);
            REQUIRE(folds[i] < 5);
            ++per[static_cast<std::size_t>(folds[i])][static_cast<std::size_t>(labels[i])];
        }
        std::vector<int> sizes(5, 0);
        for (int f = 0; f < 5; ++f) {
            for (int k = 0; k < 3; ++k) {
                const int count = per[static_cast<std::size_t>(f)][static_cast<std::size_t>(k)];
                CHECK(count >= 3);
                CHECK(count <= 4);
                sizes[static_cast<std::size_t>(f)] += count;
            }
        }
        CHECK(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1);
        CHECK(stratified_folds(labels, 3, 5, 17) == folds);
        CHECK(stratified_folds(labels, 3, 5, 18) != folds);
        CHECK_THROWS_AS(stratified_folds(labels, 3, 1, 0), InputError);
    }

    TEST_CASE("argmin ties go to the earliest entry")
    {
        CHECK(argmin_first({0.3, 0.1, 0.1, 0.2}) == 1);
        CHECK(argmin_first({0.1, 0.1}) == 0);
        CHECK(argmin_first({0.5, 0.4, 0.4 + 1e-15}) == 1);
    }

    TEST_CASE("cross validation is deterministic and well formed")
    {
        const LabeledDataset d = testutil::gaussian_data(90, 12, 3, 5, 1.5);
        const CVResult a = cross_validate(d, quick(5, 9));
        const CVResult b = cross_validate(d, quick(5, 9));
        CHECK(a.lambdas == b.lambdas);
        CHECK(a.mean_cv_error == b.mean_cv_error);
        CHECK(a.se_cv_error == b.se_cv_error);
        CHECK(a.fold_assignments == b.fold_assignments);
        CHECK(a.best_lambda == b.best_lambda);
        CHECK(a.seed == 9);
        for (std::size_t l = 0; l < a.lambdas.size(); ++l) {
            CHECK(a.mean_cv_error[l] >= 0.0);
            CHECK(a.mean_cv_error[l] <= 1.0);
            CHECK(a.se_cv_error[l] >= 0.0);
        }
        const double best = *std::min_element(a.mean_cv_error.begin(), a.mean_cv_error.end());
        CHECK(a.mean_cv_error[a.best_index] == best);
        for (std::size_t l = 0; l < a.best_index; ++l) CHECK(a.mean_cv_error[l] > best);
        CHECK(a.best_lambda == a.lambdas[a.best_index]);
    }

    TEST_CASE("results do not depend on the worker count")
    {
        const LabeledDataset d = testutil::gaussian_data(60, 10, 3, 15);
        CVOptions one = quick(4, 2), many = quick(4, 2);
        many.jobs = 4;
        const CVResult a = cross_validate(d, one), b = cross_validate(d, many);
        CHECK(a.mean_cv_error == b.mean_cv_error);
        CHECK(a.best_index == b.best_index);
    }

    TEST_CASE("separable data reach near-zero error")
    {
        Matrix x = testutil::gaussian_data(60, 8, 2, 4).features();
        std::vector<int> y;
        for (Index i = 0; i < 60; ++i) {
            y.push_back(static_cast<int>(i % 2));
            x(i, 0) = (i % 2 == 0 ? -5.0 : 5.0) + 0.1 * x(i, 0);
        }
        const CVResult r = cross_validate(LabeledDataset(x, y, 2), quick(5, 1));
        CHECK(r.mean_cv_error[r.best_index] <= 0.02);
    }

    TEST_CASE("pure noise labels give chance-level error")
    {
        std::mt19937_64 rng(101);
        std::normal_distribution<double> z;
        const int K = 3;
        Matrix x(150, 10);
        for (Index i = 0; i < 150; ++i)
            for (Index j = 0; j < 10; ++j) x(i, j) = z(rng);
        std::vector<int> y;
        for (Index i = 0; i < 150; ++i) y.push_back(static_cast<int>(i % K));
        CVOptions o = quick(5, 3);
        o.priors = PriorMode::Uniform;
        const CVResult r = cross_validate(LabeledDataset(x, y, K), o);
        double mean = 0.0;
        for (double e : r.mean_cv_error) mean += e;
        mean /= static_cast<double>(r.mean_cv_error.size());
        CHECK(mean == doctest::Approx(1.0 - 1.0 / K).epsilon(0.15));
    }

    TEST_CASE("classes smaller than the fold count are rejected")
    {
        Matrix x = Matrix::Random(12, 3);
        const LabeledDataset d(x, {0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1}, 2);
        CHECK_THROWS_AS(cross_validate(d, quick(5, 1)), InputError);
        CHECK_NOTHROW(cross_validate(d, quick(3, 1)));
    }

    TEST_CASE("selection metrics")
    {
        std::vector<Index> truth{0, 1, 2, 3, 4, 5, 6, 7};
        SelectionMetrics m = selection_metrics(truth, truth);
        CHECK(m.correct == 8);
        CHECK(m.incorrect == 0);
        m = selection_metrics({}, truth);
        CHECK(m.correct == 0);
        CHECK(m.incorrect == 0);
        m = selection_metrics({0, 1, 8}, {0, 1, 2});
        CHECK(m.correct == 2);
        CHECK(m.incorrect == 1);
    }
}
