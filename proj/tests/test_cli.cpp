#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "helpers.hpp"
#include "msda/artifact.hpp"
#include "msda/cli.hpp"

using namespace msda;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args)
{
    args.insert(args.begin(), "msda");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::size_t count_lines(const std::string& s)
{
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

} // namespace

TEST_SUITE("cli")
{
    TEST_CASE("input errors exit with code 2")
    {
        testutil::TempDir dir;
        CHECK(run({"fit", "-i", dir.file("missing.csv"), "-o", dir.file("m.json")}).code == 2);
        CHECK(run({"simulate", "--model", "1", "--replicates", "0"}).code == 2);
        CHECK(run({"simulate", "--model", "7", "--replicates", "1"}).code == 2);
        CHECK(run({"fit"}).code == 2);
        CHECK(run({}).code == 2);
        CHECK(run({"bogus"}).code == 2);
        CHECK(run({"predict", "-m", dir.write("bad.json", "{"), "-i", dir.write("x.csv", "a\n1\n")}).code == 2);

        write_csv(testutil::gaussian_data(30, 4, 3, 1), dir.file("three.csv"));
        const Run r = run({"equiv", "-i", dir.file("three.csv")});
        CHECK(r.code == 2);
        CHECK(r.err.find("error:") != std::string::npos);
    }

    TEST_CASE("fit and predict round-trip through the model file")
    {
        testutil::TempDir dir;
        const LabeledDataset d = testutil::gaussian_data(90, 20, 3, 4, 2.0);
        write_csv(d, dir.file("train.csv"));
        const Run fit = run({"fit", "-i", dir.file("train.csv"), "-o", dir.file("m.json"), "--screen", "10",
                             "--n-lambda", "20", "--path-out", dir.file("path.csv")});
        REQUIRE(fit.code == 0);
        CHECK(fit.out.rfind("lambda,", 0) == 0);
        CHECK(count_lines(testutil::read_file(dir.file("path.csv"))) == 21);

        const ModelArtifact art = load_model(dir.file("m.json"));
        CHECK(art.input_features == 20);
        REQUIRE(art.screening_map.has_value());
        CHECK(art.screening_map->size() == 10);

        const Run pred = run({"predict", "-m", dir.file("m.json"), "-i", dir.file("train.csv"), "--label-column", "0"});
        REQUIRE(pred.code == 0);
        CHECK(count_lines(pred.out) == 91);
        CHECK(pred.out.rfind("label\n", 0) == 0);
        CHECK(pred.err.rfind("error_rate,", 0) == 0);
        CHECK(std::stod(pred.err.substr(11)) < 0.3);

        std::vector<std::string> lines;
        std::istringstream in(pred.out);
        for (std::string line; std::getline(in, line);) lines.push_back(line);
        const auto direct = art.predict(d.features());
        for (std::size_t i = 0; i < direct.size(); ++i)
            CHECK(lines[i + 1] == d.class_names()[static_cast<std::size_t>(direct[i])]);

        const Run mismatch =
            run({"predict", "-m", dir.file("m.json"), "-i", dir.write("narrow.csv", "a,b\n1,2\n3,4\n")});
        CHECK(mismatch.code == 2);

        const Run fisher = run({"fisher", "-m", dir.file("m.json"), "-i", dir.file("train.csv")});
        REQUIRE(fisher.code == 0);
        CHECK(fisher.out.rfind("feature,eta1", 0) == 0);
    }

    TEST_CASE("fitting above the zero point warns about an empty support")
    {
        testutil::TempDir dir;
        write_csv(testutil::gaussian_data(40, 5, 2, 2), dir.file("d.csv"));
        const Run r = run({"fit", "-i", dir.file("d.csv"), "-o", dir.file("m.json"), "--lambda", "1e6"});
        CHECK(r.code == 0);
        CHECK(r.err.find("empty support") != std::string::npos);
        CHECK(r.out.find("active,0") != std::string::npos);
        const Run pred = run({"predict", "-m", dir.file("m.json"), "-i", dir.file("d.csv"), "--label-column", "label"});
        CHECK(pred.code == 0);
    }

    TEST_CASE("non-convergence exits with code 3")
    {
        testutil::TempDir dir;
        write_csv(testutil::gaussian_data(40, 30, 2, 2), dir.file("d.csv"));
        const Run r = run({"path", "-i", dir.file("d.csv"), "--max-sweeps", "1", "--tol", "1e-14", "--n-lambda", "10"});
        CHECK(r.code == 3);
    }

    TEST_CASE("cv, path and screen produce well-formed tables")
    {
        testutil::TempDir dir;
        write_csv(testutil::gaussian_data(60, 8, 3, 6), dir.file("d.csv"));
        const Run cv = run({"cv", "-i", dir.file("d.csv"), "--n-lambda", "12"});
        REQUIRE(cv.code == 0);
        CHECK(cv.out.rfind("lambda,cv_error,cv_se,best\n", 0) == 0);
        CHECK(count_lines(cv.out) == 13);
        const Run path = run({"path", "-i", dir.file("d.csv"), "--n-lambda", "12"});
        REQUIRE(path.code == 0);
        CHECK(path.out.rfind("lambda,active,kkt_residual,sweeps,converged\n", 0) == 0);
        const Run screen = run({"screen", "-i", dir.file("d.csv"), "--d-n", "3"});
        REQUIRE(screen.code == 0);
        CHECK(screen.out.rfind("rank,feature,index,f_stat\n", 0) == 0);
        CHECK(count_lines(screen.out) == 4);
    }

    TEST_CASE("equivalence command on a generated instance")
    {
        const Run r = run({"equiv", "--grid", "5"});
        REQUIRE(r.code == 0);
        CHECK(count_lines(r.out) == 6);
        const Run single = run({"equiv", "--grid", "1"});
        REQUIRE(single.code == 0);
        REQUIRE(count_lines(single.out) == 2);
        const std::string row = single.out.substr(single.out.find('\n') + 1);
        CHECK(row.find(",1,") != std::string::npos);
    }

    TEST_CASE("seeds come from the flag, then the environment")
    {
        testutil::TempDir dir;
        write_csv(testutil::gaussian_data(60, 6, 3, 8), dir.file("d.csv"));
        const Run a = run({"cv", "-i", dir.file("d.csv"), "--n-lambda", "8", "--seed", "5"});
        const Run b = run({"--seed", "5", "cv", "-i", dir.file("d.csv"), "--n-lambda", "8"});
        CHECK(a.out == b.out);
        ::setenv("MSDA_SEED", "5", 1);
        const Run c = run({"cv", "-i", dir.file("d.csv"), "--n-lambda", "8"});
        ::setenv("MSDA_SEED", "junk", 1);
        const Run bad = run({"cv", "-i", dir.file("d.csv"), "--n-lambda", "8"});
        ::unsetenv("MSDA_SEED");
        CHECK(c.out == a.out);
        CHECK(bad.code == 2);
    }

    TEST_CASE("simulation output is identical across worker counts")
    {
        testutil::TempDir dir;
        const auto spec = dir.write("m.json", R"({"K": 3, "p": 30,
            "beta": [{"feature": 1, "class": 2, "value": 2.0}, {"feature": 2, "class": 3, "value": 2.0}],
            "covariance": {"type": "ar", "rho": 0.5}})");
        const std::vector<std::string> common{"simulate", "--spec", spec, "--replicates", "3", "--train-per-class",
                                              "20", "--test-size", "200", "--n-lambda", "15", "--table", "none"};
        auto one = common, four = common;
        one.insert(one.end(), {"--jobs", "1"});
        four.insert(four.end(), {"--jobs", "4"});
        const Run a = run(one), b = run(four);
        REQUIRE(a.code == 0);
        CHECK(a.out == b.out);
        CHECK(a.out.rfind("model,K,p,replicates,metric,median,se\n", 0) == 0);
    }
}
