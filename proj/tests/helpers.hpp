#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "msda/dataset.hpp"
#include "msda/suffstats.hpp"

namespace testutil {

using msda::Index;
using msda::Matrix;
using msda::Vector;

/// Unit-variance Gaussian features; class means are uniform in [-signal, signal] on the first `informative` columns.
inline msda::LabeledDataset gaussian_data(Index n, Index p, int K, std::uint64_t seed, double signal = 1.0,
                                          Index informative = 3)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix means = Matrix::Zero(p, K);
    for (int k = 0; k < K; ++k)
        for (Index j = 0; j < std::min(p, informative); ++j) means(j, k) = signal * u(rng);
    Matrix x(n, p);
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        const int k = static_cast<int>(i % K);
        labels[static_cast<std::size_t>(i)] = k;
        for (Index j = 0; j < p; ++j) x(i, j) = means(j, k) + z(rng);
    }
    return msda::LabeledDataset(std::move(x), std::move(labels), K);
}

/// Pooled within-class covariance by the defining double sum.
inline Matrix brute_force_cov(const msda::LabeledDataset& d)
{
    const int K = d.num_classes();
    const Index p = d.p();
    Matrix means = Matrix::Zero(p, K);
    std::vector<double> counts(static_cast<std::size_t>(K), 0.0);
    for (Index i = 0; i < d.n(); ++i) {
        const int k = d.labels()[static_cast<std::size_t>(i)];
        for (Index j = 0; j < p; ++j) means(j, k) += d.features()(i, j);
        counts[static_cast<std::size_t>(k)] += 1.0;
    }
    for (int k = 0; k < K; ++k) means.col(k) /= counts[static_cast<std::size_t>(k)];
    Matrix s = Matrix::Zero(p, p);
    for (Index i = 0; i < d.n(); ++i) {
        const int k = d.labels()[static_cast<std::size_t>(i)];
        for (Index a = 0; a < p; ++a)
            for (Index b = 0; b < p; ++b)
                s(a, b) += (d.features()(i, a) - means(a, k)) * (d.features()(i, b) - means(b, k));
    }
    return s / static_cast<double>(d.n() - K);
}

/**
 * Proximal gradient descent on sum_k {theta_k' S theta_k / 2 - delta_k' theta_k} + lambda sum_j ||theta_j.||
 * with step 1/L. Shares no code with the coordinate descent solver.
 */
inline Matrix proximal_gradient_oracle(const Matrix& s, const Matrix& delta, double lambda, int max_iter = 2000000)
{
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
    const double L = std::max(eig.eigenvalues().maxCoeff(), 1e-12);
    const double step = 1.0 / L;
    Matrix theta = Matrix::Zero(delta.rows(), delta.cols());
    for (int it = 0; it < max_iter; ++it) {
        const Matrix grad = s * theta - delta;
        Matrix next = theta - step * grad;
        for (Index j = 0; j < next.rows(); ++j) {
            const double norm = next.row(j).norm();
            const double t = step * lambda;
            if (norm <= t)
                next.row(j).setZero();
            else
                next.row(j) *= 1.0 - t / norm;
        }
        const double change = (next - theta).cwiseAbs().maxCoeff();
        theta = std::move(next);
        if (change < 1e-15) break;
    }
    return theta;
}

/// Largest principal angle (radians) between the column spans of a and b.
inline double max_principal_angle(const Matrix& a, const Matrix& b)
{
    const Matrix qa = Eigen::HouseholderQR<Matrix>(a).householderQ() * Matrix::Identity(a.rows(), a.cols());
    const Matrix qb = Eigen::HouseholderQR<Matrix>(b).householderQ() * Matrix::Identity(b.rows(), b.cols());
    // sin of the largest angle is the norm of the part of span(a) outside span(b).
    const Matrix residual = qa - qb * (qb.transpose() * qa);
    const double s = Eigen::JacobiSVD<Matrix>(residual).singularValues()(0);
    return std::asin(std::min(1.0, s));
}

class TempDir {
public:
    TempDir()
    {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("msda_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    std::string write(const std::string& name, const std::string& content) const
    {
        const std::string p = file(name);
        std::ofstream(p, std::ios::binary) << content;
        return p;
    }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

} // namespace testutil
