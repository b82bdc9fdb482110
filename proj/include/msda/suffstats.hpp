#pragma once

#include <list>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "msda/common.hpp"
#include "msda/dataset.hpp"

namespace msda {

enum class CovMode { Auto, Dense, OnDemand };
enum class PriorMode { Empirical, Uniform };

struct StatsOptions {
    CovMode mode = CovMode::Auto;
    /// Auto mode stores the full covariance when p is at most this value.
    Index dense_max_p = 4096;
    /// Dense mode refuses to allocate more than this many covariance entries.
    Index dense_max_entries = Index{1} << 28;
    /// Capacity of the column memo used in on-demand mode.
    std::size_t memo_columns = 512;
    PriorMode priors = PriorMode::Empirical;
};

namespace detail {

// LRU memo of covariance columns, shared between copies of a SuffStats.
class ColumnMemo {
public:
    explicit ColumnMemo(std::size_t capacity) : capacity_(std::max<std::size_t>(capacity, 1)) {}

    template <class Make>
    std::shared_ptr<const Vector> get(Index j, Make&& make)
    {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = index_.find(j);
            if (it != index_.end()) {
                order_.splice(order_.begin(), order_, it->second);
                return it->second->second;
            }
        }
        auto col = std::make_shared<const Vector>(make());
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = index_.find(j);
        if (it != index_.end()) return it->second->second;
        order_.emplace_front(j, col);
        index_[j] = order_.begin();
        if (order_.size() > capacity_) {
            index_.erase(order_.back().first);
            order_.pop_back();
        }
        return col;
    }

private:
    using Entry = std::pair<Index, std::shared_ptr<const Vector>>;
    std::size_t capacity_;
    std::mutex mutex_;
    std::list<Entry> order_;
    std::unordered_map<Index, std::list<Entry>::iterator> index_;
};

} // namespace detail

/**
 * Class means, mean differences, priors and the pooled within-class
 * covariance (denominator n - K) of a labeled dataset.
 *
 * `delta()` is p x (K-1); column k-1 holds mean(class k) - mean(class 0).
 * In on-demand mode the covariance is never materialized; columns are
 * computed from the retained within-class centered data and memoized.
 */
class SuffStats {
public:
    static SuffStats compute(const LabeledDataset& data, const StatsOptions& options = {});

    Index n() const { return n_; }
    Index p() const { return p_; }
    int num_classes() const { return num_classes_; }
    const std::vector<Index>& class_counts() const { return class_counts_; }
    const Vector& priors() const { return priors_; }
    /// p x K, column k is the mean of class k.
    const Matrix& class_means() const { return class_means_; }
    const Matrix& delta() const { return delta_; }

    bool is_dense() const { return dense_cov_ != nullptr; }
    CovMode cov_mode() const { return is_dense() ? CovMode::Dense : CovMode::OnDemand; }
    /// Throws std::logic_error in on-demand mode.
    const Matrix& dense_cov() const;
    const Vector& cov_diag() const { return cov_diag_; }
    bool zero_variance(Index j) const { return !(cov_diag_[j] > 0.0); }

    /// Column j of the pooled covariance (0-based).
    Vector cov_column(Index j) const;
    std::shared_ptr<const Vector> cov_column_shared(Index j) const;
    /// Pooled covariance times a p x m matrix.
    Matrix cov_times(const Matrix& m) const;

    /**
     * Statistics of the features divided by `scale` (length p, all > 0):
     * the covariance becomes D^-1 S D^-1 and means/deltas become D^-1 mu.
     */
    SuffStats rescaled(const Vector& scale) const;

    /// Per-feature pooled within-class standard deviation, 1 where it is zero.
    Vector standardizing_scale() const;

private:
    SuffStats() = default;

    Index n_ = 0;
    Index p_ = 0;
    int num_classes_ = 0;
    std::vector<Index> class_counts_;
    Vector priors_;
    Matrix class_means_;
    Matrix delta_;
    Vector cov_diag_;
    std::shared_ptr<const Matrix> dense_cov_;
    std::shared_ptr<const Matrix> centered_;
    std::shared_ptr<detail::ColumnMemo> memo_;
    std::size_t memo_columns_ = 512;
};

} // namespace msda
