#pragma once

#include <string>
#include <variant>
#include <vector>

#include "msda/common.hpp"

namespace msda {

/**
 * Feature matrix (n x p) with class labels.
 *
 * Labels are stored 0-based: class 0 is the baseline class against which the
 * discriminant directions are contrasted. `class_names()[k]` is the label
 * text that was mapped to class k.
 *
 * Construction validates that every class in [0, K) has at least one row,
 * that n >= K + 1 and that all features are finite.
 */
class LabeledDataset {
public:
    LabeledDataset(Matrix features, std::vector<int> labels, int num_classes,
                   std::vector<std::string> feature_names = {},
                   std::vector<std::string> class_names = {});

    const Matrix& features() const { return features_; }
    const std::vector<int>& labels() const { return labels_; }
    int num_classes() const { return num_classes_; }
    Index n() const { return features_.rows(); }
    Index p() const { return features_.cols(); }
    const std::vector<std::string>& feature_names() const { return feature_names_; }
    const std::vector<std::string>& class_names() const { return class_names_; }
    std::vector<Index> class_counts() const;

    LabeledDataset subset_rows(const std::vector<Index>& rows) const;
    LabeledDataset subset_columns(const std::vector<Index>& cols) const;

    /// Re-indexes classes so `baseline` becomes class 0; the others keep their order.
    LabeledDataset with_baseline(int baseline) const;

private:
    Matrix features_;
    std::vector<int> labels_;
    int num_classes_;
    std::vector<std::string> feature_names_;
    std::vector<std::string> class_names_;
};

struct CsvOptions {
    /// Column name (requires a header) or 0-based column index.
    std::variant<std::string, int> label_column = 0;
    bool has_header = true;
};

/// Labels are mapped to classes in order of first appearance.
LabeledDataset load_csv(const std::string& path, const CsvOptions& options = {});

/// Reads an unlabeled numeric CSV (e.g. for prediction). Every column is a feature.
Matrix load_feature_csv(const std::string& path, bool has_header);

/// Writes a leading "label" column (class_names()) followed by the features.
void write_csv(const LabeledDataset& data, const std::string& path);

} // namespace msda
