#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msda/classify.hpp"
#include "msda/solver.hpp"

namespace msda {

inline constexpr int kModelSchemaVersion = 1;

struct ArtifactMetadata {
    std::string created;
    std::uint64_t seed = 0;
    std::string version = "1.0.0";
    bool standardized = true;
};

struct ModelArtifact {
    CoefMatrix coef;
    FittedClassifier classifier;
    double lambda = 0.0;
    /// Original feature index of every retained row of coef.
    std::optional<std::vector<Index>> screening_map;
    /// Number of columns of the raw input the model expects.
    Index input_features = 0;
    std::vector<std::string> class_names;
    std::vector<std::string> feature_names;
    ArtifactMetadata metadata;

    /// Throws InputError when the pieces are inconsistent.
    void validate() const;
    /// Applies the screening map (if any) and predicts 0-based classes.
    std::vector<int> predict(const Matrix& raw) const;
};

void save_model(const ModelArtifact& artifact, const std::string& path);
ModelArtifact load_model(const std::string& path);

std::string model_to_string(const ModelArtifact& artifact);
ModelArtifact model_from_string(const std::string& text);

} // namespace msda
