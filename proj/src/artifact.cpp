#include "msda/artifact.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace msda {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m)
{
    json data = json::array();
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const json& j)
{
    const Index rows = j.at("rows").get<Index>();
    const Index cols = j.at("cols").get<Index>();
    const auto& data = j.at("data");
    if (rows < 0 || cols < 0 || static_cast<Index>(data.size()) != rows * cols)
        throw FormatError("matrix payload has the wrong size");
    Matrix m(rows, cols);
    std::size_t k = 0;
    for (Index i = 0; i < rows; ++i)
        for (Index j2 = 0; j2 < cols; ++j2) m(i, j2) = data[k++].get<double>();
    return m;
}

} // namespace

void ModelArtifact::validate() const
{
    const Index K = classifier.log_priors.size();
    if (K < 2) throw InputError("classifier needs at least two classes");
    if (coef.cols() != K - 1) throw InputError("coefficient columns must equal K - 1");
    if (classifier.projection.rows() != coef.rows() || classifier.projection.cols() != coef.cols())
        throw InputError("classifier projection does not match the coefficients");
    if (classifier.proj_means.rows() != K - 1 || classifier.proj_means.cols() != K)
        throw InputError("projected means must be (K-1) x K");
    if (classifier.proj_prec.rows() != K - 1 || classifier.proj_prec.cols() != K - 1)
        throw InputError("projected precision must be (K-1) x (K-1)");
    if (screening_map) {
        if (static_cast<Index>(screening_map->size()) != coef.rows())
            throw InputError("screening map length must equal the coefficient row count");
        for (Index j : *screening_map)
            if (j < 0 || j >= input_features) throw InputError("screening map index out of range");
    } else if (input_features != coef.rows()) {
        throw InputError("input feature count must equal the coefficient row count");
    }
    if (!class_names.empty() && static_cast<Index>(class_names.size()) != K)
        throw InputError("class name count must equal K");
}

std::vector<int> ModelArtifact::predict(const Matrix& raw) const
{
    if (raw.cols() != input_features)
        throw InputError("expected " + std::to_string(input_features) + " feature columns, got " +
                         std::to_string(raw.cols()));
    if (screening_map) return classifier.predict(raw(Eigen::all, *screening_map));
    return classifier.predict(raw);
}

std::string model_to_string(const ModelArtifact& artifact)
{
    artifact.validate();
    const FittedClassifier& clf = artifact.classifier;
    json j;
    j["format"] = "msda-model";
    j["schema_version"] = kModelSchemaVersion;
    j["metadata"] = {{"created", artifact.metadata.created},
                     {"seed", artifact.metadata.seed},
                     {"version", artifact.metadata.version},
                     {"standardized", artifact.metadata.standardized}};
    j["lambda"] = artifact.lambda;
    j["input_features"] = artifact.input_features;
    j["class_names"] = artifact.class_names;
    j["feature_names"] = artifact.feature_names;
    j["screening_map"] = artifact.screening_map ? json(*artifact.screening_map) : json(nullptr);
    j["coef"] = matrix_to_json(artifact.coef.theta());
    j["classifier"] = {{"proj_means", matrix_to_json(clf.proj_means)},
                       {"proj_prec", matrix_to_json(clf.proj_prec)},
                       {"log_priors", std::vector<double>(clf.log_priors.data(), clf.log_priors.data() + clf.log_priors.size())},
                       {"projected_rank", clf.projected_rank},
                       {"degenerate", clf.degenerate}};
    // Doubles are written in shortest round-trip form, so reading them back is exact.
    return j.dump(1) + "\n";
}

ModelArtifact model_from_string(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed model file: ") + e.what());
    }
    try {
        if (j.value("format", std::string{}) != "msda-model") throw FormatError("not an msda model file");
        const int version = j.at("schema_version").get<int>();
        if (version != kModelSchemaVersion)
            throw FormatError("unsupported model schema version " + std::to_string(version));

        ModelArtifact a;
        const auto& meta = j.at("metadata");
        a.metadata.created = meta.at("created").get<std::string>();
        a.metadata.seed = meta.at("seed").get<std::uint64_t>();
        a.metadata.version = meta.at("version").get<std::string>();
        a.metadata.standardized = meta.at("standardized").get<bool>();
        a.lambda = j.at("lambda").get<double>();
        a.input_features = j.at("input_features").get<Index>();
        a.class_names = j.at("class_names").get<std::vector<std::string>>();
        a.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        if (!j.at("screening_map").is_null()) a.screening_map = j.at("screening_map").get<std::vector<Index>>();
        a.coef = CoefMatrix(matrix_from_json(j.at("coef")));

        const auto& c = j.at("classifier");
        a.classifier.projection = a.coef.theta();
        a.classifier.proj_means = matrix_from_json(c.at("proj_means"));
        a.classifier.proj_prec = matrix_from_json(c.at("proj_prec"));
        const auto priors = c.at("log_priors").get<std::vector<double>>();
        a.classifier.log_priors = Eigen::Map<const Vector>(priors.data(), static_cast<Index>(priors.size()));
        a.classifier.projected_rank = c.at("projected_rank").get<int>();
        a.classifier.degenerate = c.at("degenerate").get<bool>();
        a.validate();
        return a;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed model file: ") + e.what());
    } catch (const InputError& e) {
        throw FormatError(std::string("inconsistent model file: ") + e.what());
    }
}

void save_model(const ModelArtifact& artifact, const std::string& path)
{
    const std::string text = model_to_string(artifact);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write model file: " + path);
    out << text;
}

ModelArtifact load_model(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open model file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return model_from_string(buf.str());
}

} // namespace msda
