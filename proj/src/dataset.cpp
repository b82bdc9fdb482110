#include "msda/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_map>

namespace msda {

namespace {

std::string trim(std::string_view s)
{
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    std::string out(s.substr(b, e - b));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"')
        out = out.substr(1, out.size() - 2);
    return out;
}

std::vector<std::string> split_line(const std::string& line)
{
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(trim(std::string_view(line).substr(start)));
            break;
        }
        cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
        start = comma + 1;
    }
    return cells;
}

bool parse_double(const std::string& cell, double& value)
{
    if (cell.empty()) return false;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    return ec == std::errc() && ptr == last && std::isfinite(value);
}

struct RawTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

RawTable read_table(const std::string& path, bool has_header)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot open file: " + path);
    RawTable table;
    std::string line;
    bool first = true;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (first && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        if (trim(line).empty()) continue;
        auto cells = split_line(line);
        if (first && has_header) {
            table.header = std::move(cells);
        } else {
            const std::size_t width = table.header.empty()
                                          ? (table.rows.empty() ? cells.size() : table.rows.front().size())
                                          : table.header.size();
            if (cells.size() != width)
                throw InputError("line " + std::to_string(line_no) + ": expected " +
                                 std::to_string(width) + " cells, found " +
                                 std::to_string(cells.size()));
            table.rows.push_back(std::move(cells));
        }
        first = false;
    }
    if (table.rows.empty()) throw InputError("no data rows in " + path);
    return table;
}

} // namespace

LabeledDataset::LabeledDataset(Matrix features, std::vector<int> labels, int num_classes,
                               std::vector<std::string> feature_names,
                               std::vector<std::string> class_names)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      num_classes_(num_classes),
      feature_names_(std::move(feature_names)),
      class_names_(std::move(class_names))
{
    if (num_classes_ < 2) throw InputError("need at least 2 classes");
    if (static_cast<Index>(labels_.size()) != features_.rows())
        throw InputError("label count does not match row count");
    std::vector<Index> counts(num_classes_, 0);
    for (int y : labels_) {
        if (y < 0 || y >= num_classes_) throw InputError("label out of range");
        ++counts[y];
    }
    for (int k = 0; k < num_classes_; ++k)
        if (counts[k] == 0) throw InputError("class " + std::to_string(k + 1) + " has zero rows");
    if (features_.rows() <= num_classes_)
        throw InputError("n <= K: need more rows than classes");
    if (!features_.allFinite()) throw InputError("features contain non-finite values");
    if (!feature_names_.empty() && static_cast<Index>(feature_names_.size()) != features_.cols())
        throw InputError("feature name count does not match column count");
    if (class_names_.empty()) {
        for (int k = 0; k < num_classes_; ++k) class_names_.push_back(std::to_string(k + 1));
    } else if (static_cast<int>(class_names_.size()) != num_classes_) {
        throw InputError("class name count does not match class count");
    }
}

std::vector<Index> LabeledDataset::class_counts() const
{
    std::vector<Index> counts(num_classes_, 0);
    for (int y : labels_) ++counts[y];
    return counts;
}

LabeledDataset LabeledDataset::subset_rows(const std::vector<Index>& rows) const
{
    Matrix x(static_cast<Index>(rows.size()), p());
    std::vector<int> y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        x.row(static_cast<Index>(i)) = features_.row(rows[i]);
        y[i] = labels_[rows[i]];
    }
    return LabeledDataset(std::move(x), std::move(y), num_classes_, feature_names_, class_names_);
}

LabeledDataset LabeledDataset::subset_columns(const std::vector<Index>& cols) const
{
    Matrix x(n(), static_cast<Index>(cols.size()));
    std::vector<std::string> names;
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (cols[c] < 0 || cols[c] >= p()) throw InputError("column index out of range");
        x.col(static_cast<Index>(c)) = features_.col(cols[c]);
        if (!feature_names_.empty()) names.push_back(feature_names_[cols[c]]);
    }
    return LabeledDataset(std::move(x), labels_, num_classes_, std::move(names), class_names_);
}

LabeledDataset LabeledDataset::with_baseline(int baseline) const
{
    if (baseline < 0 || baseline >= num_classes_) throw InputError("baseline class out of range");
    std::vector<int> new_index(num_classes_);
    std::vector<std::string> names{class_names_[baseline]};
    new_index[baseline] = 0;
    int next = 1;
    for (int k = 0; k < num_classes_; ++k) {
        if (k == baseline) continue;
        new_index[k] = next++;
        names.push_back(class_names_[k]);
    }
    std::vector<int> y(labels_.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = new_index[labels_[i]];
    return LabeledDataset(features_, std::move(y), num_classes_, feature_names_, std::move(names));
}

LabeledDataset load_csv(const std::string& path, const CsvOptions& options)
{
    const RawTable table = read_table(path, options.has_header);
    const std::size_t width = table.rows.front().size();

    std::size_t label_col = 0;
    if (const auto* name = std::get_if<std::string>(&options.label_column)) {
        if (!options.has_header) throw InputError("label column by name requires a header row");
        auto it = std::find(table.header.begin(), table.header.end(), *name);
        if (it == table.header.end()) throw InputError("label column not found: " + *name);
        label_col = static_cast<std::size_t>(it - table.header.begin());
    } else {
        const int idx = std::get<int>(options.label_column);
        if (idx < 0 || static_cast<std::size_t>(idx) >= width)
            throw InputError("label column index out of range");
        label_col = static_cast<std::size_t>(idx);
    }
    if (width < 2) throw InputError("need at least one feature column");

    const Index n = static_cast<Index>(table.rows.size());
    const Index p = static_cast<Index>(width - 1);
    Matrix x(n, p);
    std::vector<int> y(table.rows.size());
    std::vector<std::string> class_names;
    std::unordered_map<std::string, int> class_index;

    for (Index i = 0; i < n; ++i) {
        const auto& cells = table.rows[static_cast<std::size_t>(i)];
        Index j = 0;
        for (std::size_t c = 0; c < width; ++c) {
            if (c == label_col) continue;
            double v = 0.0;
            if (!parse_double(cells[c], v))
                throw InputError("non-numeric feature cell at row " + std::to_string(i + 1) +
                                 ", column " + std::to_string(c) + ": '" + cells[c] + "'");
            x(i, j++) = v;
        }
        const std::string& label = cells[label_col];
        if (label.empty()) throw InputError("empty label at row " + std::to_string(i + 1));
        auto [it, inserted] = class_index.emplace(label, static_cast<int>(class_names.size()));
        if (inserted) class_names.push_back(label);
        y[static_cast<std::size_t>(i)] = it->second;
    }

    std::vector<std::string> feature_names;
    if (options.has_header) {
        for (std::size_t c = 0; c < width; ++c)
            if (c != label_col) feature_names.push_back(table.header[c]);
    }
    const int K = static_cast<int>(class_names.size());
    if (K < 2) throw InputError("need at least 2 classes, found " + std::to_string(K));
    if (n <= K) throw InputError("n <= K: " + std::to_string(n) + " rows for " + std::to_string(K) + " classes");
    return LabeledDataset(std::move(x), std::move(y), K, std::move(feature_names), std::move(class_names));
}

Matrix load_feature_csv(const std::string& path, bool has_header)
{
    const RawTable table = read_table(path, has_header);
    const Index n = static_cast<Index>(table.rows.size());
    const Index p = static_cast<Index>(table.rows.front().size());
    Matrix x(n, p);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < p; ++j) {
            const auto& cell = table.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (!parse_double(cell, x(i, j)))
                throw InputError("non-numeric feature cell at row " + std::to_string(i + 1) +
                                 ", column " + std::to_string(j) + ": '" + cell + "'");
        }
    }
    return x;
}

void write_csv(const LabeledDataset& data, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw InputError("cannot write file: " + path);
    out.imbue(std::locale::classic());
    out << std::setprecision(17);
    out << "label";
    for (Index j = 0; j < data.p(); ++j)
        out << ',' << (data.feature_names().empty() ? "x" + std::to_string(j + 1) : data.feature_names()[j]);
    out << '\n';
    for (Index i = 0; i < data.n(); ++i) {
        out << data.class_names()[data.labels()[static_cast<std::size_t>(i)]];
        for (Index j = 0; j < data.p(); ++j) out << ',' << data.features()(i, j);
        out << '\n';
    }
}

} // namespace msda
