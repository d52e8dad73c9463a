#include "threatbench/core/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "threatbench/core/error.hpp"

namespace threatbench {

std::string_view to_string(ColumnKind kind) {
    switch (kind) {
    case ColumnKind::numeric: return "numeric";
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::binary: return "binary";
    case ColumnKind::label: return "label";
    }
    return "numeric";
}

ColumnKind column_kind_from_string(std::string_view text) {
    if (text == "numeric") return ColumnKind::numeric;
    if (text == "categorical") return ColumnKind::categorical;
    if (text == "binary") return ColumnKind::binary;
    if (text == "label") return ColumnKind::label;
    throw DataError("unknown column kind '" + std::string(text) + "'");
}

std::string format_double(double value) {
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, result.ptr);
}

void Dataset::check_new_column(const std::string& name, std::size_t size) {
    if (find(name)) {
        throw DataError("duplicate column '" + name + "'");
    }
    if (!schema_.empty() && size != rows_) {
        throw DataError("column '" + name + "' has " + std::to_string(size) + " rows, expected " +
                        std::to_string(rows_));
    }
    if (name.empty() || name.find_first_of(",\n\r") != std::string::npos) {
        throw DataError("invalid column name '" + name + "'");
    }
}

void Dataset::add_numeric(ColumnSpec spec, std::vector<double> values) {
    if (spec.kind == ColumnKind::categorical) {
        throw DataError("add_numeric called for categorical column '" + spec.name + "'");
    }
    check_new_column(spec.name, values.size());
    if (spec.kind == ColumnKind::label && label_column()) {
        throw DataError("dataset already has a label column");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        if (spec.kind == ColumnKind::binary && v != 0.0 && v != 1.0) {
            throw DataError("binary column '" + spec.name + "' row " + std::to_string(i + 1) +
                            " holds " + format_double(v));
        }
        if (spec.kind == ColumnKind::label && (v < 0.0 || v != std::floor(v))) {
            throw DataError("label column '" + spec.name + "' row " + std::to_string(i + 1) +
                            " is not a non-negative integer");
        }
    }
    rows_ = values.size();
    schema_.push_back(std::move(spec));
    data_.push_back(ColumnData{std::move(values), {}});
}

void Dataset::add_categorical(std::string name, std::vector<std::string> values) {
    check_new_column(name, values.size());
    for (const auto& v : values) {
        if (v.find_first_of(",\n\r") != std::string::npos) {
            throw DataError("categorical value '" + v + "' contains a delimiter");
        }
    }
    rows_ = values.size();
    schema_.push_back(ColumnSpec{std::move(name), ColumnKind::categorical});
    data_.push_back(ColumnData{{}, std::move(values)});
}

std::optional<std::size_t> Dataset::find(std::string_view name) const {
    for (std::size_t i = 0; i < schema_.size(); ++i) {
        if (schema_[i].name == name) {
            return i;
        }
    }
    return std::nullopt;
}

std::size_t Dataset::require(std::string_view name) const {
    if (auto idx = find(name)) {
        return *idx;
    }
    throw DataError("missing column '" + std::string(name) + "'");
}

std::optional<std::size_t> Dataset::label_column() const {
    for (std::size_t i = 0; i < schema_.size(); ++i) {
        if (schema_[i].kind == ColumnKind::label) {
            return i;
        }
    }
    return std::nullopt;
}

std::span<const double> Dataset::numeric(std::size_t index) const {
    if (schema_.at(index).kind == ColumnKind::categorical) {
        throw DataError("column '" + schema_[index].name + "' is categorical");
    }
    return data_[index].numbers;
}

std::span<const double> Dataset::numeric(std::string_view name) const {
    return numeric(require(name));
}

std::span<const std::string> Dataset::categorical(std::size_t index) const {
    if (schema_.at(index).kind != ColumnKind::categorical) {
        throw DataError("column '" + schema_[index].name + "' is not categorical");
    }
    return data_[index].text;
}

std::span<const std::string> Dataset::categorical(std::string_view name) const {
    return categorical(require(name));
}

Labels Dataset::labels(std::string_view name) const {
    const auto values = numeric(name);
    Labels out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        out[i] = static_cast<int>(values[i]);
    }
    return out;
}

std::string Dataset::cell_text(std::size_t row, std::size_t col) const {
    if (schema_.at(col).kind == ColumnKind::categorical) {
        return data_[col].text.at(row);
    }
    return format_double(data_[col].numbers.at(row));
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
    Dataset out;
    out.schema_ = schema_;
    out.rows_ = rows.size();
    out.data_.resize(data_.size());
    for (std::size_t c = 0; c < data_.size(); ++c) {
        if (schema_[c].kind == ColumnKind::categorical) {
            out.data_[c].text.reserve(rows.size());
            for (auto r : rows) out.data_[c].text.push_back(data_[c].text.at(r));
        } else {
            out.data_[c].numbers.reserve(rows.size());
            for (auto r : rows) out.data_[c].numbers.push_back(data_[c].numbers.at(r));
        }
    }
    return out;
}

Dataset Dataset::without(std::span<const std::string> names) const {
    for (const auto& n : names) {
        (void)require(n);
    }
    Dataset out;
    out.rows_ = rows_;
    for (std::size_t c = 0; c < schema_.size(); ++c) {
        bool drop = false;
        for (const auto& n : names) drop = drop || n == schema_[c].name;
        if (!drop) {
            out.schema_.push_back(schema_[c]);
            out.data_.push_back(data_[c]);
        }
    }
    return out;
}

Matrix Dataset::to_matrix(std::span<const std::string> names) const {
    std::vector<std::span<const double>> cols;
    cols.reserve(names.size());
    for (const auto& n : names) {
        cols.push_back(numeric(n));
    }
    Matrix m(rows_, names.size());
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            m(r, c) = cols[c][r];
        }
    }
    return m;
}

std::vector<std::string> Dataset::feature_names() const {
    std::vector<std::string> out;
    for (const auto& spec : schema_) {
        if (spec.kind == ColumnKind::numeric || spec.kind == ColumnKind::binary) {
            out.push_back(spec.name);
        }
    }
    return out;
}

namespace {

std::vector<std::string> split_csv_line(std::string line) {
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return cells;
}

bool parse_double(const std::string& text, double& out) {
    if (text.empty()) {
        return false;
    }
    const char* first = text.data();
    const char* last = first + text.size();
    if (*first == '+') {
        ++first;
    }
    const auto result = std::from_chars(first, last, out);
    return result.ec == std::errc{} && result.ptr == last;
}

} // namespace

Dataset read_dataset(std::istream& in, const Schema& schema) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("header mismatch: input is empty");
    }
    const auto header = split_csv_line(line);
    bool header_ok = header.size() == schema.size();
    for (std::size_t i = 0; header_ok && i < header.size(); ++i) {
        header_ok = header[i] == schema[i].name;
    }
    if (!header_ok) {
        std::string expected;
        for (const auto& c : schema) expected += (expected.empty() ? "" : ",") + c.name;
        throw DataError("header mismatch: expected '" + expected + "', found '" + line + "'");
    }

    std::vector<std::vector<double>> numbers(schema.size());
    std::vector<std::vector<std::string>> text(schema.size());
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") {
            continue;
        }
        ++row;
        const auto cells = split_csv_line(line);
        if (cells.size() != schema.size()) {
            throw DataError("row " + std::to_string(row) + ": expected " +
                            std::to_string(schema.size()) + " cells, found " +
                            std::to_string(cells.size()));
        }
        for (std::size_t c = 0; c < schema.size(); ++c) {
            if (schema[c].kind == ColumnKind::categorical) {
                text[c].push_back(cells[c]);
                continue;
            }
            double v = 0.0;
            if (!parse_double(cells[c], v)) {
                throw DataError("row " + std::to_string(row) + ", column \"" + schema[c].name +
                                "\": cannot parse '" + cells[c] + "' as " +
                                std::string(to_string(schema[c].kind)));
            }
            numbers[c].push_back(v);
        }
    }

    Dataset out;
    for (std::size_t c = 0; c < schema.size(); ++c) {
        if (schema[c].kind == ColumnKind::categorical) {
            out.add_categorical(schema[c].name, std::move(text[c]));
        } else {
            out.add_numeric(schema[c], std::move(numbers[c]));
        }
    }
    return out;
}

Dataset load_dataset(const std::filesystem::path& path, const Schema& schema) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open dataset file '" + path.string() + "'");
    }
    return read_dataset(in, schema);
}

void write_dataset(const Dataset& dataset, std::ostream& out) {
    const auto& schema = dataset.schema();
    for (std::size_t c = 0; c < schema.size(); ++c) {
        out << (c ? "," : "") << schema[c].name;
    }
    out << '\n';
    for (std::size_t r = 0; r < dataset.rows(); ++r) {
        for (std::size_t c = 0; c < schema.size(); ++c) {
            out << (c ? "," : "") << dataset.cell_text(r, c);
        }
        out << '\n';
    }
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write dataset file '" + path.string() + "'");
    }
    write_dataset(dataset, out);
    if (!out) {
        throw DataError("write failed for '" + path.string() + "'");
    }
}

} // namespace threatbench
