#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "threatbench/core/matrix.hpp"

namespace threatbench {

enum class ColumnKind { numeric, categorical, binary, label };

std::string_view to_string(ColumnKind kind);
ColumnKind column_kind_from_string(std::string_view text);

struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    bool operator==(const ColumnSpec&) const = default;
};

using Schema = std::vector<ColumnSpec>;
using Labels = std::vector<int>;

/// Typed column table. Numeric, binary and label columns hold doubles;
/// categorical columns hold strings. Immutable once handed out by a generator
/// or loader; transformations return new tables.
class Dataset {
public:
    Dataset() = default;

    /// Appends a numeric, binary or label column. Throws DataError on a row
    /// count mismatch, a duplicate name, a second label column or a non-0/1
    /// binary value.
    void add_numeric(ColumnSpec spec, std::vector<double> values);
    void add_categorical(std::string name, std::vector<std::string> values);

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return schema_.size(); }
    [[nodiscard]] const Schema& schema() const { return schema_; }
    [[nodiscard]] const ColumnSpec& column(std::size_t index) const { return schema_.at(index); }

    [[nodiscard]] std::optional<std::size_t> find(std::string_view name) const;
    /// Index of a column, or DataError naming it.
    [[nodiscard]] std::size_t require(std::string_view name) const;
    [[nodiscard]] std::optional<std::size_t> label_column() const;

    [[nodiscard]] std::span<const double> numeric(std::size_t index) const;
    [[nodiscard]] std::span<const double> numeric(std::string_view name) const;
    [[nodiscard]] std::span<const std::string> categorical(std::size_t index) const;
    [[nodiscard]] std::span<const std::string> categorical(std::string_view name) const;
    [[nodiscard]] Labels labels(std::string_view name) const;

    [[nodiscard]] std::string cell_text(std::size_t row, std::size_t col) const;

    [[nodiscard]] Dataset select_rows(std::span<const std::size_t> rows) const;
    [[nodiscard]] Dataset without(std::span<const std::string> names) const;
    /// Row-major matrix of the named numeric/binary/label columns.
    [[nodiscard]] Matrix to_matrix(std::span<const std::string> names) const;
    /// Names of every numeric or binary column (label and categorical excluded).
    [[nodiscard]] std::vector<std::string> feature_names() const;

    bool operator==(const Dataset&) const = default;

private:
    struct ColumnData {
        std::vector<double> numbers;
        std::vector<std::string> text;
        bool operator==(const ColumnData&) const = default;
    };

    void check_new_column(const std::string& name, std::size_t size);

    Schema schema_;
    std::vector<ColumnData> data_;
    std::size_t rows_ = 0;
};

/// Comma-separated text with a header row. The header must equal the schema
/// names in order; cells are parsed per kind. Errors name the 1-based data row
/// and the column.
Dataset read_dataset(std::istream& in, const Schema& schema);
Dataset load_dataset(const std::filesystem::path& path, const Schema& schema);

/// Numbers are written in shortest round-trip form, so load(save(d)) == d and
/// repeated saves are byte-identical.
void write_dataset(const Dataset& dataset, std::ostream& out);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

} // namespace threatbench
