#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace cola {

// Raised for malformed inputs (bad files, schema violations, precondition
// failures). Runtime failures (non-convergence etc.) use std::runtime_error.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ColumnKind { Numeric, Categorical };

struct Column {
    std::string name;
    ColumnKind kind = ColumnKind::Numeric;
    std::vector<std::string> levels;  // categorical only, >= 2 entries
};

// Feature columns plus the name of the binary target column. The target is
// not listed in `columns`. Encoded layout: numeric -> 1 column, categorical
// -> one column per level (one-hot), in declaration order.
class FeatureSchema {
public:
    FeatureSchema() = default;
    FeatureSchema(std::vector<Column> columns, std::string target);

    const std::vector<Column>& columns() const { return columns_; }
    const std::string& target() const { return target_; }

    int num_features() const { return static_cast<int>(columns_.size()); }
    int encoded_width() const { return encoded_width_; }

    // Maps each encoded column to the original feature it belongs to.
    // One-hot blocks of a categorical share the same group id.
    const std::vector<int>& action_groups() const { return action_groups_; }

    // First encoded column and width of the block for feature `g`.
    int group_offset(int g) const { return group_offsets_[g]; }
    int group_width(int g) const {
        const Column& c = columns_[g];
        return c.kind == ColumnKind::Numeric ? 1 : static_cast<int>(c.levels.size());
    }

    int level_index(int feature, const std::string& value) const;

private:
    std::vector<Column> columns_;
    std::string target_;
    std::vector<int> action_groups_;
    std::vector<int> group_offsets_;
    int encoded_width_ = 0;
};

// One raw cell: numeric value or categorical level index into the schema.
struct Cell {
    double number = 0.0;
    int level = -1;
};

struct DataTable {
    FeatureSchema schema;
    std::vector<std::vector<Cell>> rows;  // rows x num_features
    std::vector<int> labels;              // 0/1 per row

    int num_rows() const { return static_cast<int>(rows.size()); }
};

// Parses the sidecar schema format:
//   column <name> numeric
//   column <name> categorical <level> <level> ...
//   target <name>
// Blank lines and lines starting with '#' are ignored.
FeatureSchema load_schema(const std::string& path);

// CSV with a mandatory header row. Header must contain every schema column
// and the target; extra columns are an error. Errors cite row/column.
// When `optional_int_column` is named and present in the header, its values
// are written to *optional_values (one per row).
DataTable load_csv(const std::string& path, const FeatureSchema& schema,
                   const std::string& optional_int_column = "",
                   std::vector<int>* optional_values = nullptr);

void write_csv(const std::string& path, const DataTable& table);

}  // namespace cola
