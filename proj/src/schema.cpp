#include "cola/schema.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace cola {

FeatureSchema::FeatureSchema(std::vector<Column> columns, std::string target)
    : columns_(std::move(columns)), target_(std::move(target)) {
    if (target_.empty())
        throw ValidationError("schema: no target column declared");
    std::set<std::string> seen;
    for (const Column& c : columns_) {
        if (!seen.insert(c.name).second)
            throw ValidationError("schema: duplicate column name '" + c.name + "'");
        if (c.name == target_)
            throw ValidationError("schema: target '" + target_ + "' also listed as a feature column");
        if (c.kind == ColumnKind::Categorical && c.levels.size() < 2)
            throw ValidationError("schema: categorical column '" + c.name + "' needs >= 2 levels");
    }
    int offset = 0;
    for (int g = 0; g < num_features(); ++g) {
        group_offsets_.push_back(offset);
        int w = group_width(g);
        for (int k = 0; k < w; ++k) action_groups_.push_back(g);
        offset += w;
    }
    encoded_width_ = offset;
}

int FeatureSchema::level_index(int feature, const std::string& value) const {
    const Column& c = columns_[feature];
    auto it = std::find(c.levels.begin(), c.levels.end(), value);
    if (it == c.levels.end()) return -1;
    return static_cast<int>(it - c.levels.begin());
}

namespace {

std::vector<std::string> split_fields(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, delim)) out.push_back(field);
    if (!line.empty() && line.back() == delim) out.push_back("");
    return out;
}

std::string strip(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

FeatureSchema load_schema(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("schema file not found: " + path);
    std::vector<Column> columns;
    std::string target;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip(line);
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string keyword;
        ss >> keyword;
        if (keyword == "column") {
            Column c;
            std::string kind;
            ss >> c.name >> kind;
            if (c.name.empty() || kind.empty())
                throw ValidationError("schema line " + std::to_string(lineno) + ": expected 'column <name> <kind>'");
            if (kind == "numeric") {
                c.kind = ColumnKind::Numeric;
            } else if (kind == "categorical") {
                c.kind = ColumnKind::Categorical;
                std::string lvl;
                while (ss >> lvl) c.levels.push_back(lvl);
            } else {
                throw ValidationError("schema line " + std::to_string(lineno) + ": unknown kind '" + kind + "'");
            }
            columns.push_back(std::move(c));
        } else if (keyword == "target") {
            if (!target.empty())
                throw ValidationError("schema line " + std::to_string(lineno) + ": duplicate target");
            ss >> target;
        } else {
            throw ValidationError("schema line " + std::to_string(lineno) + ": unknown keyword '" + keyword + "'");
        }
    }
    return FeatureSchema(std::move(columns), std::move(target));
}

DataTable load_csv(const std::string& path, const FeatureSchema& schema,
                   const std::string& optional_int_column,
                   std::vector<int>* optional_values) {
    std::ifstream in(path);
    if (!in) throw ValidationError("csv file not found: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("csv is empty: " + path);
    std::vector<std::string> header = split_fields(strip(line), ',');

    // Map schema columns (and the target) to header positions.
    std::vector<int> col_pos(schema.num_features(), -1);
    int target_pos = -1;
    int extra_pos = -1;
    for (int h = 0; h < static_cast<int>(header.size()); ++h) {
        const std::string name = strip(header[h]);
        if (name == schema.target()) {
            target_pos = h;
            continue;
        }
        if (!optional_int_column.empty() && name == optional_int_column) {
            extra_pos = h;
            continue;
        }
        bool known = false;
        for (int g = 0; g < schema.num_features(); ++g) {
            if (schema.columns()[g].name == name) {
                col_pos[g] = h;
                known = true;
                break;
            }
        }
        if (!known)
            throw ValidationError("csv header mismatch: unexpected column '" + name + "'");
    }
    if (target_pos < 0)
        throw ValidationError("csv header mismatch: missing target column '" + schema.target() + "'");
    for (int g = 0; g < schema.num_features(); ++g)
        if (col_pos[g] < 0)
            throw ValidationError("csv header mismatch: missing column '" + schema.columns()[g].name + "'");

    DataTable table;
    table.schema = schema;
    int rowno = 0;
    while (std::getline(in, line)) {
        ++rowno;
        std::string stripped = strip(line);
        if (stripped.empty()) continue;
        std::vector<std::string> fields = split_fields(stripped, ',');
        if (fields.size() != header.size())
            throw ValidationError("csv row " + std::to_string(rowno) + ": expected " +
                                  std::to_string(header.size()) + " fields, got " +
                                  std::to_string(fields.size()));
        std::vector<Cell> row(schema.num_features());
        for (int g = 0; g < schema.num_features(); ++g) {
            const Column& c = schema.columns()[g];
            const std::string value = strip(fields[col_pos[g]]);
            if (c.kind == ColumnKind::Numeric) {
                try {
                    size_t used = 0;
                    row[g].number = std::stod(value, &used);
                    if (used != value.size()) throw std::invalid_argument(value);
                } catch (const std::exception&) {
                    throw ValidationError("csv row " + std::to_string(rowno) + ", column '" +
                                          c.name + "': cannot parse '" + value + "' as a number");
                }
            } else {
                int lvl = schema.level_index(g, value);
                if (lvl < 0)
                    throw ValidationError("csv row " + std::to_string(rowno) + ", column '" +
                                          c.name + "': unknown level '" + value + "'");
                row[g].level = lvl;
            }
        }
        const std::string tval = strip(fields[target_pos]);
        int label;
        if (tval == "0")
            label = 0;
        else if (tval == "1")
            label = 1;
        else
            throw ValidationError("csv row " + std::to_string(rowno) + ", target column: expected 0 or 1, got '" + tval + "'");
        if (extra_pos >= 0 && optional_values) {
            const std::string ev = strip(fields[extra_pos]);
            try {
                optional_values->push_back(std::stoi(ev));
            } catch (const std::exception&) {
                throw ValidationError("csv row " + std::to_string(rowno) + ", column '" +
                                      optional_int_column + "': cannot parse '" + ev +
                                      "' as an integer");
            }
        }
        table.rows.push_back(std::move(row));
        table.labels.push_back(label);
    }
    return table;
}

void write_csv(const std::string& path, const DataTable& table) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    const FeatureSchema& schema = table.schema;
    for (int g = 0; g < schema.num_features(); ++g)
        out << schema.columns()[g].name << ',';
    out << schema.target() << '\n';
    char buf[64];
    for (int i = 0; i < table.num_rows(); ++i) {
        for (int g = 0; g < schema.num_features(); ++g) {
            const Column& c = schema.columns()[g];
            if (c.kind == ColumnKind::Numeric) {
                std::snprintf(buf, sizeof(buf), "%.17g", table.rows[i][g].number);
                out << buf;
            } else {
                out << c.levels[table.rows[i][g].level];
            }
            out << ',';
        }
        out << table.labels[i] << '\n';
    }
}

}  // namespace cola
