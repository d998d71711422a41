#include "cola/encode.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

namespace cola {

EncodingStats compute_stats(const DataTable& source) {
    if (source.num_rows() == 0)
        throw ValidationError("encode: stats source table is empty");
    const FeatureSchema& schema = source.schema;
    const int n = source.num_rows();
    EncodingStats stats;
    stats.mean.assign(schema.num_features(), 0.0);
    stats.stddev.assign(schema.num_features(), 1.0);
    stats.constant.assign(schema.num_features(), false);
    for (int g = 0; g < schema.num_features(); ++g) {
        if (schema.columns()[g].kind != ColumnKind::Numeric) continue;
        double sum = 0.0;
        for (int i = 0; i < n; ++i) sum += source.rows[i][g].number;
        const double mean = sum / n;
        double ss = 0.0;
        for (int i = 0; i < n; ++i) {
            const double dv = source.rows[i][g].number - mean;
            ss += dv * dv;
        }
        const double sd = std::sqrt(ss / n);
        stats.mean[g] = mean;
        if (sd == 0.0) {
            stats.constant[g] = true;
            stats.stddev[g] = 1.0;
            stats.warnings.push_back("column '" + schema.columns()[g].name +
                                     "' is constant; passed through unscaled");
        } else {
            stats.stddev[g] = sd;
        }
    }
    return stats;
}

EncodedMatrix encode(const DataTable& table, const EncodingStats& stats,
                     const FeatureSchema& schema) {
    const int n = table.num_rows();
    EncodedMatrix out;
    out.schema = schema;
    out.stats = stats;
    out.values = Eigen::MatrixXd::Zero(n, schema.encoded_width());
    for (int i = 0; i < n; ++i) {
        for (int g = 0; g < schema.num_features(); ++g) {
            const int off = schema.group_offset(g);
            if (schema.columns()[g].kind == ColumnKind::Numeric) {
                double v = table.rows[i][g].number;
                if (!stats.constant[g]) v = (v - stats.mean[g]) / stats.stddev[g];
                if (!std::isfinite(v))
                    throw ValidationError("encode: non-finite value at row " + std::to_string(i));
                out.values(i, off) = v;
            } else {
                out.values(i, off + table.rows[i][g].level) = 1.0;
            }
        }
    }
    return out;
}

EncodedMatrix encode(const DataTable& table, const DataTable& stats_source) {
    return encode(table, compute_stats(stats_source), table.schema);
}

DataTable decode(const EncodedMatrix& encoded, const std::vector<int>* labels) {
    const FeatureSchema& schema = encoded.schema;
    DataTable table;
    table.schema = schema;
    const int n = encoded.rows();
    for (int i = 0; i < n; ++i) {
        std::vector<Cell> row(schema.num_features());
        for (int g = 0; g < schema.num_features(); ++g) {
            const int off = schema.group_offset(g);
            if (schema.columns()[g].kind == ColumnKind::Numeric) {
                double v = encoded.values(i, off);
                if (!encoded.stats.constant.empty() && !encoded.stats.constant[g])
                    v = v * encoded.stats.stddev[g] + encoded.stats.mean[g];
                row[g].number = v;
            } else {
                int best = 0;
                for (int k = 1; k < schema.group_width(g); ++k)
                    if (encoded.values(i, off + k) > encoded.values(i, off + best)) best = k;
                row[g].level = best;
            }
        }
        table.rows.push_back(std::move(row));
        table.labels.push_back(labels ? (*labels)[i] : 0);
    }
    return table;
}

std::pair<DataTable, DataTable> split(const DataTable& table, double ratio,
                                      std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0))
        throw ValidationError("split: ratio must lie in (0, 1)");
    const int n = table.num_rows();
    if (n < 2) throw ValidationError("split: need at least 2 rows");
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    const int n_first = static_cast<int>(std::lround(ratio * n));
    DataTable a, b;
    a.schema = table.schema;
    b.schema = table.schema;
    for (int i = 0; i < n; ++i) {
        DataTable& dst = (i < n_first) ? a : b;
        dst.rows.push_back(table.rows[order[i]]);
        dst.labels.push_back(table.labels[order[i]]);
    }
    return {std::move(a), std::move(b)};
}

DataTable synth_two_gaussians(int n, int d, double separation, std::uint64_t seed) {
    if (n < 2 || d < 1) throw ValidationError("synth_two_gaussians: need n >= 2, d >= 1");
    if (separation < 0.0) throw ValidationError("synth_two_gaussians: separation must be >= 0");
    std::vector<Column> columns;
    for (int k = 0; k < d; ++k)
        columns.push_back(Column{"f" + std::to_string(k), ColumnKind::Numeric, {}});
    DataTable table;
    table.schema = FeatureSchema(std::move(columns), "label");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
        const int label = i % 2;  // balanced, interleaved
        const double center = (label == 0 ? -0.5 : 0.5) * separation;
        std::vector<Cell> row(d);
        for (int k = 0; k < d; ++k) row[k].number = center + gauss(rng);
        table.rows.push_back(std::move(row));
        table.labels.push_back(label);
    }
    return table;
}

Eigen::VectorXi labels_vector(const DataTable& table) {
    Eigen::VectorXi y(table.num_rows());
    for (int i = 0; i < table.num_rows(); ++i) y(i) = table.labels[i];
    return y;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    char buf[64];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            out << buf;
            if (j + 1 < m.cols()) out << ',';
        }
        out << '\n';
    }
}

}  // namespace cola
