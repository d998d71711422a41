#pragma once

#include <Eigen/Dense>

#include "cola/schema.hpp"

namespace cola {

// Per-numeric-column standardization statistics frozen from a training table.
struct EncodingStats {
    // Indexed by feature id; unused entries for categoricals.
    std::vector<double> mean;
    std::vector<double> stddev;           // population standard deviation
    std::vector<bool> constant;           // std == 0: passed through unscaled
    std::vector<std::string> warnings;
};

// Encoded data: numerics standardized, categoricals one-hot. Rows align with
// the source table.
struct EncodedMatrix {
    Eigen::MatrixXd values;  // n x d
    FeatureSchema schema;
    EncodingStats stats;

    int rows() const { return static_cast<int>(values.rows()); }
    int cols() const { return static_cast<int>(values.cols()); }
};

EncodingStats compute_stats(const DataTable& stats_source);

// Standardizes with statistics taken from `stats_source` (pass the table
// itself for training data). Constant numeric columns pass through unscaled
// and are recorded in stats.warnings.
EncodedMatrix encode(const DataTable& table, const DataTable& stats_source);
EncodedMatrix encode(const DataTable& table, const EncodingStats& stats,
                     const FeatureSchema& schema);

// Inverts the encoding back to a raw table. One-hot blocks decode to the
// level with the largest entry; labels are filled from `labels` when given.
DataTable decode(const EncodedMatrix& encoded, const std::vector<int>* labels = nullptr);

// Deterministic shuffled split; the first part gets round(ratio * n) rows.
std::pair<DataTable, DataTable> split(const DataTable& table, double ratio,
                                      std::uint64_t seed);

// Balanced two-class Gaussian blobs: class 0 at -separation/2 per coordinate,
// class 1 at +separation/2, unit covariance. All columns numeric.
DataTable synth_two_gaussians(int n, int d, double separation, std::uint64_t seed);

Eigen::VectorXi labels_vector(const DataTable& table);

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);

}  // namespace cola
