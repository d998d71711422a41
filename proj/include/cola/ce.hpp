#pragma once

#include <optional>

#include "cola/predictor.hpp"

namespace cola {

enum class CESource { Knn, Sample, External };

// Counterfactual set r: every row is predicted as target_class at threshold
// 0.5. `pairing`, when present, maps each factual index to a row of r.
struct CEResult {
    Eigen::MatrixXd r;  // m x d
    std::optional<std::vector<int>> pairing;
    int target_class = 1;
    CESource source = CESource::Knn;

    int count() const { return static_cast<int>(r.rows()); }
};

// Nearest valid pool point per factual row (Euclidean, encoded space).
// k = 1 gives m = n and a total pairing; k > 1 returns the k nearest per
// factual (m = n*k) with the pairing mapping each factual to its nearest.
CEResult knn_ce(const Predictor& model, const Eigen::MatrixXd& x,
                const Eigen::MatrixXd& pool, int target_class, int k = 1);

// m points drawn uniformly without replacement from valid pool points.
CEResult sample_ce(const Predictor& model, const Eigen::MatrixXd& pool,
                   int target_class, int m, std::uint64_t seed);

// Reads externally generated counterfactuals from CSV (same sidecar schema
// convention; optional integer `pairing` column). Rows failing the
// target-class check are rejected with their indices reported.
CEResult load_external_ce(const std::string& path, const FeatureSchema& schema,
                          const EncodingStats& stats, const Predictor& model,
                          int target_class);

// Asserts that every row of r crosses 0.5 toward target_class.
void check_validity(const Predictor& model, const CEResult& ce);

}  // namespace cola
