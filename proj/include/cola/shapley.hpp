#pragma once

#include "cola/coupling.hpp"
#include "cola/predictor.hpp"

namespace cola {

enum class ShapVariant { BShap, RbShap, CfShap, PShap };

// Characteristic-function setup for one attribution problem. Players are
// action groups (original features), so one-hot blocks are substituted
// atomically. Exactly the fields a variant needs must be set:
//   BShap  -> pairing (factual i vs r[pairing[i]])
//   RbShap -> background (uniform over its rows)
//   CfShap -> per_instance_weights (one weight vector over r rows per i)
//   PShap  -> coupling (conditional row weights + column marginal)
struct CharacteristicSpec {
    ShapVariant variant = ShapVariant::PShap;
    const Predictor* model = nullptr;
    const Eigen::MatrixXd* x = nullptr;  // n x d encoded
    const Eigen::MatrixXd* r = nullptr;  // m x d encoded
    const FeatureSchema* schema = nullptr;
    const CouplingMatrix* coupling = nullptr;
    const Eigen::MatrixXd* background = nullptr;
    const std::vector<int>* pairing = nullptr;
    std::vector<Eigen::VectorXd> per_instance_weights;

    int num_features() const { return schema->num_features(); }
    void check() const;
};

struct AttributionMatrix {
    Eigen::MatrixXd phi;     // n x |F|
    Eigen::MatrixXd varphi;  // n x |F|, nonnegative, sums to 1 overall
};

// v^(i)(S) for the subset encoded as a bitmask over action groups.
double char_value(const CharacteristicSpec& spec, int i, std::uint32_t subset);

// Exact Shapley values by subset enumeration; |F| must be <= cap.
Eigen::VectorXd exact_shapley(const CharacteristicSpec& spec, int i, int cap = 12);

// v(F) - v(empty) for the efficiency identity.
double grand_minus_null(const CharacteristicSpec& spec, int i);

// KernelSHAP-style estimate: paired subset sampling, Shapley-kernel weights,
// efficiency constraint enforced exactly. Requires m_shap >= 2|F| + 2.
Eigen::VectorXd sampled_shapley(const CharacteristicSpec& spec, int i, int m_shap,
                                std::uint64_t seed);

enum class ShapEstimator { Exact, Sampled };

struct EstimatorConfig {
    ShapEstimator estimator = ShapEstimator::Exact;
    int exact_cap = 12;
    int m_shap = 4096;
};

// phi for every instance plus the globally normalized varphi
// (|phi_ik| / ||phi||_1; uniform fallback when phi is all zero).
// Per-instance seeds are derived as seed + i.
AttributionMatrix attribute_all(const CharacteristicSpec& spec,
                                const EstimatorConfig& config, std::uint64_t seed);

}  // namespace cola
