#pragma once

#include "cola/ce.hpp"
#include "cola/shapley.hpp"

namespace cola {

enum class ValueMode { Max, Avg };
enum class SelectPolicy { Sample, TopK };

ValueMode value_mode_from_string(const std::string& s);
SelectPolicy select_policy_from_string(const std::string& s);

// Binary mask over n x |F| action-group cells plus the refined matrix.
struct ActionPlan {
    Eigen::MatrixXi mask;  // n x |F|
    Eigen::MatrixXd z;     // n x d encoded
    int budget_used = 0;
    std::uint64_t seed = 0;
};

// Candidate replacement values per cell. Max picks the reference row with
// the highest coupling probability (ties: lowest index); Avg takes the
// conditionally weighted average, with categorical blocks snapped to the
// one-hot of the heaviest level.
Eigen::MatrixXd compose_values(ValueMode mode, const Eigen::MatrixXd& r,
                               const CouplingMatrix& coupling, const FeatureSchema& schema);

// Picks min(C, #positive-mass cells) distinct cells. Sample draws without
// replacement proportional to varphi; TopK takes the C largest (ties broken
// row-major).
Eigen::MatrixXi select_positions(const Eigen::MatrixXd& varphi, int C, std::uint64_t seed,
                                 SelectPolicy policy);

// z = x with masked action groups replaced block-wise by q.
Eigen::MatrixXd apply_plan(const Eigen::MatrixXd& x, const Eigen::MatrixXi& mask,
                           const Eigen::MatrixXd& q, const FeatureSchema& schema);

// The six benchmark configurations: joint (coupling kind, Shapley variant).
enum class MethodId { RbPUni, RbPOt, CfPUni, CfPRnd, CfPOt, CfPEct };

MethodId method_from_string(const std::string& s);
std::string to_string(MethodId id);

struct ColaOptions {
    ValueMode value_mode = ValueMode::Max;
    SelectPolicy policy = SelectPolicy::Sample;
    EstimatorConfig estimator;
    // Training data of the model; reference distribution for the RB methods.
    const Eigen::MatrixXd* background = nullptr;
    double sinkhorn_tol = 1e-8;
    int sinkhorn_max_iter = 10000;
    // <= 0 selects 0.05 * median squared pairwise cost.
    double entropic_coeff = 0.0;
};

// Intermediate products of one refinement, reusable across budgets: the
// attribution and value matrices do not depend on C.
struct ColaState {
    CouplingMatrix coupling;
    AttributionMatrix attribution;
    Eigen::MatrixXd q;
};

ColaState cola_prepare(const Predictor& model, const Eigen::MatrixXd& x, const CEResult& ce,
                       MethodId method, const FeatureSchema& schema, const ColaOptions& options,
                       std::uint64_t seed);

ActionPlan cola_select(const ColaState& state, const Eigen::MatrixXd& x, int C,
                       std::uint64_t seed, const FeatureSchema& schema,
                       const ColaOptions& options);

// Full pipeline: coupling per method, attribution, value composition,
// budgeted selection, plan application.
ActionPlan cola(const Predictor& model, const Eigen::MatrixXd& x, const CEResult& ce,
                MethodId method, int C, std::uint64_t seed, const FeatureSchema& schema,
                const ColaOptions& options);

}  // namespace cola
