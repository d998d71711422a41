#pragma once

#include "cola/predictor.hpp"

namespace cola {

// Per-instance table of subset substitutions for the exact minimum of
// |mean f(z) - mean(y*)| under a change budget and exact alignment.
struct ProfileEntry {
    std::uint32_t subset = 0;  // bitmask over action groups
    int cost = 0;              // |subset|
    double g = 0.0;            // f(z_{iS}) - mean(y*)
};

struct SubsetProfile {
    int instance = 0;
    std::vector<ProfileEntry> entries;  // sorted by (cost, subset)
};

struct BaselineSolution {
    std::vector<std::uint32_t> chosen;  // subset per instance
    double objective = 0.0;             // eta = |sum_i g_{i,S_i}|
};

// Evaluates all 2^|F| block substitutions of q into x through the model.
// Entries with a strictly cheaper equal-g duplicate are pruned.
std::vector<SubsetProfile> enumerate_profiles(const Predictor& model,
                                              const Eigen::MatrixXd& x,
                                              const Eigen::MatrixXd& q,
                                              const FeatureSchema& schema,
                                              double ystar_mean, int cap = 12);

// Exact minimizer of |sum_i g_{i,S_i}| subject to sum_i |S_i| <= C, one
// subset per instance. Depth-first branch and bound pruned with
// suffix-DP interval bounds on the reachable partial sums.
BaselineSolution solve_min_abs_sum(const std::vector<SubsetProfile>& profiles, int C);

// Full Cartesian enumeration; ground truth for solve_min_abs_sum.
// Product of entry counts must stay within `cap`.
BaselineSolution exhaustive_oracle(const std::vector<SubsetProfile>& profiles, int C,
                                   std::uint64_t cap = 10000000);

}  // namespace cola
