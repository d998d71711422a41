#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>

#include "cola/schema.hpp"

namespace cola {

// Joint probability over factual/counterfactual row pairs. The entropic
// coefficient is the regularization strength of the entropic transport
// objective (kept distinct from any proximity tolerance).
struct CouplingMatrix {
    Eigen::MatrixXd p;   // n x m, nonnegative, sums to 1
    Eigen::VectorXd mu;  // length n
    Eigen::VectorXd nu;  // length m
    double entropic_coeff = 0.0;
    double transport_cost = 0.0;  // sum_ij p_ij ||x_i - r_j||^2
    bool converged = true;
    double marginal_residual = 0.0;
    int iterations = 0;

    // For deterministic couplings (assignment/exact): row i maps to sigma[i].
    std::optional<std::vector<int>> matching;

    void validate(double tol = 1e-9) const;
};

enum class CouplingKind { Uniform, RandomMatch, Exact };

CouplingMatrix build_coupling(CouplingKind kind, int n, int m,
                              const std::vector<int>* pairing = nullptr,
                              std::uint64_t seed = 0);

Eigen::MatrixXd squared_cost_matrix(const Eigen::MatrixXd& x, const Eigen::MatrixXd& r);

// Entropic transport plan via log-domain Sinkhorn iterations. Stops when
// max(L1 row-marginal error, L1 column-marginal error) <= tol; on hitting
// max_iter the plan is returned with converged = false and the residual
// reported.
CouplingMatrix sinkhorn(const Eigen::MatrixXd& x, const Eigen::MatrixXd& r,
                        const Eigen::VectorXd& mu, const Eigen::VectorXd& nu,
                        double entropic_coeff, double tol = 1e-8, int max_iter = 10000);

// Uniform marginals, default coefficient 0.05 * median squared pairwise cost.
CouplingMatrix sinkhorn_default(const Eigen::MatrixXd& x, const Eigen::MatrixXd& r);

double median_squared_cost(const Eigen::MatrixXd& x, const Eigen::MatrixXd& r);

// Exact optimal assignment under squared Euclidean cost (n = m, uniform
// marginals); p is (1/n) times a permutation matrix.
CouplingMatrix assignment_ot(const Eigen::MatrixXd& x, const Eigen::MatrixXd& r);

// Minimum-cost row->column assignment of a square cost matrix
// (Jonker-Volgenant shortest augmenting paths).
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

// w_j = p_ij / sum_j' p_ij'
Eigen::VectorXd conditional_weights(const CouplingMatrix& coupling, int i);

}  // namespace cola
