#pragma once

#include <Eigen/Dense>
#include <string>

#include "cola/schema.hpp"

namespace cola {

enum class DivergenceKind { OtW1, EntropicOt, MmdRbf, MeanD, MedianD };

DivergenceKind divergence_from_string(const std::string& s);
std::string to_string(DivergenceKind kind);

struct DivergenceSpec {
    DivergenceKind kind = DivergenceKind::OtW1;
    // mmd_rbf: kernel bandwidth; <= 0 selects the median heuristic.
    double bandwidth = 0.0;
    // entropic_ot: regularization coefficient; <= 0 selects
    // 0.05 * median squared pairwise cost.
    double entropic_coeff = 0.0;
};

// Divergence between two scalar empirical samples (sizes may differ).
//   ot_w1       exact 1-Wasserstein (quantile-function L1 integral)
//   entropic_ot Sinkhorn transport cost under squared distance
//   mmd_rbf     biased V-statistic MMD with an RBF kernel
//   mean_d      |mean(a) - mean(b)|
//   median_d    |median(a) - median(b)|
double divergence(const DivergenceSpec& spec, const Eigen::VectorXd& a,
                  const Eigen::VectorXd& b);

// 1 - D(fz, ystar) / D(fx, ystar); 1.0 when D(fx, ystar) = 0.
double counterfactual_effect(const Eigen::VectorXd& fx, const Eigen::VectorXd& fz,
                             const Eigen::VectorXd& ystar, const DivergenceSpec& spec);

// ||z - x||_F / ||r_aligned - x||_F. Throws when the denominator is zero.
double frobenius_ratio(const Eigen::MatrixXd& z, const Eigen::MatrixXd& x,
                       const Eigen::MatrixXd& r_aligned);

double median(Eigen::VectorXd v);

}  // namespace cola
