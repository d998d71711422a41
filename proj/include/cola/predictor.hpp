#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <string>

#include "cola/encode.hpp"

namespace cola {

enum class PredictorKind { Logistic, Mlp, BoostedStumps };

PredictorKind predictor_kind_from_string(const std::string& s);
std::string to_string(PredictorKind kind);

struct Stump {
    int feature = 0;
    double threshold = 0.0;
    double left = 0.0;   // value when x[feature] <= threshold
    double right = 0.0;
};

// A trained binary classifier returning the class-1 probability.
// Immutable after training; prediction is deterministic and reentrant.
class Predictor {
public:
    PredictorKind kind() const { return kind_; }
    int input_width() const { return input_width_; }

    // Class-1 probabilities, one per row of X.
    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
    double predict_row(const Eigen::RowVectorXd& x) const;

    // Lipschitz constant of the probability output in encoded space.
    // ||w||_2 / 4 for logistic; unavailable (throws) for the other kinds.
    double lipschitz_constant() const;

    void save(const std::string& path) const;
    static Predictor load(const std::string& path);

    // Logistic parameters (weights, bias); valid for kind Logistic only.
    const Eigen::VectorXd& weights() const { return w_; }
    double bias() const { return b_; }

    static Predictor make_logistic(Eigen::VectorXd w, double b);

private:
    friend Predictor train(PredictorKind, const Eigen::MatrixXd&, const Eigen::VectorXi&,
                           const std::map<std::string, double>&, std::uint64_t);

    PredictorKind kind_ = PredictorKind::Logistic;
    int input_width_ = 0;

    // logistic
    Eigen::VectorXd w_;
    double b_ = 0.0;

    // mlp: one hidden layer, tanh activation, sigmoid output
    Eigen::MatrixXd W1_;
    Eigen::VectorXd b1_;
    Eigen::VectorXd w2_;
    double b2_ = 0.0;

    // boosted stumps on log-odds, starting from base_score_
    std::vector<Stump> stumps_;
    double base_score_ = 0.0;
};

// Hyperparameters (all optional):
//   logistic: lr (0.5), iters (2000), l2 (0)
//   mlp: hidden (16), lr (0.5), iters (3000)
//   boosted_stumps: rounds (200), lr (0.2)
Predictor train(PredictorKind kind, const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                const std::map<std::string, double>& hyper = {}, std::uint64_t seed = 0);

inline Predictor train(PredictorKind kind, const EncodedMatrix& X, const Eigen::VectorXi& y,
                       const std::map<std::string, double>& hyper = {}, std::uint64_t seed = 0) {
    return train(kind, X.values, y, hyper, seed);
}

double training_accuracy(const Predictor& model, const Eigen::MatrixXd& X,
                         const Eigen::VectorXi& y);

}  // namespace cola
