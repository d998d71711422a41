#include "cola/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace cola {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double get(const std::map<std::string, double>& hyper, const std::string& key, double dflt) {
    auto it = hyper.find(key);
    return it == hyper.end() ? dflt : it->second;
}

void check_labels(const Eigen::MatrixXd& X, const Eigen::VectorXi& y) {
    if (y.size() != X.rows())
        throw ValidationError("train: labels length does not match rows");
    bool has0 = false, has1 = false;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y(i) == 0) has0 = true;
        else if (y(i) == 1) has1 = true;
        else throw ValidationError("train: labels must be 0 or 1");
    }
    if (!has0 || !has1)
        throw ValidationError("train: both classes must be present");
}

void train_logistic_gd(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       Eigen::VectorXd& w, double& b, double lr, int iters, double l2) {
    const double n = static_cast<double>(X.rows());
    for (int it = 0; it < iters; ++it) {
        Eigen::VectorXd p = ((X * w).array() + b).unaryExpr([](double z) { return sigmoid(z); });
        Eigen::VectorXd err = p - y;
        Eigen::VectorXd gw = X.transpose() * err / n + l2 * w;
        double gb = err.sum() / n;
        w -= lr * gw;
        b -= lr * gb;
    }
}

std::vector<Stump> fit_stumps(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              double base_score, int rounds, double lr) {
    const int n = static_cast<int>(X.rows());
    const int d = static_cast<int>(X.cols());

    // Per-feature sorted orderings, computed once.
    std::vector<std::vector<int>> order(d, std::vector<int>(n));
    for (int k = 0; k < d; ++k) {
        std::iota(order[k].begin(), order[k].end(), 0);
        std::stable_sort(order[k].begin(), order[k].end(),
                         [&](int a, int bi) { return X(a, k) < X(bi, k); });
    }

    Eigen::VectorXd score = Eigen::VectorXd::Constant(n, base_score);
    std::vector<Stump> stumps;
    for (int round = 0; round < rounds; ++round) {
        // Negative gradient of logistic loss wrt the score.
        Eigen::VectorXd residual(n);
        for (int i = 0; i < n; ++i) residual(i) = y(i) - sigmoid(score(i));

        // Least-squares best split: maximize sumL^2/cntL + sumR^2/cntR.
        double best_gain = -1.0;
        Stump best;
        const double total = residual.sum();
        for (int k = 0; k < d; ++k) {
            double sumL = 0.0;
            for (int pos = 0; pos + 1 < n; ++pos) {
                sumL += residual(order[k][pos]);
                if (X(order[k][pos], k) == X(order[k][pos + 1], k)) continue;
                const int cntL = pos + 1;
                const int cntR = n - cntL;
                const double sumR = total - sumL;
                const double gain = sumL * sumL / cntL + sumR * sumR / cntR;
                if (gain > best_gain) {
                    best_gain = gain;
                    best.feature = k;
                    best.threshold = 0.5 * (X(order[k][pos], k) + X(order[k][pos + 1], k));
                    best.left = lr * sumL / cntL;
                    best.right = lr * sumR / cntR;
                }
            }
        }
        if (best_gain < 0.0) break;  // all features constant
        stumps.push_back(best);
        for (int i = 0; i < n; ++i)
            score(i) += X(i, best.feature) <= best.threshold ? best.left : best.right;
    }
    return stumps;
}

}  // namespace

PredictorKind predictor_kind_from_string(const std::string& s) {
    if (s == "logistic") return PredictorKind::Logistic;
    if (s == "mlp") return PredictorKind::Mlp;
    if (s == "boosted_stumps") return PredictorKind::BoostedStumps;
    throw ValidationError("unknown predictor kind: " + s);
}

std::string to_string(PredictorKind kind) {
    switch (kind) {
        case PredictorKind::Logistic: return "logistic";
        case PredictorKind::Mlp: return "mlp";
        case PredictorKind::BoostedStumps: return "boosted_stumps";
    }
    return "?";
}

Predictor train(PredictorKind kind, const Eigen::MatrixXd& X, const Eigen::VectorXi& yi,
                const std::map<std::string, double>& hyper, std::uint64_t seed) {
    check_labels(X, yi);
    Eigen::VectorXd y = yi.cast<double>();
    Predictor m;
    m.kind_ = kind;
    m.input_width_ = static_cast<int>(X.cols());
    switch (kind) {
        case PredictorKind::Logistic: {
            m.w_ = Eigen::VectorXd::Zero(X.cols());
            m.b_ = 0.0;
            train_logistic_gd(X, y, m.w_, m.b_, get(hyper, "lr", 0.5),
                              static_cast<int>(get(hyper, "iters", 2000)),
                              get(hyper, "l2", 0.0));
            break;
        }
        case PredictorKind::Mlp: {
            const int h = static_cast<int>(get(hyper, "hidden", 16));
            const double lr = get(hyper, "lr", 0.5);
            const int iters = static_cast<int>(get(hyper, "iters", 3000));
            std::mt19937_64 rng(seed);
            std::normal_distribution<double> init(0.0, 0.5);
            m.W1_ = Eigen::MatrixXd::Zero(X.cols(), h);
            for (Eigen::Index a = 0; a < m.W1_.rows(); ++a)
                for (int b = 0; b < h; ++b) m.W1_(a, b) = init(rng);
            m.b1_ = Eigen::VectorXd::Zero(h);
            m.w2_ = Eigen::VectorXd::Zero(h);
            for (int b = 0; b < h; ++b) m.w2_(b) = init(rng);
            m.b2_ = 0.0;
            const double n = static_cast<double>(X.rows());
            for (int it = 0; it < iters; ++it) {
                Eigen::MatrixXd hidden = ((X * m.W1_).rowwise() + m.b1_.transpose()).array().tanh();
                Eigen::VectorXd p = ((hidden * m.w2_).array() + m.b2_)
                                        .unaryExpr([](double z) { return sigmoid(z); });
                Eigen::VectorXd err = (p - y) / n;
                Eigen::VectorXd g_w2 = hidden.transpose() * err;
                double g_b2 = err.sum();
                Eigen::MatrixXd delta =
                    (err * m.w2_.transpose()).array() * (1.0 - hidden.array().square());
                Eigen::MatrixXd g_W1 = X.transpose() * delta;
                Eigen::VectorXd g_b1 = delta.colwise().sum();
                m.W1_ -= lr * g_W1;
                m.b1_ -= lr * g_b1;
                m.w2_ -= lr * g_w2;
                m.b2_ -= lr * g_b2;
            }
            break;
        }
        case PredictorKind::BoostedStumps: {
            const double mean = y.mean();
            m.base_score_ = std::log(mean / (1.0 - mean));
            m.stumps_ = fit_stumps(X, y, m.base_score_,
                                   static_cast<int>(get(hyper, "rounds", 200)),
                                   get(hyper, "lr", 0.2));
            break;
        }
    }
    return m;
}

Predictor Predictor::make_logistic(Eigen::VectorXd w, double b) {
    Predictor m;
    m.kind_ = PredictorKind::Logistic;
    m.input_width_ = static_cast<int>(w.size());
    m.w_ = std::move(w);
    m.b_ = b;
    return m;
}

double Predictor::predict_row(const Eigen::RowVectorXd& x) const {
    if (x.size() != input_width_)
        throw ValidationError("predict: input width mismatch");
    switch (kind_) {
        case PredictorKind::Logistic:
            return sigmoid(x.dot(w_.transpose()) + b_);
        case PredictorKind::Mlp: {
            Eigen::RowVectorXd hidden = ((x * W1_) + b1_.transpose()).array().tanh();
            return sigmoid(hidden.dot(w2_.transpose()) + b2_);
        }
        case PredictorKind::BoostedStumps: {
            double score = base_score_;
            for (const Stump& s : stumps_)
                score += x(s.feature) <= s.threshold ? s.left : s.right;
            return sigmoid(score);
        }
    }
    return 0.5;
}

Eigen::VectorXd Predictor::predict(const Eigen::MatrixXd& X) const {
    if (X.cols() != input_width_)
        throw ValidationError("predict: input width mismatch");
    Eigen::VectorXd out(X.rows());
    if (kind_ == PredictorKind::Logistic) {
        out = ((X * w_).array() + b_).unaryExpr([](double z) { return sigmoid(z); });
    } else if (kind_ == PredictorKind::Mlp) {
        Eigen::MatrixXd hidden = ((X * W1_).rowwise() + b1_.transpose()).array().tanh();
        out = ((hidden * w2_).array() + b2_).unaryExpr([](double z) { return sigmoid(z); });
    } else {
        for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = predict_row(X.row(i));
    }
    return out;
}

double Predictor::lipschitz_constant() const {
    if (kind_ != PredictorKind::Logistic)
        throw std::runtime_error("lipschitz_constant: only available for logistic models");
    return w_.norm() / 4.0;
}

double training_accuracy(const Predictor& model, const Eigen::MatrixXd& X,
                         const Eigen::VectorXi& y) {
    Eigen::VectorXd p = model.predict(X);
    int correct = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i)
        if ((p(i) >= 0.5 ? 1 : 0) == y(i)) ++correct;
    return static_cast<double>(correct) / static_cast<double>(y.size());
}

// Model file: line-oriented text, doubles in hexfloat so that a round trip
// is bit-exact.
namespace {

constexpr const char* kMagic = "COLA-MODEL v1";

void put(std::ostream& out, double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%a", v);
    out << buf << '\n';
}

double take(std::istream& in) {
    std::string tok;
    if (!(in >> tok)) throw ValidationError("model file truncated");
    return std::strtod(tok.c_str(), nullptr);
}

int take_int(std::istream& in) {
    int v;
    if (!(in >> v)) throw ValidationError("model file truncated");
    return v;
}

}  // namespace

void Predictor::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << kMagic << '\n' << to_string(kind_) << '\n' << input_width_ << '\n';
    switch (kind_) {
        case PredictorKind::Logistic:
            for (Eigen::Index i = 0; i < w_.size(); ++i) put(out, w_(i));
            put(out, b_);
            break;
        case PredictorKind::Mlp:
            out << W1_.cols() << '\n';
            for (Eigen::Index i = 0; i < W1_.rows(); ++i)
                for (Eigen::Index j = 0; j < W1_.cols(); ++j) put(out, W1_(i, j));
            for (Eigen::Index j = 0; j < b1_.size(); ++j) put(out, b1_(j));
            for (Eigen::Index j = 0; j < w2_.size(); ++j) put(out, w2_(j));
            put(out, b2_);
            break;
        case PredictorKind::BoostedStumps:
            out << stumps_.size() << '\n';
            put(out, base_score_);
            for (const Stump& s : stumps_) {
                out << s.feature << '\n';
                put(out, s.threshold);
                put(out, s.left);
                put(out, s.right);
            }
            break;
    }
}

Predictor Predictor::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("model file not found: " + path);
    std::string magic;
    std::getline(in, magic);
    if (magic != kMagic)
        throw ValidationError("model file has wrong magic header: " + path);
    std::string kind_str;
    in >> kind_str;
    Predictor m;
    m.kind_ = predictor_kind_from_string(kind_str);
    m.input_width_ = take_int(in);
    switch (m.kind_) {
        case PredictorKind::Logistic: {
            m.w_ = Eigen::VectorXd(m.input_width_);
            for (int i = 0; i < m.input_width_; ++i) m.w_(i) = take(in);
            m.b_ = take(in);
            break;
        }
        case PredictorKind::Mlp: {
            const int h = take_int(in);
            m.W1_ = Eigen::MatrixXd(m.input_width_, h);
            for (int i = 0; i < m.input_width_; ++i)
                for (int j = 0; j < h; ++j) m.W1_(i, j) = take(in);
            m.b1_ = Eigen::VectorXd(h);
            for (int j = 0; j < h; ++j) m.b1_(j) = take(in);
            m.w2_ = Eigen::VectorXd(h);
            for (int j = 0; j < h; ++j) m.w2_(j) = take(in);
            m.b2_ = take(in);
            break;
        }
        case PredictorKind::BoostedStumps: {
            const int count = take_int(in);
            m.base_score_ = take(in);
            for (int t = 0; t < count; ++t) {
                Stump s;
                s.feature = take_int(in);
                s.threshold = take(in);
                s.left = take(in);
                s.right = take(in);
                m.stumps_.push_back(s);
            }
            break;
        }
    }
    return m;
}

}  // namespace cola
