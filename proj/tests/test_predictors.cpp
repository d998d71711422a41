#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "cola/predictor.hpp"

using namespace cola;

namespace {

std::pair<Eigen::MatrixXd, Eigen::VectorXi> two_gaussians(int n, int d, double sep,
                                                          std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd X(n, d);
    Eigen::VectorXi y(n);
    for (int i = 0; i < n; ++i) {
        y(i) = i % 2;
        const double center = (y(i) == 0 ? -0.5 : 0.5) * sep;
        for (int k = 0; k < d; ++k) X(i, k) = center + gauss(rng);
    }
    return {X, y};
}

// Independent from-scratch logistic trainer: plain gradient descent on the
// mean log loss, no shared code with the library path.
std::pair<Eigen::VectorXd, double> oracle_logistic(const Eigen::MatrixXd& X,
                                                   const Eigen::VectorXi& y, double lr,
                                                   int iters) {
    const int n = static_cast<int>(X.rows());
    const int d = static_cast<int>(X.cols());
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
    double b = 0.0;
    for (int it = 0; it < iters; ++it) {
        Eigen::VectorXd gw = Eigen::VectorXd::Zero(d);
        double gb = 0.0;
        for (int i = 0; i < n; ++i) {
            const double p = 1.0 / (1.0 + std::exp(-(X.row(i).dot(w.transpose()) + b)));
            const double err = p - y(i);
            gw += err * X.row(i).transpose();
            gb += err;
        }
        w -= lr * gw / n;
        b -= lr * gb / n;
    }
    return {w, b};
}

}  // namespace

TEST_CASE("logistic matches the from-scratch oracle and separates the blobs") {
    auto [X, y] = two_gaussians(200, 2, 4.0, 17);
    Predictor m = train(PredictorKind::Logistic, X, y, {{"lr", 0.5}, {"iters", 500}});
    auto [w, b] = oracle_logistic(X, y, 0.5, 500);
    CHECK((m.weights() - w).norm() < 1e-9);
    CHECK(m.bias() == doctest::Approx(b).epsilon(1e-12));
    CHECK(training_accuracy(m, X, y) >= 0.95);
}

TEST_CASE("mlp learns the xor arrangement") {
    // Four clusters, labels in xor pattern: not linearly separable.
    std::mt19937_64 rng(3);
    std::normal_distribution<double> noise(0.0, 0.2);
    Eigen::MatrixXd X(200, 2);
    Eigen::VectorXi y(200);
    for (int i = 0; i < 200; ++i) {
        const int cx = (i / 2) % 2, cy = i % 2;
        X(i, 0) = (cx ? 1.0 : -1.0) + noise(rng);
        X(i, 1) = (cy ? 1.0 : -1.0) + noise(rng);
        y(i) = cx ^ cy;
    }
    Predictor linear = train(PredictorKind::Logistic, X, y);
    CHECK(training_accuracy(linear, X, y) < 0.7);

    Predictor mlp = train(PredictorKind::Mlp, X, y, {{"hidden", 16}}, 1);
    CHECK(training_accuracy(mlp, X, y) >= 0.9);
}

TEST_CASE("boosted stumps fit a nonlinear boundary") {
    auto [X, y] = two_gaussians(200, 3, 3.0, 23);
    Predictor m = train(PredictorKind::BoostedStumps, X, y);
    CHECK(training_accuracy(m, X, y) >= 0.9);
}

TEST_CASE("train rejects bad labels") {
    auto [X, y] = two_gaussians(20, 2, 1.0, 1);
    Eigen::VectorXi zeros = Eigen::VectorXi::Zero(20);
    CHECK_THROWS_AS(train(PredictorKind::Logistic, X, zeros), ValidationError);
    Eigen::VectorXi short_y = y.head(10);
    CHECK_THROWS_AS(train(PredictorKind::Logistic, X, short_y), ValidationError);
}

TEST_CASE("logistic predictions follow the closed form") {
    Predictor zero = Predictor::make_logistic(Eigen::VectorXd::Zero(3), 0.0);
    Eigen::MatrixXd X = Eigen::MatrixXd::Random(5, 3);
    Eigen::VectorXd p = zero.predict(X);
    for (int i = 0; i < 5; ++i) CHECK(p(i) == 0.5);

    Eigen::VectorXd w(2);
    w << 1.5, -2.0;
    Predictor m = Predictor::make_logistic(w, 0.25);
    Eigen::RowVectorXd x(2);
    x << 0.3, 0.7;
    const double expected = 1.0 / (1.0 + std::exp(-(1.5 * 0.3 - 2.0 * 0.7 + 0.25)));
    CHECK(m.predict_row(x) == doctest::Approx(expected).epsilon(1e-15));

    Eigen::VectorXd p1 = m.predict(X.leftCols(2));
    Eigen::VectorXd p2 = m.predict(X.leftCols(2));
    CHECK((p1 - p2).cwiseAbs().maxCoeff() == 0.0);   // bit-identical
    CHECK_THROWS_AS(m.predict(X), ValidationError);  // width mismatch
}

TEST_CASE("outputs stay within [0,1] for random inputs") {
    auto [X, y] = two_gaussians(60, 4, 2.0, 5);
    for (PredictorKind kind :
         {PredictorKind::Logistic, PredictorKind::Mlp, PredictorKind::BoostedStumps}) {
        Predictor m = train(kind, X, y, {}, 2);
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> wide(-50.0, 50.0);
        Eigen::MatrixXd probe(40, 4);
        for (int i = 0; i < probe.size(); ++i) probe.data()[i] = wide(rng);
        Eigen::VectorXd p = m.predict(probe);
        CHECK((p.array() >= 0.0).all());
        CHECK((p.array() <= 1.0).all());
    }
}

TEST_CASE("save/load round trip is bit-exact") {
    auto [X, y] = two_gaussians(80, 3, 2.5, 9);
    Eigen::MatrixXd probe = Eigen::MatrixXd::Random(10, 3);
    for (PredictorKind kind :
         {PredictorKind::Logistic, PredictorKind::Mlp, PredictorKind::BoostedStumps}) {
        Predictor m = train(kind, X, y, {}, 4);
        const std::string path = "/tmp/model_" + to_string(kind) + ".txt";
        m.save(path);
        Predictor loaded = Predictor::load(path);
        CHECK((m.predict(probe) - loaded.predict(probe)).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("load rejects corrupt files") {
    auto [X, y] = two_gaussians(20, 2, 2.0, 9);
    Predictor m = train(PredictorKind::Logistic, X, y);
    m.save("/tmp/model_trunc.txt");
    // truncate
    {
        std::ifstream in("/tmp/model_trunc.txt");
        std::string content((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
        std::ofstream out("/tmp/model_trunc.txt");
        out << content.substr(0, content.size() / 2);
    }
    CHECK_THROWS_AS(Predictor::load("/tmp/model_trunc.txt"), ValidationError);

    std::ofstream bad("/tmp/model_bad_magic.txt");
    bad << "NOT-A-MODEL\nlogistic\n2\n";
    bad.close();
    CHECK_THROWS_AS(Predictor::load("/tmp/model_bad_magic.txt"), ValidationError);
}

TEST_CASE("logistic lipschitz constant") {
    Eigen::VectorXd w(2);
    w << 3.0, 4.0;
    Predictor m = Predictor::make_logistic(w, 0.0);
    CHECK(m.lipschitz_constant() == doctest::Approx(1.25));
}
