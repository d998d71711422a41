#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "cola/coupling.hpp"
#include "cola/predictor.hpp"

using namespace cola;

namespace {

Eigen::MatrixXd random_matrix(int n, int d, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, scale);
    Eigen::MatrixXd X(n, d);
    for (int i = 0; i < X.size(); ++i) X.data()[i] = gauss(rng);
    return X;
}

// Brute-force minimum permutation cost, fully independent of solve_assignment.
double brute_force_min_cost(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double c = 0.0;
        for (int i = 0; i < n; ++i) c += cost(i, perm[i]);
        best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace

TEST_CASE("build_coupling constructors") {
    CouplingMatrix u = build_coupling(CouplingKind::Uniform, 2, 2);
    CHECK(u.p(0, 0) == 0.25);
    CHECK(u.p(1, 1) == 0.25);
    u.validate();

    std::vector<int> pairing{1, 0};
    CouplingMatrix e = build_coupling(CouplingKind::Exact, 2, 2, &pairing);
    CHECK(e.p(0, 1) == 0.5);
    CHECK(e.p(1, 0) == 0.5);
    CHECK(e.p(0, 0) == 0.0);
    CHECK(e.matching.has_value());
    e.validate();

    CouplingMatrix r1 = build_coupling(CouplingKind::RandomMatch, 5, 3, nullptr, 77);
    CouplingMatrix r2 = build_coupling(CouplingKind::RandomMatch, 5, 3, nullptr, 77);
    CHECK((r1.p - r2.p).cwiseAbs().maxCoeff() == 0.0);
    r1.validate();
    // each factual row carries mass 1/n on a single column
    for (int i = 0; i < 5; ++i) {
        CHECK(r1.p.row(i).sum() == doctest::Approx(0.2));
        CHECK(r1.p.row(i).maxCoeff() == doctest::Approx(0.2));
    }

    CHECK_THROWS_AS(build_coupling(CouplingKind::Exact, 2, 2), ValidationError);
    std::vector<int> bad{0, 5};
    CHECK_THROWS_AS(build_coupling(CouplingKind::Exact, 2, 2, &bad), ValidationError);
}

TEST_CASE("coupling invariants hold for every constructor") {
    std::vector<int> pairing{2, 0, 1};
    for (auto c : {build_coupling(CouplingKind::Uniform, 3, 3),
                   build_coupling(CouplingKind::Exact, 3, 3, &pairing),
                   build_coupling(CouplingKind::RandomMatch, 3, 4, nullptr, 5)}) {
        CHECK((c.p.array() >= 0.0).all());
        CHECK(c.p.sum() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK((c.p.rowwise().sum() - c.mu).cwiseAbs().maxCoeff() < 1e-9);
        CHECK((c.p.colwise().sum().transpose() - c.nu).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("sinkhorn self-coupling has near-zero cost") {
    Eigen::MatrixXd x = random_matrix(6, 3, 11);
    const double coeff = 1e-3 * std::max(median_squared_cost(x, x), 1e-6);
    Eigen::VectorXd uni = Eigen::VectorXd::Constant(6, 1.0 / 6);
    CouplingMatrix c = sinkhorn(x, x, uni, uni, coeff, 1e-8, 100000);
    CHECK(c.converged);
    CHECK(c.transport_cost <= 1e-6);
    CHECK(c.p.diagonal().minCoeff() > 0.9 / 6);
    c.validate(1e-7);
}

TEST_CASE("sinkhorn 1-d two-point example approaches the identity matching") {
    // x={0,1}, r={1,2}: identity matching costs 1.0, the crossed one 2.0.
    Eigen::MatrixXd x(2, 1), r(2, 1);
    x << 0, 1;
    r << 1, 2;
    Eigen::VectorXd uni = Eigen::VectorXd::Constant(2, 0.5);
    CouplingMatrix c = sinkhorn(x, r, uni, uni, 0.01, 1e-10, 200000);
    CHECK(c.transport_cost == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(c.p(0, 0) > 0.49);
    CHECK(c.p(1, 1) > 0.49);
    // larger coefficient converges to tolerance quickly
    CouplingMatrix fat = sinkhorn(x, r, uni, uni, 0.5, 1e-10, 10000);
    CHECK(fat.converged);
    CHECK(fat.marginal_residual <= 1e-10);
}

TEST_CASE("sinkhorn converged runs respect the tolerance") {
    Eigen::MatrixXd x = random_matrix(8, 2, 21);
    Eigen::MatrixXd r = random_matrix(5, 2, 22);
    CouplingMatrix c = sinkhorn_default(x, r);
    CHECK(c.converged);
    CHECK(c.marginal_residual <= 1e-8);
    c.validate(1e-7);

    // starved iteration budget: still returns, flagged, residual reported
    Eigen::VectorXd mu = Eigen::VectorXd::Constant(8, 1.0 / 8);
    Eigen::VectorXd nu = Eigen::VectorXd::Constant(5, 1.0 / 5);
    CouplingMatrix starved =
        sinkhorn(x, r, mu, nu, 1e-4 * median_squared_cost(x, r), 1e-14, 3);
    CHECK_FALSE(starved.converged);
    CHECK(starved.marginal_residual > 1e-14);
    CHECK(starved.iterations == 3);
}

TEST_CASE("sinkhorn rejects bad inputs") {
    Eigen::MatrixXd x = random_matrix(3, 2, 1);
    Eigen::VectorXd uni = Eigen::VectorXd::Constant(3, 1.0 / 3);
    CHECK_THROWS_AS(sinkhorn(x, x, uni, uni, 0.0), ValidationError);
    Eigen::VectorXd bad = uni;
    bad(0) = -0.1;
    CHECK_THROWS_AS(sinkhorn(x, x, bad, uni, 1.0), ValidationError);
    Eigen::MatrixXd inf_x = x;
    inf_x(0, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(sinkhorn(inf_x, x, uni, uni, 1.0), ValidationError);
}

TEST_CASE("assignment_ot on the 1-d examples") {
    Eigen::MatrixXd x(2, 1), r(2, 1);
    x << 0, 1;
    r << 1, 2;
    CouplingMatrix c = assignment_ot(x, r);
    REQUIRE(c.matching.has_value());
    CHECK(*c.matching == std::vector<int>{0, 1});
    CHECK(c.transport_cost == doctest::Approx(1.0));

    CouplingMatrix self = assignment_ot(x, x);
    CHECK(*self.matching == std::vector<int>{0, 1});
    CHECK(self.transport_cost == 0.0);

    Eigen::MatrixXd wide = random_matrix(3, 1, 2);
    CHECK_THROWS_AS(assignment_ot(x, wide), ValidationError);
}

TEST_CASE("assignment_ot equals the brute-force permutation minimum") {
    for (int n = 2; n <= 6; ++n) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            Eigen::MatrixXd x = random_matrix(n, 3, 100 + seed);
            Eigen::MatrixXd r = random_matrix(n, 3, 200 + seed);
            CouplingMatrix c = assignment_ot(x, r);
            c.validate();
            Eigen::MatrixXd cost = squared_cost_matrix(x, r);
            CHECK(c.transport_cost * n == doctest::Approx(brute_force_min_cost(cost)));
        }
    }
}

TEST_CASE("assignment tie-breaking is lexicographic") {
    // all costs equal, every permutation optimal: identity must win
    Eigen::MatrixXd cost = Eigen::MatrixXd::Ones(4, 4);
    CHECK(solve_assignment(cost) == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("sinkhorn cost approaches assignment cost at small coefficient") {
    for (int n : {8, 32}) {
        Eigen::MatrixXd x = random_matrix(n, 4, 300 + n);
        Eigen::MatrixXd r = random_matrix(n, 4, 400 + n);
        CouplingMatrix exact = assignment_ot(x, r);
        Eigen::VectorXd uni = Eigen::VectorXd::Constant(n, 1.0 / n);
        const double coeff = 1e-3 * median_squared_cost(x, r);
        CouplingMatrix ent = sinkhorn(x, r, uni, uni, coeff, 1e-8, 5000);
        CHECK(ent.marginal_residual < 1e-3);
        CHECK(ent.transport_cost <= 1.02 * exact.transport_cost);
        CHECK(ent.transport_cost >= 0.98 * exact.transport_cost);
    }
}

TEST_CASE("lipschitz transport bound for a logistic model") {
    // |mean f(x) - mean f(r_matched)| <= L * sqrt(mean ||x_i - r_sigma(i)||^2)
    // which is the scalar W1 bound for paired samples.
    std::mt19937_64 rng(9);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd x = random_matrix(10, 3, 500 + trial);
        Eigen::MatrixXd r = random_matrix(10, 3, 600 + trial, 2.0);
        Eigen::VectorXd w(3);
        w << gauss(rng), gauss(rng), gauss(rng);
        Predictor m = Predictor::make_logistic(w, gauss(rng));
        const double L = m.lipschitz_constant();
        CouplingMatrix c = assignment_ot(x, r);
        Eigen::VectorXd fx = m.predict(x);
        Eigen::VectorXd fr = m.predict(r);
        double mean_fr = 0.0;
        for (int i = 0; i < 10; ++i) mean_fr += fr((*c.matching)[i]) / 10.0;
        CHECK(std::abs(fx.mean() - mean_fr) <= L * std::sqrt(c.transport_cost) + 1e-12);
    }
}

TEST_CASE("conditional_weights") {
    CouplingMatrix u = build_coupling(CouplingKind::Uniform, 3, 4);
    Eigen::VectorXd w = conditional_weights(u, 1);
    CHECK(w.size() == 4);
    CHECK((w.array() - 0.25).cwiseAbs().maxCoeff() < 1e-12);

    std::vector<int> pairing{2, 0, 1};
    CouplingMatrix e = build_coupling(CouplingKind::Exact, 3, 3, &pairing);
    Eigen::VectorXd one_hot = conditional_weights(e, 0);
    CHECK(one_hot(2) == 1.0);
    CHECK(one_hot(0) == 0.0);

    CouplingMatrix zero_row = u;
    zero_row.p.row(1).setZero();
    CHECK_THROWS_AS(conditional_weights(zero_row, 1), ValidationError);

    CouplingMatrix c = build_coupling(CouplingKind::Uniform, 1, 3);
    c.p << 0.2, 0.6, 0.2;
    Eigen::VectorXd already = conditional_weights(c, 0);
    CHECK(already(0) == doctest::Approx(0.2));
    CHECK(already(1) == doctest::Approx(0.6));
}
