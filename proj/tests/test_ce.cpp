#include <doctest.h>

#include <fstream>
#include <set>

#include "cola/ce.hpp"

using namespace cola;

namespace {

// w = (1, 0): class 1 iff x0 >= 0
Predictor axis_model() {
    Eigen::VectorXd w(2);
    w << 1.0, 0.0;
    return Predictor::make_logistic(w, 0.0);
}

FeatureSchema two_numeric() {
    return FeatureSchema({{"a", ColumnKind::Numeric, {}}, {"b", ColumnKind::Numeric, {}}},
                         "y");
}

EncodingStats identity_stats() {
    EncodingStats s;
    s.mean = {0.0, 0.0};
    s.stddev = {1.0, 1.0};
    s.constant = {false, false};
    return s;
}

std::string write_temp(const std::string& name, const std::string& content) {
    std::string path = std::string("/tmp/") + name;
    std::ofstream out(path);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("knn_ce picks the nearest valid pool point") {
    Predictor model = axis_model();
    Eigen::MatrixXd x(1, 2);
    x << -1.0, 0.0;
    Eigen::MatrixXd pool(3, 2);
    pool << 1, 0,   // valid, distance 1
        3, 0,       // valid, distance 3
        -2, 0;      // predicted class 0, excluded
    CEResult ce = knn_ce(model, x, pool, 1, 1);
    REQUIRE(ce.count() == 1);
    CHECK(ce.r(0, 0) == 1.0);
    REQUIRE(ce.pairing.has_value());
    CHECK((*ce.pairing)[0] == 0);
    check_validity(model, ce);
}

TEST_CASE("knn_ce maps factuals already in the target class too") {
    Predictor model = axis_model();
    Eigen::MatrixXd x(2, 2);
    x << 5.0, 0.0,  // already class 1
        -1.0, 0.0;
    Eigen::MatrixXd pool(2, 2);
    pool << 2, 0, 4, 0;
    CEResult ce = knn_ce(model, x, pool, 1, 1);
    CHECK(ce.r(0, 0) == 4.0);  // nearest to 5, not itself
    CHECK(ce.r(1, 0) == 2.0);
}

TEST_CASE("knn_ce with k > 1 returns n*k rows with pairing to the nearest") {
    Predictor model = axis_model();
    Eigen::MatrixXd x(2, 2);
    x << 0.1, 0.0, 9.0, 0.0;
    Eigen::MatrixXd pool(4, 2);
    pool << 1, 0, 3, 0, 8, 0, -5, 0;
    CEResult ce = knn_ce(model, x, pool, 1, 2);
    REQUIRE(ce.count() == 4);
    CHECK(ce.r(0, 0) == 1.0);
    CHECK(ce.r(1, 0) == 3.0);
    CHECK(ce.r(2, 0) == 8.0);
    CHECK(ce.r(3, 0) == 3.0);
    CHECK(*ce.pairing == std::vector<int>{0, 2});
}

TEST_CASE("knn_ce errors without enough valid points") {
    Predictor model = axis_model();
    Eigen::MatrixXd x(1, 2);
    x << 0, 0;
    Eigen::MatrixXd pool(2, 2);
    pool << -1, 0, -2, 0;  // no valid points
    CHECK_THROWS_AS(knn_ce(model, x, pool, 1, 1), ValidationError);
    CHECK_THROWS_AS(knn_ce(model, x, pool, 1, 0), ValidationError);
}

TEST_CASE("sample_ce draws without replacement, deterministically") {
    Predictor model = axis_model();
    Eigen::MatrixXd pool(5, 2);
    pool << 1, 0, 2, 0, 3, 0, -1, 0, -2, 0;

    CEResult all = sample_ce(model, pool, 1, 3, 7);
    REQUIRE(all.count() == 3);
    CHECK_FALSE(all.pairing.has_value());
    std::multiset<double> got{all.r(0, 0), all.r(1, 0), all.r(2, 0)};
    CHECK(got == std::multiset<double>{1.0, 2.0, 3.0});  // exhausts the valid set
    check_validity(model, all);

    CEResult again = sample_ce(model, pool, 1, 3, 7);
    CHECK((all.r - again.r).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(sample_ce(model, pool, 1, 4, 7), ValidationError);
}

TEST_CASE("load_external_ce accepts valid files") {
    Predictor model = axis_model();
    std::string path = write_temp("ce_ok.csv",
                                  "a,b,y\n"
                                  "1.5,0.0,1\n"
                                  "2.5,1.0,1\n");
    CEResult ce = load_external_ce(path, two_numeric(), identity_stats(), model, 1);
    CHECK(ce.source == CESource::External);
    CHECK(ce.count() == 2);
    CHECK(ce.r(1, 0) == 2.5);
    CHECK_FALSE(ce.pairing.has_value());
}

TEST_CASE("load_external_ce parses a pairing column") {
    Predictor model = axis_model();
    std::string path = write_temp("ce_pair.csv",
                                  "a,b,pairing,y\n"
                                  "1.5,0.0,1,1\n"
                                  "2.5,1.0,0,1\n");
    CEResult ce = load_external_ce(path, two_numeric(), identity_stats(), model, 1);
    REQUIRE(ce.pairing.has_value());
    CHECK(*ce.pairing == std::vector<int>{1, 0});

    std::string bad = write_temp("ce_pair_bad.csv",
                                 "a,b,pairing,y\n"
                                 "1.5,0.0,9,1\n");
    CHECK_THROWS_AS(load_external_ce(bad, two_numeric(), identity_stats(), model, 1),
                    ValidationError);
}

TEST_CASE("load_external_ce rejects invalid rows naming their indices") {
    Predictor model = axis_model();
    std::string path = write_temp("ce_invalid.csv",
                                  "a,b,y\n"
                                  "1.5,0.0,1\n"
                                  "-3.0,0.0,1\n"
                                  "2.0,0.0,1\n");
    CHECK_THROWS_WITH_AS(
        load_external_ce(path, two_numeric(), identity_stats(), model, 1),
        doctest::Contains("1"), ValidationError);
}

TEST_CASE("check_validity flags wrong-class rows") {
    Predictor model = axis_model();
    CEResult ce;
    ce.target_class = 1;
    ce.r = Eigen::MatrixXd(2, 2);
    ce.r << 1, 0, -1, 0;
    CHECK_THROWS_AS(check_validity(model, ce), ValidationError);
    ce.r << 1, 0, 2, 0;
    CHECK_NOTHROW(check_validity(model, ce));
}
