#include "cola/ce.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

namespace cola {

namespace {

std::vector<int> valid_pool_rows(const Predictor& model, const Eigen::MatrixXd& pool,
                                 int target_class) {
    Eigen::VectorXd p = model.predict(pool);
    std::vector<int> valid;
    for (Eigen::Index j = 0; j < pool.rows(); ++j) {
        const int cls = p(j) >= 0.5 ? 1 : 0;
        if (cls == target_class) valid.push_back(static_cast<int>(j));
    }
    return valid;
}

}  // namespace

CEResult knn_ce(const Predictor& model, const Eigen::MatrixXd& x,
                const Eigen::MatrixXd& pool, int target_class, int k) {
    if (k < 1) throw ValidationError("knn_ce: k must be >= 1");
    std::vector<int> valid = valid_pool_rows(model, pool, target_class);
    if (static_cast<int>(valid.size()) < k)
        throw ValidationError("knn_ce: pool has " + std::to_string(valid.size()) +
                              " valid points, need " + std::to_string(k));
    const int n = static_cast<int>(x.rows());
    CEResult ce;
    ce.target_class = target_class;
    ce.source = CESource::Knn;
    ce.r = Eigen::MatrixXd(n * k, x.cols());
    std::vector<int> pairing(n);
    for (int i = 0; i < n; ++i) {
        std::vector<std::pair<double, int>> dist;
        dist.reserve(valid.size());
        for (int j : valid)
            dist.emplace_back((x.row(i) - pool.row(j)).squaredNorm(), j);
        std::stable_sort(dist.begin(), dist.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        for (int t = 0; t < k; ++t) ce.r.row(i * k + t) = pool.row(dist[t].second);
        pairing[i] = i * k;  // nearest of the k
    }
    ce.pairing = std::move(pairing);
    return ce;
}

CEResult sample_ce(const Predictor& model, const Eigen::MatrixXd& pool,
                   int target_class, int m, std::uint64_t seed) {
    std::vector<int> valid = valid_pool_rows(model, pool, target_class);
    if (static_cast<int>(valid.size()) < m)
        throw ValidationError("sample_ce: pool has " + std::to_string(valid.size()) +
                              " valid points, need " + std::to_string(m));
    std::mt19937_64 rng(seed);
    std::shuffle(valid.begin(), valid.end(), rng);
    CEResult ce;
    ce.target_class = target_class;
    ce.source = CESource::Sample;
    ce.r = Eigen::MatrixXd(m, pool.cols());
    for (int j = 0; j < m; ++j) ce.r.row(j) = pool.row(valid[j]);
    return ce;
}

CEResult load_external_ce(const std::string& path, const FeatureSchema& schema,
                          const EncodingStats& stats, const Predictor& model,
                          int target_class) {
    std::vector<int> pairing;
    DataTable table = load_csv(path, schema, "pairing", &pairing);
    EncodedMatrix encoded = encode(table, stats, schema);

    CEResult ce;
    ce.target_class = target_class;
    ce.source = CESource::External;
    ce.r = encoded.values;
    if (!pairing.empty()) {
        for (int v : pairing)
            if (v < 0 || v >= ce.count())
                throw ValidationError("external ce: pairing index " + std::to_string(v) +
                                      " out of range");
        ce.pairing = std::move(pairing);
    }

    Eigen::VectorXd p = model.predict(ce.r);
    std::vector<int> bad;
    for (Eigen::Index j = 0; j < p.size(); ++j)
        if ((p(j) >= 0.5 ? 1 : 0) != target_class) bad.push_back(static_cast<int>(j));
    if (!bad.empty()) {
        std::ostringstream msg;
        msg << "external ce: " << bad.size() << " row(s) not predicted as class "
            << target_class << " (rows";
        for (int j : bad) msg << ' ' << j;
        msg << ')';
        throw ValidationError(msg.str());
    }
    return ce;
}

void check_validity(const Predictor& model, const CEResult& ce) {
    Eigen::VectorXd p = model.predict(ce.r);
    for (Eigen::Index j = 0; j < p.size(); ++j)
        if ((p(j) >= 0.5 ? 1 : 0) != ce.target_class)
            throw ValidationError("ce row " + std::to_string(j) +
                                  " fails the target-class check");
}

}  // namespace cola
