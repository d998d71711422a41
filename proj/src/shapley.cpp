#include "cola/shapley.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace cola {

void CharacteristicSpec::check() const {
    if (!model || !x || !schema)
        throw ValidationError("characteristic spec: model, x, and schema are required");
    switch (variant) {
        case ShapVariant::BShap:
            if (!r || !pairing)
                throw ValidationError("b-shap requires r and a pairing");
            if (static_cast<int>(pairing->size()) != x->rows())
                throw ValidationError("b-shap pairing must be total on factual rows");
            break;
        case ShapVariant::RbShap:
            if (!background || background->rows() == 0)
                throw ValidationError("rb-shap requires a nonempty background");
            break;
        case ShapVariant::CfShap:
            if (!r || static_cast<int>(per_instance_weights.size()) != x->rows())
                throw ValidationError("cf-shap requires r and one weight vector per instance");
            break;
        case ShapVariant::PShap:
            if (!r || !coupling)
                throw ValidationError("p-shap requires r and a coupling");
            break;
    }
}

namespace {

// Reference rows, weights, and the S-independent baseline term for one
// instance. Zero-weight rows are dropped from the support.
struct ReferenceSet {
    Eigen::MatrixXd rows;     // support x d
    Eigen::VectorXd weights;  // sums to 1
    double baseline = 0.0;
};

ReferenceSet make_reference(const CharacteristicSpec& spec, int i) {
    ReferenceSet ref;
    switch (spec.variant) {
        case ShapVariant::BShap: {
            const int j = (*spec.pairing)[i];
            ref.rows = spec.r->row(j);
            ref.weights = Eigen::VectorXd::Ones(1);
            ref.baseline = spec.model->predict_row(spec.r->row(j));
            return ref;
        }
        case ShapVariant::RbShap: {
            ref.rows = *spec.background;
            const int m = static_cast<int>(ref.rows.rows());
            ref.weights = Eigen::VectorXd::Constant(m, 1.0 / m);
            ref.baseline = spec.model->predict(ref.rows).mean();
            return ref;
        }
        case ShapVariant::CfShap:
        case ShapVariant::PShap: {
            Eigen::VectorXd w = spec.variant == ShapVariant::CfShap
                                    ? spec.per_instance_weights[i]
                                    : conditional_weights(*spec.coupling, i);
            Eigen::VectorXd fr = spec.model->predict(*spec.r);
            // The baseline expectation is over the marginal of r: the
            // weights themselves for CF, the column marginal for P.
            const Eigen::VectorXd& marginal =
                spec.variant == ShapVariant::CfShap ? w : spec.coupling->nu;
            ref.baseline = marginal.dot(fr);
            std::vector<int> support;
            for (Eigen::Index j = 0; j < w.size(); ++j)
                if (w(j) > 0.0) support.push_back(static_cast<int>(j));
            ref.rows = Eigen::MatrixXd(support.size(), spec.r->cols());
            ref.weights = Eigen::VectorXd(support.size());
            for (size_t t = 0; t < support.size(); ++t) {
                ref.rows.row(t) = spec.r->row(support[t]);
                ref.weights(t) = w(support[t]);
            }
            return ref;
        }
    }
    throw std::logic_error("unreachable");
}

// Evaluates v(S) for every subset bitmask at once; the per-subset blend
// keeps x_i on the groups in S and the reference row elsewhere.
class CharEvaluator {
public:
    CharEvaluator(const CharacteristicSpec& spec, int i)
        : spec_(spec), ref_(make_reference(spec, i)), xi_(spec.x->row(i)) {}

    double value(std::uint32_t subset) const {
        const FeatureSchema& schema = *spec_.schema;
        Eigen::MatrixXd blend = ref_.rows;
        for (int g = 0; g < schema.num_features(); ++g) {
            if (!(subset >> g & 1u)) continue;
            const int off = schema.group_offset(g);
            const int w = schema.group_width(g);
            blend.middleCols(off, w).rowwise() = xi_.segment(off, w);
        }
        return ref_.weights.dot(spec_.model->predict(blend)) - ref_.baseline;
    }

private:
    const CharacteristicSpec& spec_;
    ReferenceSet ref_;
    Eigen::RowVectorXd xi_;
};

double binomial(int n, int k) {
    double result = 1.0;
    for (int t = 1; t <= k; ++t) result *= static_cast<double>(n - t + 1) / t;
    return result;
}

}  // namespace

double char_value(const CharacteristicSpec& spec, int i, std::uint32_t subset) {
    spec.check();
    return CharEvaluator(spec, i).value(subset);
}

double grand_minus_null(const CharacteristicSpec& spec, int i) {
    spec.check();
    CharEvaluator eval(spec, i);
    const std::uint32_t full = (1u << spec.num_features()) - 1u;
    return eval.value(full) - eval.value(0u);
}

Eigen::VectorXd exact_shapley(const CharacteristicSpec& spec, int i, int cap) {
    spec.check();
    const int d = spec.num_features();
    if (d > cap)
        throw ValidationError("exact_shapley: " + std::to_string(d) +
                              " features exceeds the enumeration cap of " + std::to_string(cap));
    CharEvaluator eval(spec, i);
    const std::uint32_t count = 1u << d;
    std::vector<double> v(count);
    for (std::uint32_t s = 0; s < count; ++s) v[s] = eval.value(s);

    std::vector<double> inv_binom(d);
    for (int s = 0; s < d; ++s) inv_binom[s] = 1.0 / binomial(d - 1, s);

    Eigen::VectorXd phi = Eigen::VectorXd::Zero(d);
    for (int k = 0; k < d; ++k) {
        const std::uint32_t bit = 1u << k;
        double acc = 0.0;
        for (std::uint32_t s = 0; s < count; ++s) {
            if (s & bit) continue;
            acc += inv_binom[std::popcount(s)] * (v[s | bit] - v[s]);
        }
        phi(k) = acc / d;
    }
    return phi;
}

Eigen::VectorXd sampled_shapley(const CharacteristicSpec& spec, int i, int m_shap,
                                std::uint64_t seed) {
    spec.check();
    const int d = spec.num_features();
    if (m_shap < 2 * d + 2)
        throw ValidationError("sampled_shapley: m_shap must be >= 2|F| + 2");
    if (d == 1) return exact_shapley(spec, i);

    CharEvaluator eval(spec, i);
    const std::uint32_t full = (1u << d) - 1u;
    const double v0 = eval.value(0u);
    const double vF = eval.value(full);
    const double total = vF - v0;

    // Draw subset sizes proportional to the Shapley kernel mass per size,
    // then a uniform subset of that size; each draw also contributes its
    // complement. Duplicates accumulate as frequency weights.
    std::vector<double> size_mass(d - 1);
    for (int s = 1; s < d; ++s) size_mass[s - 1] = 1.0 / (s * (d - s));
    std::mt19937_64 rng(seed);
    std::discrete_distribution<int> pick_size(size_mass.begin(), size_mass.end());
    std::vector<int> perm(d);
    std::iota(perm.begin(), perm.end(), 0);

    std::map<std::uint32_t, int> counts;
    const int pairs = (m_shap - 2) / 2;
    for (int t = 0; t < pairs; ++t) {
        const int s = pick_size(rng) + 1;
        std::shuffle(perm.begin(), perm.end(), rng);
        std::uint32_t mask = 0;
        for (int a = 0; a < s; ++a) mask |= 1u << perm[a];
        counts[mask] += 1;
        counts[full ^ mask] += 1;
    }

    // Weighted least squares on y = v(S) - v0 - z_d * total against the
    // first d-1 coefficients; the last one is fixed by efficiency.
    const int nvars = d - 1;
    Eigen::MatrixXd ata = Eigen::MatrixXd::Zero(nvars, nvars);
    Eigen::VectorXd atb = Eigen::VectorXd::Zero(nvars);
    for (const auto& [mask, count] : counts) {
        const double w = static_cast<double>(count);
        const double zd = (mask >> (d - 1)) & 1u ? 1.0 : 0.0;
        Eigen::VectorXd row(nvars);
        for (int k = 0; k < nvars; ++k)
            row(k) = ((mask >> k & 1u) ? 1.0 : 0.0) - zd;
        const double y = eval.value(mask) - v0 - zd * total;
        ata.noalias() += w * row * row.transpose();
        atb.noalias() += w * row * y;
    }

    Eigen::LDLT<Eigen::MatrixXd> solver(ata);
    if (solver.info() != Eigen::Success || solver.isNegative()) {
        if (d <= 12) return exact_shapley(spec, i);  // degenerate system
        throw std::runtime_error("sampled_shapley: degenerate regression system");
    }
    Eigen::VectorXd head = solver.solve(atb);
    Eigen::VectorXd phi(d);
    phi.head(nvars) = head;
    phi(d - 1) = total - head.sum();
    return phi;
}

AttributionMatrix attribute_all(const CharacteristicSpec& spec,
                                const EstimatorConfig& config, std::uint64_t seed) {
    spec.check();
    const int n = static_cast<int>(spec.x->rows());
    const int d = spec.num_features();
    AttributionMatrix out;
    out.phi = Eigen::MatrixXd(n, d);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd phi =
            config.estimator == ShapEstimator::Exact
                ? exact_shapley(spec, i, config.exact_cap)
                : sampled_shapley(spec, i, config.m_shap, seed + static_cast<std::uint64_t>(i));
        out.phi.row(i) = phi.transpose();
    }
    const double norm = out.phi.cwiseAbs().sum();
    if (norm > 0.0) {
        out.varphi = out.phi.cwiseAbs() / norm;
    } else {
        out.varphi = Eigen::MatrixXd::Constant(n, d, 1.0 / (static_cast<double>(n) * d));
    }
    return out;
}

}  // namespace cola
