#include "cola/refine.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace cola {

ValueMode value_mode_from_string(const std::string& s) {
    if (s == "max") return ValueMode::Max;
    if (s == "avg") return ValueMode::Avg;
    throw ValidationError("unknown value mode: " + s);
}

SelectPolicy select_policy_from_string(const std::string& s) {
    if (s == "sample") return SelectPolicy::Sample;
    if (s == "topk") return SelectPolicy::TopK;
    throw ValidationError("unknown selection policy: " + s);
}

MethodId method_from_string(const std::string& s) {
    if (s == "RB-p_Uni") return MethodId::RbPUni;
    if (s == "RB-p_OT") return MethodId::RbPOt;
    if (s == "CF-p_Uni") return MethodId::CfPUni;
    if (s == "CF-p_Rnd") return MethodId::CfPRnd;
    if (s == "CF-p_OT") return MethodId::CfPOt;
    if (s == "CF-p_Ect") return MethodId::CfPEct;
    throw ValidationError("unknown method id: " + s);
}

std::string to_string(MethodId id) {
    switch (id) {
        case MethodId::RbPUni: return "RB-p_Uni";
        case MethodId::RbPOt: return "RB-p_OT";
        case MethodId::CfPUni: return "CF-p_Uni";
        case MethodId::CfPRnd: return "CF-p_Rnd";
        case MethodId::CfPOt: return "CF-p_OT";
        case MethodId::CfPEct: return "CF-p_Ect";
    }
    return "?";
}

Eigen::MatrixXd compose_values(ValueMode mode, const Eigen::MatrixXd& r,
                               const CouplingMatrix& coupling, const FeatureSchema& schema) {
    const int n = static_cast<int>(coupling.p.rows());
    const int m = static_cast<int>(coupling.p.cols());
    Eigen::MatrixXd q(n, r.cols());
    for (int i = 0; i < n; ++i) {
        if (mode == ValueMode::Max) {
            int best = 0;
            for (int j = 1; j < m; ++j)
                if (coupling.p(i, j) > coupling.p(i, best)) best = j;
            if (coupling.p(i, best) <= 0.0)
                throw std::runtime_error("compose_values: zero mass in row " + std::to_string(i));
            q.row(i) = r.row(best);
        } else {
            Eigen::VectorXd w = conditional_weights(coupling, i);
            q.row(i) = (w.transpose() * r);
            // Snap categorical blocks to the heaviest level's one-hot.
            for (int g = 0; g < schema.num_features(); ++g) {
                if (schema.columns()[g].kind != ColumnKind::Categorical) continue;
                const int off = schema.group_offset(g);
                const int width = schema.group_width(g);
                int best = 0;
                for (int k = 1; k < width; ++k)
                    if (q(i, off + k) > q(i, off + best)) best = k;
                q.row(i).segment(off, width).setZero();
                q(i, off + best) = 1.0;
            }
        }
    }
    return q;
}

Eigen::MatrixXi select_positions(const Eigen::MatrixXd& varphi, int C, std::uint64_t seed,
                                 SelectPolicy policy) {
    if (C < 0) throw ValidationError("select_positions: budget must be >= 0");
    const int n = static_cast<int>(varphi.rows());
    const int d = static_cast<int>(varphi.cols());
    Eigen::MatrixXi mask = Eigen::MatrixXi::Zero(n, d);
    if (C == 0) return mask;

    // (key, row-major index) per positive-mass cell.
    std::vector<std::pair<double, int>> ranked;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < d; ++k) {
            const double w = varphi(i, k);
            const double u = unit(rng);  // consumed row-major regardless of mass
            if (w <= 0.0) continue;
            const double key = policy == SelectPolicy::Sample ? std::pow(u, 1.0 / w) : w;
            ranked.emplace_back(key, i * d + k);
        }
    }
    const int take = std::min<int>(C, static_cast<int>(ranked.size()));
    std::partial_sort(ranked.begin(), ranked.begin() + take, ranked.end(),
                      [](const auto& a, const auto& b) {
                          if (a.first != b.first) return a.first > b.first;
                          return a.second < b.second;
                      });
    for (int t = 0; t < take; ++t)
        mask(ranked[t].second / d, ranked[t].second % d) = 1;
    return mask;
}

Eigen::MatrixXd apply_plan(const Eigen::MatrixXd& x, const Eigen::MatrixXi& mask,
                           const Eigen::MatrixXd& q, const FeatureSchema& schema) {
    if (x.rows() != q.rows() || x.cols() != q.cols() || mask.rows() != x.rows() ||
        mask.cols() != schema.num_features())
        throw ValidationError("apply_plan: shape mismatch");
    Eigen::MatrixXd z = x;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (int g = 0; g < schema.num_features(); ++g) {
            if (!mask(i, g)) continue;
            const int off = schema.group_offset(g);
            const int w = schema.group_width(g);
            z.row(i).segment(off, w) = q.row(i).segment(off, w);
        }
    }
    return z;
}

ColaState cola_prepare(const Predictor& model, const Eigen::MatrixXd& x, const CEResult& ce,
                       MethodId method, const FeatureSchema& schema, const ColaOptions& options,
                       std::uint64_t seed) {
    const int n = static_cast<int>(x.rows());
    const int m = ce.count();

    ColaState state;
    switch (method) {
        case MethodId::RbPUni:
        case MethodId::CfPUni:
            state.coupling = build_coupling(CouplingKind::Uniform, n, m);
            break;
        case MethodId::CfPRnd:
            state.coupling = build_coupling(CouplingKind::RandomMatch, n, m, nullptr, seed);
            break;
        case MethodId::RbPOt:
        case MethodId::CfPOt: {
            const Eigen::VectorXd mu = Eigen::VectorXd::Constant(n, 1.0 / n);
            const Eigen::VectorXd nu = Eigen::VectorXd::Constant(m, 1.0 / m);
            double coeff = options.entropic_coeff;
            if (coeff <= 0.0) coeff = 0.05 * median_squared_cost(x, ce.r);
            if (coeff <= 0.0) coeff = 1e-6;
            state.coupling = sinkhorn(x, ce.r, mu, nu, coeff, options.sinkhorn_tol,
                                      options.sinkhorn_max_iter);
            break;
        }
        case MethodId::CfPEct:
            if (!ce.pairing)
                throw ValidationError("CF-p_Ect requires a ce result with a pairing");
            state.coupling = build_coupling(CouplingKind::Exact, n, m, &*ce.pairing);
            break;
    }

    CharacteristicSpec spec;
    spec.model = &model;
    spec.x = &x;
    spec.r = &ce.r;
    spec.schema = &schema;
    switch (method) {
        case MethodId::RbPUni:
        case MethodId::RbPOt:
            if (!options.background)
                throw ValidationError("RB methods require a background dataset");
            spec.variant = ShapVariant::RbShap;
            spec.background = options.background;
            break;
        case MethodId::CfPUni:
        case MethodId::CfPRnd:
            spec.variant = ShapVariant::CfShap;
            for (int i = 0; i < n; ++i)
                spec.per_instance_weights.push_back(conditional_weights(state.coupling, i));
            break;
        case MethodId::CfPOt:
            spec.variant = ShapVariant::PShap;
            spec.coupling = &state.coupling;
            break;
        case MethodId::CfPEct:
            spec.variant = ShapVariant::BShap;
            spec.pairing = &*ce.pairing;
            break;
    }
    state.attribution = attribute_all(spec, options.estimator, seed);
    state.q = compose_values(options.value_mode, ce.r, state.coupling, schema);
    return state;
}

ActionPlan cola_select(const ColaState& state, const Eigen::MatrixXd& x, int C,
                       std::uint64_t seed, const FeatureSchema& schema,
                       const ColaOptions& options) {
    ActionPlan plan;
    plan.seed = seed;
    plan.mask = select_positions(state.attribution.varphi, C, seed, options.policy);
    plan.z = apply_plan(x, plan.mask, state.q, schema);
    plan.budget_used = plan.mask.sum();
    return plan;
}

ActionPlan cola(const Predictor& model, const Eigen::MatrixXd& x, const CEResult& ce,
                MethodId method, int C, std::uint64_t seed, const FeatureSchema& schema,
                const ColaOptions& options) {
    ColaState state = cola_prepare(model, x, ce, method, schema, options, seed);
    return cola_select(state, x, C, seed, schema, options);
}

}  // namespace cola
