#include "cola/baseline.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>

namespace cola {

std::vector<SubsetProfile> enumerate_profiles(const Predictor& model,
                                              const Eigen::MatrixXd& x,
                                              const Eigen::MatrixXd& q,
                                              const FeatureSchema& schema,
                                              double ystar_mean, int cap) {
    const int d = schema.num_features();
    if (d > cap)
        throw ValidationError("enumerate_profiles: " + std::to_string(d) +
                              " features exceeds the enumeration cap of " + std::to_string(cap));
    const int n = static_cast<int>(x.rows());
    const std::uint32_t count = 1u << d;

    std::vector<SubsetProfile> profiles(n);
    for (int i = 0; i < n; ++i) {
        profiles[i].instance = i;
        // Keep one entry per distinct g value, at the cheapest subset.
        std::map<double, ProfileEntry> best;
        for (std::uint32_t s = 0; s < count; ++s) {
            Eigen::RowVectorXd z = x.row(i);
            for (int g = 0; g < d; ++g) {
                if (!(s >> g & 1u)) continue;
                const int off = schema.group_offset(g);
                const int w = schema.group_width(g);
                z.segment(off, w) = q.row(i).segment(off, w);
            }
            ProfileEntry e;
            e.subset = s;
            e.cost = std::popcount(s);
            e.g = model.predict_row(z) - ystar_mean;
            auto [it, inserted] = best.emplace(e.g, e);
            if (!inserted && (e.cost < it->second.cost ||
                              (e.cost == it->second.cost && e.subset < it->second.subset)))
                it->second = e;
        }
        for (const auto& [g, e] : best) profiles[i].entries.push_back(e);
        std::sort(profiles[i].entries.begin(), profiles[i].entries.end(),
                  [](const ProfileEntry& a, const ProfileEntry& b) {
                      if (a.cost != b.cost) return a.cost < b.cost;
                      return a.subset < b.subset;
                  });
    }
    return profiles;
}

namespace {

struct SuffixBounds {
    // lo/hi[t][b]: extreme reachable sums over instances t.. with budget <= b.
    std::vector<std::vector<double>> lo, hi;
};

SuffixBounds suffix_bounds(const std::vector<SubsetProfile>& profiles, int C) {
    const int n = static_cast<int>(profiles.size());
    SuffixBounds sb;
    sb.lo.assign(n + 1, std::vector<double>(C + 1, 0.0));
    sb.hi.assign(n + 1, std::vector<double>(C + 1, 0.0));
    for (int t = n - 1; t >= 0; --t) {
        for (int b = 0; b <= C; ++b) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -std::numeric_limits<double>::infinity();
            for (const ProfileEntry& e : profiles[t].entries) {
                if (e.cost > b) continue;
                lo = std::min(lo, e.g + sb.lo[t + 1][b - e.cost]);
                hi = std::max(hi, e.g + sb.hi[t + 1][b - e.cost]);
            }
            sb.lo[t][b] = lo;
            sb.hi[t][b] = hi;
        }
    }
    return sb;
}

void dfs(const std::vector<SubsetProfile>& profiles, const SuffixBounds& sb, int t,
         int budget, double partial, std::vector<std::uint32_t>& chosen,
         BaselineSolution& best) {
    const int n = static_cast<int>(profiles.size());
    if (t == n) {
        const double obj = std::abs(partial);
        if (obj < best.objective) {
            best.objective = obj;
            best.chosen = chosen;
        }
        return;
    }
    const double lo = partial + sb.lo[t][budget];
    const double hi = partial + sb.hi[t][budget];
    const double bound = lo > 0.0 ? lo : (hi < 0.0 ? -hi : 0.0);
    if (bound >= best.objective) return;  // first-found incumbent wins ties
    for (const ProfileEntry& e : profiles[t].entries) {
        if (e.cost > budget) continue;
        chosen[t] = e.subset;
        dfs(profiles, sb, t + 1, budget - e.cost, partial + e.g, chosen, best);
    }
}

}  // namespace

BaselineSolution solve_min_abs_sum(const std::vector<SubsetProfile>& profiles, int C) {
    if (profiles.empty())
        throw ValidationError("solve_min_abs_sum: no profiles");
    for (const SubsetProfile& p : profiles)
        if (p.entries.empty() || p.entries.front().cost != 0)
            throw ValidationError("solve_min_abs_sum: profile lacks the empty-subset entry");
    SuffixBounds sb = suffix_bounds(profiles, C);
    BaselineSolution best;
    best.objective = std::numeric_limits<double>::infinity();
    std::vector<std::uint32_t> chosen(profiles.size(), 0);
    dfs(profiles, sb, 0, C, 0.0, chosen, best);
    return best;
}

BaselineSolution exhaustive_oracle(const std::vector<SubsetProfile>& profiles, int C,
                                   std::uint64_t cap) {
    if (profiles.empty())
        throw ValidationError("exhaustive_oracle: no profiles");
    std::uint64_t combos = 1;
    for (const SubsetProfile& p : profiles) {
        combos *= static_cast<std::uint64_t>(p.entries.size());
        if (combos > cap)
            throw ValidationError("exhaustive_oracle: search space exceeds the cap");
    }
    const int n = static_cast<int>(profiles.size());
    BaselineSolution best;
    best.objective = std::numeric_limits<double>::infinity();
    std::vector<std::uint32_t> chosen(n, 0);
    std::vector<int> pick(n, 0);

    // Odometer over the Cartesian product of entries.
    while (true) {
        int cost = 0;
        double sum = 0.0;
        for (int t = 0; t < n; ++t) {
            const ProfileEntry& e = profiles[t].entries[pick[t]];
            cost += e.cost;
            sum += e.g;
        }
        if (cost <= C && std::abs(sum) < best.objective) {
            best.objective = std::abs(sum);
            for (int t = 0; t < n; ++t) chosen[t] = profiles[t].entries[pick[t]].subset;
            best.chosen = chosen;
        }
        int t = n - 1;
        while (t >= 0 && ++pick[t] == static_cast<int>(profiles[t].entries.size())) {
            pick[t] = 0;
            --t;
        }
        if (t < 0) break;
    }
    return best;
}

}  // namespace cola
