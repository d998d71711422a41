#include "cola/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "cola/coupling.hpp"

namespace cola {

DivergenceKind divergence_from_string(const std::string& s) {
    if (s == "ot_w1") return DivergenceKind::OtW1;
    if (s == "entropic_ot") return DivergenceKind::EntropicOt;
    if (s == "mmd_rbf") return DivergenceKind::MmdRbf;
    if (s == "mean_d") return DivergenceKind::MeanD;
    if (s == "median_d") return DivergenceKind::MedianD;
    throw ValidationError("unknown divergence kind: " + s);
}

std::string to_string(DivergenceKind kind) {
    switch (kind) {
        case DivergenceKind::OtW1: return "ot_w1";
        case DivergenceKind::EntropicOt: return "entropic_ot";
        case DivergenceKind::MmdRbf: return "mmd_rbf";
        case DivergenceKind::MeanD: return "mean_d";
        case DivergenceKind::MedianD: return "median_d";
    }
    return "?";
}

double median(Eigen::VectorXd v) {
    const Eigen::Index n = v.size();
    if (n == 0) throw ValidationError("median: empty input");
    std::sort(v.data(), v.data() + n);
    return n % 2 == 1 ? v(n / 2) : 0.5 * (v(n / 2 - 1) + v(n / 2));
}

namespace {

double wasserstein1(Eigen::VectorXd a, Eigen::VectorXd b) {
    std::sort(a.data(), a.data() + a.size());
    std::sort(b.data(), b.data() + b.size());
    const int n = static_cast<int>(a.size());
    const int m = static_cast<int>(b.size());
    const double wa = 1.0 / n;
    const double wb = 1.0 / m;
    int i = 0, j = 0;
    double ra = wa, rb = wb;
    double total = 0.0;
    while (i < n && j < m) {
        const double delta = std::min(ra, rb);
        total += delta * std::abs(a(i) - b(j));
        ra -= delta;
        rb -= delta;
        if (ra <= 1e-15) {
            ++i;
            ra = wa;
        }
        if (rb <= 1e-15) {
            ++j;
            rb = wb;
        }
    }
    return total;
}

double mmd_rbf(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double bandwidth) {
    if (bandwidth <= 0.0) {
        // Median heuristic over pooled pairwise distances.
        Eigen::VectorXd pooled(a.size() + b.size());
        pooled << a, b;
        std::vector<double> dists;
        for (Eigen::Index i = 0; i < pooled.size(); ++i)
            for (Eigen::Index j = i + 1; j < pooled.size(); ++j)
                dists.push_back(std::abs(pooled(i) - pooled(j)));
        std::sort(dists.begin(), dists.end());
        const size_t nd = dists.size();
        bandwidth = nd == 0 ? 1.0
                            : (nd % 2 == 1 ? dists[nd / 2]
                                           : 0.5 * (dists[nd / 2 - 1] + dists[nd / 2]));
        if (bandwidth <= 0.0) bandwidth = 1.0;
    }
    const double gamma = 1.0 / (2.0 * bandwidth * bandwidth);
    auto kernel_mean = [gamma](const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < u.size(); ++i)
            for (Eigen::Index j = 0; j < v.size(); ++j) {
                const double d = u(i) - v(j);
                s += std::exp(-gamma * d * d);
            }
        return s / (static_cast<double>(u.size()) * static_cast<double>(v.size()));
    };
    const double mmd2 = kernel_mean(a, a) - 2.0 * kernel_mean(a, b) + kernel_mean(b, b);
    return std::sqrt(std::max(0.0, mmd2));
}

}  // namespace

double divergence(const DivergenceSpec& spec, const Eigen::VectorXd& a,
                  const Eigen::VectorXd& b) {
    if (a.size() == 0 || b.size() == 0)
        throw ValidationError("divergence: empty input");
    switch (spec.kind) {
        case DivergenceKind::OtW1:
            return wasserstein1(a, b);
        case DivergenceKind::EntropicOt: {
            Eigen::MatrixXd xa = a, xb = b;
            double coeff = spec.entropic_coeff;
            if (coeff <= 0.0) coeff = 0.05 * median_squared_cost(xa, xb);
            if (coeff <= 0.0) coeff = 1e-9;
            const Eigen::VectorXd mu = Eigen::VectorXd::Constant(a.size(), 1.0 / a.size());
            const Eigen::VectorXd nu = Eigen::VectorXd::Constant(b.size(), 1.0 / b.size());
            return sinkhorn(xa, xb, mu, nu, coeff).transport_cost;
        }
        case DivergenceKind::MmdRbf:
            return mmd_rbf(a, b, spec.bandwidth);
        case DivergenceKind::MeanD:
            return std::abs(a.mean() - b.mean());
        case DivergenceKind::MedianD:
            return std::abs(median(a) - median(b));
    }
    throw std::logic_error("unreachable");
}

double counterfactual_effect(const Eigen::VectorXd& fx, const Eigen::VectorXd& fz,
                             const Eigen::VectorXd& ystar, const DivergenceSpec& spec) {
    const double base = divergence(spec, fx, ystar);
    if (base == 0.0) return 1.0;
    return 1.0 - divergence(spec, fz, ystar) / base;
}

double frobenius_ratio(const Eigen::MatrixXd& z, const Eigen::MatrixXd& x,
                       const Eigen::MatrixXd& r_aligned) {
    if (z.rows() != x.rows() || z.cols() != x.cols() || r_aligned.rows() != x.rows() ||
        r_aligned.cols() != x.cols())
        throw ValidationError("frobenius_ratio: shape mismatch");
    const double denom = (r_aligned - x).norm();
    if (denom == 0.0)
        throw ValidationError("frobenius_ratio: ||r_aligned - x|| is zero, ratio undefined");
    return (z - x).norm() / denom;
}

}  // namespace cola
