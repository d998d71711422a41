#include "cola/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace cola {

void CouplingMatrix::validate(double tol) const {
    if ((p.array() < 0.0).any())
        throw std::runtime_error("coupling: negative entry");
    if (std::abs(p.sum() - 1.0) > tol)
        throw std::runtime_error("coupling: entries do not sum to 1");
}

CouplingMatrix build_coupling(CouplingKind kind, int n, int m,
                              const std::vector<int>* pairing, std::uint64_t seed) {
    CouplingMatrix c;
    c.mu = Eigen::VectorXd::Constant(n, 1.0 / n);
    c.p = Eigen::MatrixXd::Zero(n, m);
    switch (kind) {
        case CouplingKind::Uniform:
            c.p.setConstant(1.0 / (static_cast<double>(n) * m));
            c.nu = Eigen::VectorXd::Constant(m, 1.0 / m);
            break;
        case CouplingKind::RandomMatch: {
            std::mt19937_64 rng(seed);
            std::uniform_int_distribution<int> pick(0, m - 1);
            std::vector<int> match(n);
            for (int i = 0; i < n; ++i) {
                match[i] = pick(rng);
                c.p(i, match[i]) = 1.0 / n;
            }
            c.nu = c.p.colwise().sum();
            c.matching = std::move(match);
            break;
        }
        case CouplingKind::Exact: {
            if (!pairing || static_cast<int>(pairing->size()) != n)
                throw ValidationError("build_coupling: exact kind requires a total pairing");
            for (int i = 0; i < n; ++i) {
                const int j = (*pairing)[i];
                if (j < 0 || j >= m)
                    throw ValidationError("build_coupling: pairing index out of range");
                c.p(i, j) = 1.0 / n;
            }
            c.nu = c.p.colwise().sum();
            c.matching = *pairing;
            break;
        }
    }
    return c;
}

Eigen::MatrixXd squared_cost_matrix(const Eigen::MatrixXd& x, const Eigen::MatrixXd& r) {
    const Eigen::VectorXd x2 = x.rowwise().squaredNorm();
    const Eigen::VectorXd r2 = r.rowwise().squaredNorm();
    Eigen::MatrixXd cost = -2.0 * x * r.transpose();
    cost.colwise() += x2;
    cost.rowwise() += r2.transpose();
    return cost.cwiseMax(0.0);
}

double median_squared_cost(const Eigen::MatrixXd& x, const Eigen::MatrixXd& r) {
    Eigen::MatrixXd cost = squared_cost_matrix(x, r);
    std::vector<double> v(cost.data(), cost.data() + cost.size());
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

CouplingMatrix sinkhorn(const Eigen::MatrixXd& x, const Eigen::MatrixXd& r,
                        const Eigen::VectorXd& mu, const Eigen::VectorXd& nu,
                        double entropic_coeff, double tol, int max_iter) {
    if (entropic_coeff <= 0.0)
        throw ValidationError("sinkhorn: entropic coefficient must be > 0");
    const int n = static_cast<int>(x.rows());
    const int m = static_cast<int>(r.rows());
    Eigen::MatrixXd cost = squared_cost_matrix(x, r);
    if (!cost.allFinite())
        throw ValidationError("sinkhorn: non-finite cost entries");
    auto check_marginal = [](const Eigen::VectorXd& w, const char* name) {
        if ((w.array() < 0.0).any() || std::abs(w.sum() - 1.0) > 1e-9)
            throw ValidationError(std::string("sinkhorn: ") + name +
                                  " is not a probability vector");
    };
    check_marginal(mu, "mu");
    check_marginal(nu, "nu");

    const Eigen::VectorXd log_mu = mu.array().log().matrix();
    const Eigen::VectorXd log_nu = nu.array().log().matrix();
    const double eps = entropic_coeff;

    // log p_ij = log mu_i + log nu_j + (f_i + g_j - C_ij) / eps
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(m);

    auto logsumexp_rows = [](const Eigen::MatrixXd& a) -> Eigen::VectorXd {
        Eigen::VectorXd mx = a.rowwise().maxCoeff();
        Eigen::VectorXd sums =
            (a.colwise() - mx).array().exp().rowwise().sum().log().matrix();
        return mx + sums;
    };

    CouplingMatrix out;
    out.mu = mu;
    out.nu = nu;
    out.entropic_coeff = eps;

    Eigen::MatrixXd logp(n, m);
    double residual = std::numeric_limits<double>::infinity();
    int it = 0;
    for (; it < max_iter; ++it) {
        // f-update: row marginals match exactly afterwards.
        Eigen::MatrixXd a = ((-cost).rowwise() + g.transpose()) / eps;
        a.rowwise() += log_nu.transpose();
        f = -eps * logsumexp_rows(a);

        Eigen::MatrixXd b = ((-cost).colwise() + f).transpose() / eps;
        b.rowwise() += log_mu.transpose();
        g = -eps * logsumexp_rows(b);

        logp = ((-cost).colwise() + f).rowwise() + g.transpose();
        logp /= eps;
        logp.colwise() += log_mu;
        logp.rowwise() += log_nu.transpose();
        Eigen::MatrixXd p = logp.array().exp();

        const double row_err = (p.rowwise().sum() - mu).cwiseAbs().sum();
        const double col_err = (p.colwise().sum().transpose() - nu).cwiseAbs().sum();
        residual = std::max(row_err, col_err);
        if (residual <= tol) {
            out.p = p;
            ++it;
            break;
        }
        out.p = p;
    }
    out.converged = residual <= tol;
    out.marginal_residual = residual;
    out.iterations = it;
    // Rescale the tiny global mass drift so downstream invariants hold.
    out.p /= out.p.sum();
    out.transport_cost = (out.p.array() * cost.array()).sum();
    return out;
}

CouplingMatrix sinkhorn_default(const Eigen::MatrixXd& x, const Eigen::MatrixXd& r) {
    const int n = static_cast<int>(x.rows());
    const int m = static_cast<int>(r.rows());
    const Eigen::VectorXd mu = Eigen::VectorXd::Constant(n, 1.0 / n);
    const Eigen::VectorXd nu = Eigen::VectorXd::Constant(m, 1.0 / m);
    double coeff = 0.05 * median_squared_cost(x, r);
    if (coeff <= 0.0) coeff = 1e-6;
    return sinkhorn(x, r, mu, nu, coeff);
}

std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    if (cost.cols() != n) throw ValidationError("solve_assignment: matrix must be square");
    constexpr double kInf = std::numeric_limits<double>::infinity();

    // Shortest augmenting paths with dual potentials, 1-based bookkeeping.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const int i0 = p[j0];
            double delta = kInf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> sigma(n);
    for (int j = 1; j <= n; ++j) sigma[p[j] - 1] = j - 1;

    // Canonicalize equal-cost transpositions toward lexicographic order.
    bool changed = true;
    while (changed) {
        changed = false;
        for (int i = 0; i < n; ++i) {
            for (int i2 = i + 1; i2 < n; ++i2) {
                if (sigma[i] <= sigma[i2]) continue;
                const double before = cost(i, sigma[i]) + cost(i2, sigma[i2]);
                const double after = cost(i, sigma[i2]) + cost(i2, sigma[i]);
                if (after == before) {
                    std::swap(sigma[i], sigma[i2]);
                    changed = true;
                }
            }
        }
    }
    return sigma;
}

CouplingMatrix assignment_ot(const Eigen::MatrixXd& x, const Eigen::MatrixXd& r) {
    const int n = static_cast<int>(x.rows());
    if (r.rows() != n)
        throw ValidationError("assignment_ot: requires n = m");
    Eigen::MatrixXd cost = squared_cost_matrix(x, r);
    std::vector<int> sigma = solve_assignment(cost);
    CouplingMatrix c = build_coupling(CouplingKind::Exact, n, n, &sigma);
    for (int i = 0; i < n; ++i) c.transport_cost += cost(i, sigma[i]) / n;
    return c;
}

Eigen::VectorXd conditional_weights(const CouplingMatrix& coupling, int i) {
    const double mass = coupling.p.row(i).sum();
    if (mass <= 0.0)
        throw ValidationError("conditional_weights: zero mass in row " + std::to_string(i));
    return coupling.p.row(i).transpose() / mass;
}

}  // namespace cola
