#include "stresskit/qp.hpp"

#include <algorithm>
#include <cmath>

namespace stresskit::qp {

ConvolutionColumns::ConvolutionColumns(std::vector<double> kernel, Eigen::Index n)
    : kernel_(std::move(kernel)), n_(n) {
    sqnorm_.resize(static_cast<std::size_t>(n_));
    // Column j holds kernel entries 0 .. min(K, n-j)-1.
    std::vector<double> suffix(kernel_.size() + 1, 0.0);
    for (std::size_t k = kernel_.size(); k-- > 0;)
        suffix[k] = suffix[k + 1] + kernel_[k] * kernel_[k];
    for (Eigen::Index j = 0; j < n_; ++j) {
        const auto len = std::min<std::size_t>(kernel_.size(), static_cast<std::size_t>(n_ - j));
        sqnorm_[static_cast<std::size_t>(j)] = suffix[0] - suffix[len];
    }
}

double ConvolutionColumns::column_dot(Eigen::Index j, const Eigen::VectorXd& v) const {
    const auto len = std::min<Eigen::Index>(static_cast<Eigen::Index>(kernel_.size()), n_ - j);
    double s = 0.0;
    for (Eigen::Index k = 0; k < len; ++k) s += kernel_[static_cast<std::size_t>(k)] * v[j + k];
    return s;
}

void ConvolutionColumns::add_column(Eigen::Index j, double scale, Eigen::VectorXd& v) const {
    const auto len = std::min<Eigen::Index>(static_cast<Eigen::Index>(kernel_.size()), n_ - j);
    for (Eigen::Index k = 0; k < len; ++k) v[j + k] += scale * kernel_[static_cast<std::size_t>(k)];
}

void ConvolutionColumns::apply(const Eigen::VectorXd& q, Eigen::VectorXd& out) const {
    out.setZero(n_);
    for (Eigen::Index j = 0; j < n_; ++j)
        if (q[j] != 0.0) add_column(j, q[j], out);
}

SolveResult nnls_cd(const ColumnOperator& a, const Eigen::VectorXd& b,
                    const Eigen::VectorXd& c, const std::vector<bool>& mask,
                    const SolveOptions& opts, const Eigen::VectorXd* warm_start) {
    const Eigen::Index n = a.cols();
    if (b.size() != a.rows() || c.size() != n || static_cast<Eigen::Index>(mask.size()) != n)
        throw std::invalid_argument("nnls_cd: dimension mismatch");

    SolveResult res;
    res.x = warm_start ? *warm_start : Eigen::VectorXd::Zero(n);

    Eigen::VectorXd r = -b;  // residual Ax - b
    for (Eigen::Index j = 0; j < n; ++j)
        if (res.x[j] != 0.0) a.add_column(j, res.x[j], r);

    std::vector<double> diag(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) diag[static_cast<std::size_t>(j)] = a.column_sqnorm(j);

    const double zero_tol = opts.tol;
    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double d = diag[static_cast<std::size_t>(j)];
            const double g = a.column_dot(j, r) + c[j];
            if (d <= 1e-300) {
                // Zero column: the objective is linear in x_j. Masked
                // coordinates sit at zero (our uses have c_j >= 0 there);
                // free zero columns cannot be improved by CD.
                if (mask[static_cast<std::size_t>(j)] && res.x[j] != 0.0) {
                    a.add_column(j, -res.x[j], r);
                    res.x[j] = 0.0;
                }
                continue;
            }
            double nx = res.x[j] - g / d;
            if (mask[static_cast<std::size_t>(j)] && nx < 0.0) nx = 0.0;
            const double delta = nx - res.x[j];
            if (delta != 0.0) {
                a.add_column(j, delta, r);
                res.x[j] = nx;
            }
        }
        ++res.sweeps;

        // Fresh KKT pass (also serves as the convergence test).
        double viol = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double g = a.column_dot(j, r) + c[j];
            if (mask[static_cast<std::size_t>(j)] && res.x[j] <= zero_tol)
                viol = std::max(viol, -g);
            else if (diag[static_cast<std::size_t>(j)] > 1e-300)
                viol = std::max(viol, std::abs(g));
        }
        res.kkt_residual = viol;
        res.objective = 0.5 * r.squaredNorm() + c.dot(res.x);
        res.objective_history.push_back(res.objective);
#ifndef NDEBUG
        if (res.objective_history.size() >= 2) {
            const double prev = res.objective_history[res.objective_history.size() - 2];
            if (res.objective > prev + 1e-9 * (1.0 + std::abs(prev)))
                throw std::logic_error("nnls_cd: objective increased");
        }
#endif
        if (viol <= opts.tol) {
            res.converged = true;
            return res;
        }
    }
    if (opts.throw_on_limit)
        throw DidNotConverge("nnls_cd: KKT residual " + std::to_string(res.kkt_residual) +
                             " after " + std::to_string(res.sweeps) + " sweeps");
    return res;
}

double quadratic_objective(const Eigen::MatrixXd& h, const Eigen::VectorXd& g,
                           const Eigen::VectorXd& x) {
    return 0.5 * x.dot(h * x) + g.dot(x);
}

double kkt_residual(const Eigen::MatrixXd& h, const Eigen::VectorXd& g,
                    const std::vector<bool>& mask, const Eigen::VectorXd& x,
                    double active_tol) {
    const Eigen::VectorXd grad = h * x + g;
    double viol = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (mask[static_cast<std::size_t>(i)] && x[i] <= active_tol)
            viol = std::max(viol, -grad[i]);
        else
            viol = std::max(viol, std::abs(grad[i]));
    }
    return viol;
}

Eigen::VectorXd qp_oracle(const Eigen::MatrixXd& h, const Eigen::VectorXd& g,
                          const std::vector<bool>& mask) {
    const Eigen::Index n = h.rows();
    if (h.cols() != n || g.size() != n || static_cast<Eigen::Index>(mask.size()) != n)
        throw std::invalid_argument("qp_oracle: dimension mismatch");
    if (n > 60) throw DimensionTooLarge("qp_oracle: dimension > 60");

    std::vector<int> masked_idx;
    for (Eigen::Index i = 0; i < n; ++i)
        if (mask[static_cast<std::size_t>(i)]) masked_idx.push_back(static_cast<int>(i));
    const std::size_t m = masked_idx.size();
    if (m > 25) throw DimensionTooLarge("qp_oracle: more than 25 masked coordinates");

    const double feas_tol = 1e-9;
    bool found = false;
    double best_obj = 0.0;
    Eigen::VectorXd best;

    for (std::uint64_t bits = 0; bits < (1ULL << m); ++bits) {
        // bits selects which masked coordinates are clamped to zero.
        std::vector<int> free_idx;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!mask[static_cast<std::size_t>(i)]) {
                free_idx.push_back(static_cast<int>(i));
            }
        }
        for (std::size_t k = 0; k < m; ++k)
            if (!(bits & (1ULL << k))) free_idx.push_back(masked_idx[k]);

        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        if (!free_idx.empty()) {
            const auto nf = static_cast<Eigen::Index>(free_idx.size());
            Eigen::MatrixXd hff(nf, nf);
            Eigen::VectorXd gf(nf);
            for (Eigen::Index a = 0; a < nf; ++a) {
                gf[a] = g[free_idx[static_cast<std::size_t>(a)]];
                for (Eigen::Index b = 0; b < nf; ++b)
                    hff(a, b) = h(free_idx[static_cast<std::size_t>(a)],
                                  free_idx[static_cast<std::size_t>(b)]);
            }
            Eigen::VectorXd xf = hff.ldlt().solve(-gf);
            double resid = (hff * xf + gf).lpNorm<Eigen::Infinity>();
            if (resid > 1e-8 * (1.0 + gf.lpNorm<Eigen::Infinity>())) {
                // Semidefinite face: retry with a rank-revealing solve; skip
                // the face if stationarity still fails (no minimizer there).
                Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(hff);
                xf = cod.solve(-gf);
                resid = (hff * xf + gf).lpNorm<Eigen::Infinity>();
                if (resid > 1e-8 * (1.0 + gf.lpNorm<Eigen::Infinity>())) continue;
            }
            for (Eigen::Index a = 0; a < nf; ++a) x[free_idx[static_cast<std::size_t>(a)]] = xf[a];
        }

        bool feasible = true;
        for (int i : masked_idx)
            if (x[i] < -feas_tol) { feasible = false; break; }
        if (!feasible) continue;

        for (int i : masked_idx)
            if (x[i] < 0.0) x[i] = 0.0;
        const double obj = quadratic_objective(h, g, x);
        if (!found || obj < best_obj) {
            found = true;
            best_obj = obj;
            best = x;
        }
    }
    if (!found) throw std::logic_error("qp_oracle: no stationary face found");
    return best;
}

}  // namespace stresskit::qp
