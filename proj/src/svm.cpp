#include "stresskit/models/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace stresskit::model {

namespace {

Eigen::MatrixXd rbf_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double gamma) {
    // |a_i - b_j|^2 = |a_i|^2 + |b_j|^2 - 2 a_i.b_j
    const Eigen::VectorXd an = a.rowwise().squaredNorm();
    const Eigen::VectorXd bn = b.rowwise().squaredNorm();
    Eigen::MatrixXd d2 = -2.0 * (a * b.transpose());
    d2.colwise() += an;
    d2.rowwise() += bn.transpose();
    return (-gamma * d2.array()).exp();
}

struct SmoResult {
    Eigen::VectorXd alpha;
    double bias = 0.0;
};

// Sequential minimal optimization on
//   min 0.5*a'Qa - e'a,  0 <= a <= C,  y'a = 0,  Q_ij = y_i y_j K_ij,
// selecting the maximal violating pair each iteration.
SmoResult smo_solve(const Eigen::MatrixXd& kernel, const Eigen::VectorXi& y,
                    const SvmConfig& config) {
    const Eigen::Index n = kernel.rows();
    const double c = config.c;
    constexpr double kTau = 1e-12;

    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);

    auto q = [&](Eigen::Index i, Eigen::Index j) {
        return static_cast<double>(y[i]) * static_cast<double>(y[j]) * kernel(i, j);
    };

    long iter = 0;
    double m_up = 0.0, m_low = 0.0;
    while (true) {
        // Maximal violating pair over -y_t * grad_t.
        Eigen::Index i = -1, j = -1;
        m_up = -std::numeric_limits<double>::infinity();
        m_low = std::numeric_limits<double>::infinity();
        for (Eigen::Index t = 0; t < n; ++t) {
            const double v = -static_cast<double>(y[t]) * grad[t];
            const bool in_up = (y[t] > 0 && alpha[t] < c) || (y[t] < 0 && alpha[t] > 0);
            const bool in_low = (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < c);
            if (in_up && v > m_up) { m_up = v; i = t; }
            if (in_low && v < m_low) { m_low = v; j = t; }
        }
        if (i < 0 || j < 0 || m_up - m_low <= config.tol) break;
        if (++iter > config.max_iters)
            throw DidNotConverge("svm: pair gap " + std::to_string(m_up - m_low) + " after " +
                                 std::to_string(config.max_iters) + " iterations");

        const double old_i = alpha[i], old_j = alpha[j];
        if (y[i] != y[j]) {
            double quad = kernel(i, i) + kernel(j, j) + 2.0 * kernel(i, j);
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = diff; }
            } else {
                if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = -diff; }
            }
            if (diff > 0.0) {
                if (alpha[i] > c) { alpha[i] = c; alpha[j] = c - diff; }
            } else {
                if (alpha[j] > c) { alpha[j] = c; alpha[i] = c + diff; }
            }
        } else {
            double quad = kernel(i, i) + kernel(j, j) - 2.0 * kernel(i, j);
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) { alpha[i] = c; alpha[j] = sum - c; }
            } else {
                if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = sum; }
            }
            if (sum > c) {
                if (alpha[j] > c) { alpha[j] = c; alpha[i] = sum - c; }
            } else {
                if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = sum; }
            }
        }

        const double di = alpha[i] - old_i, dj = alpha[j] - old_j;
        for (Eigen::Index t = 0; t < n; ++t) grad[t] += q(t, i) * di + q(t, j) * dj;
    }

    // Bias from free vectors when any exist, else the midpoint of the bounds.
    double sum_free = 0.0;
    int n_free = 0;
    for (Eigen::Index t = 0; t < n; ++t) {
        if (alpha[t] > 0.0 && alpha[t] < c) {
            sum_free += -static_cast<double>(y[t]) * grad[t];
            ++n_free;
        }
    }
    SmoResult res;
    res.alpha = std::move(alpha);
    res.bias = n_free > 0 ? sum_free / n_free : 0.5 * (m_up + m_low);
    return res;
}

void require_both_classes(const Eigen::VectorXi& labels) {
    bool pos = false, neg = false;
    for (Eigen::Index i = 0; i < labels.size(); ++i) (labels[i] > 0 ? pos : neg) = true;
    if (!pos || !neg) throw SingleClassTraining("svm: training data has a single class");
}

}  // namespace

std::pair<double, double> fit_platt_sigmoid(const Eigen::VectorXd& decision,
                                            const Eigen::VectorXi& labels) {
    // Newton iteration with backtracking on the prior-smoothed cross-entropy
    // (Lin/Weng/Keerthi formulation).
    const Eigen::Index n = decision.size();
    double prior1 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        if (labels[i] > 0) prior1 += 1.0;
    const double prior0 = static_cast<double>(n) - prior1;

    const double hi = (prior1 + 1.0) / (prior1 + 2.0);
    const double lo = 1.0 / (prior0 + 2.0);
    Eigen::VectorXd t(n);
    for (Eigen::Index i = 0; i < n; ++i) t[i] = labels[i] > 0 ? hi : lo;

    constexpr int kMaxIter = 100;
    constexpr double kMinStep = 1e-10;
    constexpr double kSigma = 1e-12;
    constexpr double kEps = 1e-5;

    double a = 0.0;
    double b = std::log((prior0 + 1.0) / (prior1 + 1.0));

    auto objective = [&](double pa, double pb) {
        double f = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double fab = decision[i] * pa + pb;
            if (fab >= 0.0)
                f += t[i] * fab + std::log1p(std::exp(-fab));
            else
                f += (t[i] - 1.0) * fab + std::log1p(std::exp(fab));
        }
        return f;
    };

    double fval = objective(a, b);
    for (int it = 0; it < kMaxIter; ++it) {
        double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double fab = decision[i] * a + b;
            double p, qd;
            if (fab >= 0.0) {
                p = std::exp(-fab) / (1.0 + std::exp(-fab));
                qd = 1.0 / (1.0 + std::exp(-fab));
            } else {
                p = 1.0 / (1.0 + std::exp(fab));
                qd = std::exp(fab) / (1.0 + std::exp(fab));
            }
            const double d2 = p * qd;
            h11 += decision[i] * decision[i] * d2;
            h22 += d2;
            h21 += decision[i] * d2;
            const double d1 = t[i] - p;
            g1 += decision[i] * d1;
            g2 += d1;
        }
        if (std::abs(g1) < kEps && std::abs(g2) < kEps) break;

        const double det = h11 * h22 - h21 * h21;
        const double da = -(h22 * g1 - h21 * g2) / det;
        const double db = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * da + g2 * db;

        double step = 1.0;
        while (step >= kMinStep) {
            const double na = a + step * da;
            const double nb = b + step * db;
            const double nf = objective(na, nb);
            if (nf < fval + 1e-4 * step * gd) {
                a = na;
                b = nb;
                fval = nf;
                break;
            }
            step /= 2.0;
        }
        if (step < kMinStep) break;
    }
    return {a, b};
}

SvmModel svm_fit(const Eigen::MatrixXd& x, const Eigen::VectorXi& labels,
                 const SvmConfig& config) {
    if (x.rows() != labels.size()) throw std::invalid_argument("svm_fit: row/label mismatch");
    if (x.rows() < 2) throw SingleClassTraining("svm: fewer than 2 rows");
    require_both_classes(labels);

    const Eigen::Index n = x.rows();

    // Out-of-fold decision values for calibration.
    const int folds = std::max(2, config.platt_folds);
    Eigen::VectorXd cv_decision(n);
    std::vector<int> fold_of(static_cast<std::size_t>(n));
    {
        int pos_seen = 0, neg_seen = 0;
        for (Eigen::Index i = 0; i < n; ++i)
            fold_of[static_cast<std::size_t>(i)] =
                labels[i] > 0 ? (pos_seen++ % folds) : (neg_seen++ % folds);
    }
    bool cv_ok = true;
    for (int f = 0; f < folds && cv_ok; ++f) {
        std::vector<Eigen::Index> train_idx, test_idx;
        for (Eigen::Index i = 0; i < n; ++i)
            (fold_of[static_cast<std::size_t>(i)] == f ? test_idx : train_idx).push_back(i);
        if (test_idx.empty()) continue;
        bool pos = false, neg = false;
        for (Eigen::Index i : train_idx) (labels[i] > 0 ? pos : neg) = true;
        if (!pos || !neg || train_idx.size() < 2) { cv_ok = false; break; }

        Eigen::MatrixXd xt(static_cast<Eigen::Index>(train_idx.size()), x.cols());
        Eigen::VectorXi yt(static_cast<Eigen::Index>(train_idx.size()));
        for (std::size_t k = 0; k < train_idx.size(); ++k) {
            xt.row(static_cast<Eigen::Index>(k)) = x.row(train_idx[k]);
            yt[static_cast<Eigen::Index>(k)] = labels[train_idx[k]];
        }
        const Eigen::MatrixXd kt = rbf_kernel(xt, xt, config.gamma);
        const SmoResult fold_fit = smo_solve(kt, yt, config);

        Eigen::MatrixXd xs(static_cast<Eigen::Index>(test_idx.size()), x.cols());
        for (std::size_t k = 0; k < test_idx.size(); ++k)
            xs.row(static_cast<Eigen::Index>(k)) = x.row(test_idx[k]);
        const Eigen::MatrixXd kx = rbf_kernel(xt, xs, config.gamma);
        for (std::size_t k = 0; k < test_idx.size(); ++k) {
            double f_val = fold_fit.bias;
            for (Eigen::Index t = 0; t < xt.rows(); ++t)
                f_val += fold_fit.alpha[t] * yt[t] * kx(t, static_cast<Eigen::Index>(k));
            cv_decision[test_idx[k]] = f_val;
        }
    }

    // Final model on the full training set.
    const Eigen::MatrixXd kernel = rbf_kernel(x, x, config.gamma);
    const SmoResult fit = smo_solve(kernel, labels, config);

    if (!cv_ok) {
        // Tiny or heavily imbalanced inputs: calibrate on in-sample values.
        for (Eigen::Index i = 0; i < n; ++i) {
            double f_val = fit.bias;
            for (Eigen::Index t = 0; t < n; ++t)
                f_val += fit.alpha[t] * labels[t] * kernel(t, i);
            cv_decision[i] = f_val;
        }
    }

    SvmModel model;
    model.gamma = config.gamma;
    model.bias = fit.bias;
    std::tie(model.platt_a, model.platt_b) = fit_platt_sigmoid(cv_decision, labels);

    // Keep only support vectors.
    std::vector<Eigen::Index> sv;
    for (Eigen::Index i = 0; i < n; ++i)
        if (fit.alpha[i] > 0.0) sv.push_back(i);
    model.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), x.cols());
    model.dual_coef.resize(static_cast<Eigen::Index>(sv.size()));
    for (std::size_t k = 0; k < sv.size(); ++k) {
        model.support_vectors.row(static_cast<Eigen::Index>(k)) = x.row(sv[k]);
        model.dual_coef[static_cast<Eigen::Index>(k)] =
            fit.alpha[sv[k]] * static_cast<double>(labels[sv[k]]);
    }
    return model;
}

Eigen::VectorXd svm_decision(const SvmModel& model, const Eigen::MatrixXd& x) {
    if (x.cols() != model.support_vectors.cols())
        throw std::invalid_argument("svm_decision: feature width mismatch");
    const Eigen::MatrixXd k = rbf_kernel(model.support_vectors, x, model.gamma);
    Eigen::VectorXd f = k.transpose() * model.dual_coef;
    f.array() += model.bias;
    return f;
}

Eigen::VectorXd svm_predict_proba(const SvmModel& model, const Eigen::MatrixXd& x) {
    const Eigen::VectorXd f = svm_decision(model, x);
    Eigen::VectorXd p(f.size());
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        const double fab = model.platt_a * f[i] + model.platt_b;
        p[i] = fab >= 0.0 ? std::exp(-fab) / (1.0 + std::exp(-fab))
                          : 1.0 / (1.0 + std::exp(fab));
    }
    return p;
}

}  // namespace stresskit::model
