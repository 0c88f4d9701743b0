#pragma once

#include <Eigen/Dense>
#include <vector>

#include "stresskit/core.hpp"

namespace stresskit::qp {

struct DidNotConverge : Error { using Error::Error; };
struct DimensionTooLarge : Error { using Error::Error; };

// Column view of a design matrix A, the only access pattern the coordinate
// solver needs. Lets the convolution operator run without materializing A.
class ColumnOperator {
public:
    virtual ~ColumnOperator() = default;
    virtual Eigen::Index rows() const = 0;
    virtual Eigen::Index cols() const = 0;
    virtual double column_dot(Eigen::Index j, const Eigen::VectorXd& v) const = 0;
    virtual void add_column(Eigen::Index j, double scale, Eigen::VectorXd& v) const = 0;
    virtual double column_sqnorm(Eigen::Index j) const = 0;
};

class DenseColumns final : public ColumnOperator {
public:
    explicit DenseColumns(Eigen::MatrixXd a) : a_(std::move(a)) {}
    Eigen::Index rows() const override { return a_.rows(); }
    Eigen::Index cols() const override { return a_.cols(); }
    double column_dot(Eigen::Index j, const Eigen::VectorXd& v) const override {
        return a_.col(j).dot(v);
    }
    void add_column(Eigen::Index j, double scale, Eigen::VectorXd& v) const override {
        v += scale * a_.col(j);
    }
    double column_sqnorm(Eigen::Index j) const override { return a_.col(j).squaredNorm(); }
    const Eigen::MatrixXd& matrix() const { return a_; }

private:
    Eigen::MatrixXd a_;
};

// Lower-triangular Toeplitz operator: (Aq)_i = sum_k h_k q_{i-k}, kernel
// truncated at the signal end. Column j is the kernel shifted down j rows.
class ConvolutionColumns final : public ColumnOperator {
public:
    ConvolutionColumns(std::vector<double> kernel, Eigen::Index n);
    Eigen::Index rows() const override { return n_; }
    Eigen::Index cols() const override { return n_; }
    double column_dot(Eigen::Index j, const Eigen::VectorXd& v) const override;
    void add_column(Eigen::Index j, double scale, Eigen::VectorXd& v) const override;
    double column_sqnorm(Eigen::Index j) const override { return sqnorm_[j]; }
    const std::vector<double>& kernel() const { return kernel_; }
    void apply(const Eigen::VectorXd& q, Eigen::VectorXd& out) const;

private:
    std::vector<double> kernel_;
    std::vector<double> sqnorm_;  // per-column squared norm with end truncation
    Eigen::Index n_ = 0;
};

struct SolveOptions {
    double tol = 1e-8;        // max KKT residual at exit
    int max_sweeps = 200000;  // full coordinate passes
    bool throw_on_limit = true;
};

struct SolveResult {
    Eigen::VectorXd x;
    double kkt_residual = 0.0;
    double objective = 0.0;  // 0.5*|Ax-b|^2 + c.x
    int sweeps = 0;
    bool converged = false;
    std::vector<double> objective_history;  // one entry per sweep
};

// Minimizes 0.5*|Ax - b|^2 + c.x subject to x_i >= 0 for masked i, by cyclic
// exact coordinate descent with projection on the masked coordinates. KKT
// exit test: |grad_i| <= tol on free coordinates, grad_i >= -tol on masked
// coordinates at zero.
SolveResult nnls_cd(const ColumnOperator& a, const Eigen::VectorXd& b,
                    const Eigen::VectorXd& c, const std::vector<bool>& mask,
                    const SolveOptions& opts = {},
                    const Eigen::VectorXd* warm_start = nullptr);

// Exhaustive reference solver for 0.5*x'Hx + g.x with x_i >= 0 for masked i:
// solves the stationarity system for every active set of the masked
// coordinates, keeps feasible consistent candidates, returns the best.
// Exponential in the masked count; guarded by DimensionTooLarge.
Eigen::VectorXd qp_oracle(const Eigen::MatrixXd& h, const Eigen::VectorXd& g,
                          const std::vector<bool>& mask);

// Objective value 0.5*x'Hx + g.x.
double quadratic_objective(const Eigen::MatrixXd& h, const Eigen::VectorXd& g,
                           const Eigen::VectorXd& x);

// Max KKT violation for the (H, g, mask) problem at x.
double kkt_residual(const Eigen::MatrixXd& h, const Eigen::VectorXd& g,
                    const std::vector<bool>& mask, const Eigen::VectorXd& x,
                    double active_tol = 1e-10);

}  // namespace stresskit::qp
