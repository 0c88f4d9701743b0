#pragma once

#include <Eigen/Dense>

#include "stresskit/core.hpp"

namespace stresskit::model {

struct SingleClassTraining : Error { using Error::Error; };
struct DidNotConverge : Error { using Error::Error; };

struct SvmConfig {
    double c = 107.0;      // box constraint on the dual variables
    double gamma = 0.001;  // RBF width, K(a,b) = exp(-gamma*|a-b|^2)
    int platt_folds = 3;   // cross-validation folds for probability calibration
    double tol = 1e-3;     // max violating-pair gap at convergence
    long max_iters = 10'000'000;
};

// Alternative preset for the box constraint, for experiments that want an
// effectively hard margin.
inline constexpr double kSvmLargeCPreset = 1e7;

// RBF SVM in dual form plus a fitted sigmoid calibration
// p(f) = 1 / (1 + exp(platt_a * f + platt_b)).
struct SvmModel {
    double gamma = 0.001;
    Eigen::MatrixXd support_vectors;  // standardized feature rows
    Eigen::VectorXd dual_coef;        // alpha_i * y_i, y in {-1,+1}
    double bias = 0.0;
    double platt_a = -1.0;
    double platt_b = 0.0;
};

// Soft-margin dual solved by sequential minimal optimization with maximal
// violating pair selection; converged when the pair gap is <= config.tol.
// labels must be -1/+1 with both classes present. Rows are assumed already
// standardized. Calibration decision values come from platt_folds-fold
// cross-validation.
SvmModel svm_fit(const Eigen::MatrixXd& x, const Eigen::VectorXi& labels,
                 const SvmConfig& config);

// Decision value f(x) = sum_i dual_i K(sv_i, x) + bias.
Eigen::VectorXd svm_decision(const SvmModel& model, const Eigen::MatrixXd& x);

Eigen::VectorXd svm_predict_proba(const SvmModel& model, const Eigen::MatrixXd& x);

// Sigmoid fit A, B minimizing the calibration cross-entropy with
// prior-smoothed targets (Newton iteration with backtracking).
std::pair<double, double> fit_platt_sigmoid(const Eigen::VectorXd& decision,
                                            const Eigen::VectorXi& labels);

}  // namespace stresskit::model
