#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "stresskit/core.hpp"
#include "stresskit/models/svm.hpp"  // SingleClassTraining

namespace stresskit::model {

struct RfConfig {
    int n_trees = 100;
    int max_depth = 0;           // 0 = grow until pure / min_leaf
    int min_leaf = 1;
    int features_per_split = 0;  // 0 = floor(sqrt(n_features))
    std::uint64_t seed = 0;
    bool bootstrap = true;       // test hook; disabling trains each tree on all rows
};

// Flat node array per tree; feature == -1 marks a leaf carrying the class-1
// fraction of its training samples.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double leaf_value = 0.0;
};

struct Tree {
    std::vector<TreeNode> nodes;
    double predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
};

struct RfModel {
    std::vector<Tree> trees;
};

// CART with Gini impurity splits over features_per_split randomly chosen
// columns per node, one bootstrap sample per tree. Deterministic given the
// seed: per-tree streams derive from (seed, tree index), so results do not
// depend on training order.
RfModel rf_fit(const Eigen::MatrixXd& x, const Eigen::VectorXi& labels01,
               const RfConfig& config);

// Mean over trees of each tree's leaf class-1 fraction.
Eigen::VectorXd rf_predict_proba(const RfModel& model, const Eigen::MatrixXd& x);

}  // namespace stresskit::model
