#include "stresskit/models/rf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stresskit/rng.hpp"

namespace stresskit::model {

namespace {

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;
    double impurity = std::numeric_limits<double>::infinity();
};

double gini(std::size_t pos, std::size_t total) {
    if (total == 0) return 0.0;
    const double p = static_cast<double>(pos) / static_cast<double>(total);
    return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

class TreeBuilder {
public:
    TreeBuilder(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const RfConfig& cfg,
                Rng rng)
        : x_(x), y_(y), cfg_(cfg), rng_(rng) {
        k_ = cfg.features_per_split > 0
                 ? cfg.features_per_split
                 : std::max(1, static_cast<int>(std::floor(
                                   std::sqrt(static_cast<double>(x.cols())))));
        k_ = std::min<int>(k_, static_cast<int>(x.cols()));
        feature_pool_.resize(static_cast<std::size_t>(x.cols()));
        std::iota(feature_pool_.begin(), feature_pool_.end(), 0);
    }

    Tree build(std::vector<int> sample) {
        Tree tree;
        grow(tree, std::move(sample), 1);
        return tree;
    }

private:
    int grow(Tree& tree, std::vector<int> idx, int depth) {
        const std::size_t n = idx.size();
        std::size_t pos = 0;
        for (int i : idx) pos += static_cast<std::size_t>(y_[i]);

        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[static_cast<std::size_t>(node_id)].leaf_value =
            static_cast<double>(pos) / static_cast<double>(n);

        const bool pure = pos == 0 || pos == n;
        const bool too_small = n < 2 * static_cast<std::size_t>(cfg_.min_leaf);
        const bool at_depth = cfg_.max_depth > 0 && depth >= cfg_.max_depth;
        if (pure || too_small || at_depth) return node_id;

        const SplitCandidate split = best_split(idx, pos);
        if (split.feature < 0) return node_id;

        std::vector<int> left, right;
        left.reserve(n);
        right.reserve(n);
        for (int i : idx)
            (x_(i, split.feature) <= split.threshold ? left : right).push_back(i);
        idx.clear();
        idx.shrink_to_fit();

        const int l = grow(tree, std::move(left), depth + 1);
        const int r = grow(tree, std::move(right), depth + 1);
        TreeNode& node = tree.nodes[static_cast<std::size_t>(node_id)];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = l;
        node.right = r;
        return node_id;
    }

    SplitCandidate best_split(const std::vector<int>& idx, std::size_t pos_total) {
        // Partial Fisher-Yates draw of k distinct features, then sorted so
        // the scan order (and tie-breaking) is deterministic.
        for (int d = 0; d < k_; ++d) {
            const auto swap_with =
                d + static_cast<int>(rng_.uniform_index(feature_pool_.size() -
                                                        static_cast<std::size_t>(d)));
            std::swap(feature_pool_[static_cast<std::size_t>(d)],
                      feature_pool_[static_cast<std::size_t>(swap_with)]);
        }
        std::vector<int> chosen(feature_pool_.begin(), feature_pool_.begin() + k_);
        std::sort(chosen.begin(), chosen.end());

        const std::size_t n = idx.size();
        SplitCandidate best;
        std::vector<std::pair<double, int>> vals(n);
        for (int f : chosen) {
            for (std::size_t i = 0; i < n; ++i)
                vals[i] = {x_(idx[i], f), y_[idx[i]]};
            std::sort(vals.begin(), vals.end());

            std::size_t left_pos = 0;
            for (std::size_t cut = 1; cut < n; ++cut) {
                left_pos += static_cast<std::size_t>(vals[cut - 1].second);
                if (vals[cut].first == vals[cut - 1].first) continue;
                if (cut < static_cast<std::size_t>(cfg_.min_leaf) ||
                    n - cut < static_cast<std::size_t>(cfg_.min_leaf))
                    continue;
                const double impurity =
                    (static_cast<double>(cut) * gini(left_pos, cut) +
                     static_cast<double>(n - cut) * gini(pos_total - left_pos, n - cut)) /
                    static_cast<double>(n);
                if (impurity < best.impurity) {
                    best.impurity = impurity;
                    best.feature = f;
                    best.threshold = 0.5 * (vals[cut - 1].first + vals[cut].first);
                }
            }
        }
        return best;
    }

    const Eigen::MatrixXd& x_;
    const Eigen::VectorXi& y_;
    const RfConfig& cfg_;
    Rng rng_;
    int k_ = 1;
    std::vector<int> feature_pool_;
};

}  // namespace

double Tree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    int node = 0;
    while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const TreeNode& nd = nodes[static_cast<std::size_t>(node)];
        node = row[nd.feature] <= nd.threshold ? nd.left : nd.right;
    }
    return nodes[static_cast<std::size_t>(node)].leaf_value;
}

RfModel rf_fit(const Eigen::MatrixXd& x, const Eigen::VectorXi& labels01,
               const RfConfig& config) {
    if (x.rows() != labels01.size()) throw std::invalid_argument("rf_fit: row/label mismatch");
    bool pos = false, neg = false;
    for (Eigen::Index i = 0; i < labels01.size(); ++i) (labels01[i] == 1 ? pos : neg) = true;
    if (!pos || !neg) throw SingleClassTraining("rf: training data has a single class");

    const auto n = static_cast<std::size_t>(x.rows());
    const Rng root(config.seed);

    RfModel model;
    model.trees.reserve(static_cast<std::size_t>(config.n_trees));
    for (int t = 0; t < config.n_trees; ++t) {
        Rng tree_rng = root.child(static_cast<std::uint64_t>(t), 0x7265);
        std::vector<int> sample(n);
        if (config.bootstrap) {
            for (std::size_t i = 0; i < n; ++i)
                sample[i] = static_cast<int>(tree_rng.uniform_index(n));
        } else {
            std::iota(sample.begin(), sample.end(), 0);
        }
        TreeBuilder builder(x, labels01, config, tree_rng.child(1, 0x6772));
        model.trees.push_back(builder.build(std::move(sample)));
    }
    return model;
}

Eigen::VectorXd rf_predict_proba(const RfModel& model, const Eigen::MatrixXd& x) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(x.rows());
    for (const Tree& tree : model.trees)
        for (Eigen::Index i = 0; i < x.rows(); ++i) p[i] += tree.predict(x.row(i));
    if (!model.trees.empty()) p /= static_cast<double>(model.trees.size());
    return p;
}

}  // namespace stresskit::model
