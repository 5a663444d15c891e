#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "microact/types.hpp"

namespace microact {

struct ForestSpec {
    int n_trees = 100;
    int max_depth = 34;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_trees < 1) throw ValidationError("forest: n_trees must be >= 1");
        if (max_depth < 1) throw ValidationError("forest: max_depth must be >= 1");
    }
};

/// CART tree stored as a flat node array.
struct TreeNode {
    int feature = -1;       // -1 marks a leaf
    double threshold = 0.0; // go left if x[feature] <= threshold
    int left = -1, right = -1;
    int label = 0; // leaf prediction
};

struct DecisionTree {
    std::vector<TreeNode> nodes;

    int predict(const Vector& row) const {
        int at = 0;
        while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
            const auto& n = nodes[static_cast<std::size_t>(at)];
            at = row(n.feature) <= n.threshold ? n.left : n.right;
        }
        return nodes[static_cast<std::size_t>(at)].label;
    }
};

namespace detail {

inline double gini(const std::map<int, int>& counts, int total) {
    double g = 1.0;
    for (const auto& [label, c] : counts) {
        const double p = static_cast<double>(c) / total;
        g -= p * p;
    }
    return g;
}

inline int majority(const std::map<int, int>& counts) {
    int best_label = counts.begin()->first, best = -1;
    for (const auto& [label, c] : counts)
        if (c > best) { // ties resolve to the smallest label (map order)
            best = c;
            best_label = label;
        }
    return best_label;
}

struct TreeBuilder {
    const Matrix& features;
    const std::vector<int>& targets;
    int max_depth;
    int n_candidate_features;
    std::uint64_t tree_seed;
    DecisionTree tree;

    // path: root = 1, left child = 2*path, right child = 2*path+1. Seeding the
    // node rng from (tree, path) keeps split choices independent of the depth
    // limit, so a deeper tree strictly refines a shallower one.
    int build(std::vector<Eigen::Index>& idx, int depth, std::uint64_t path) {
        std::map<int, int> counts;
        for (const auto i : idx) ++counts[targets[static_cast<std::size_t>(i)]];
        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.back().label = majority(counts);
        if (depth >= max_depth || counts.size() < 2 || idx.size() < 2) return node_id;

        // split choice depends only on the node's rows, not on depth, so a
        // deeper depth limit only refines existing leaves
        const double parent_impurity = gini(counts, static_cast<int>(idx.size()));
        std::mt19937_64 node_rng(tree_seed ^ (path * 0xbf58476d1ce4e5b9ULL));
        std::vector<int> candidates(static_cast<std::size_t>(features.cols()));
        for (std::size_t f = 0; f < candidates.size(); ++f) candidates[f] = static_cast<int>(f);
        std::shuffle(candidates.begin(), candidates.end(), node_rng);
        candidates.resize(std::min<std::size_t>(candidates.size(),
                                                static_cast<std::size_t>(n_candidate_features)));
        std::sort(candidates.begin(), candidates.end());

        double best_gain = 1e-12;
        int best_feature = -1;
        double best_threshold = 0.0;
        for (const int f : candidates) {
            std::vector<std::pair<double, int>> vals;
            vals.reserve(idx.size());
            for (const auto i : idx)
                vals.emplace_back(features(i, f), targets[static_cast<std::size_t>(i)]);
            std::sort(vals.begin(), vals.end());
            std::map<int, int> left_counts, right_counts = counts;
            for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
                ++left_counts[vals[k].second];
                if (--right_counts[vals[k].second] == 0) right_counts.erase(vals[k].second);
                if (vals[k].first == vals[k + 1].first) continue;
                const int nl = static_cast<int>(k + 1);
                const int nr = static_cast<int>(vals.size()) - nl;
                const double gain =
                    parent_impurity - (nl * gini(left_counts, nl) + nr * gini(right_counts, nr)) /
                                          static_cast<double>(vals.size());
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = f;
                    best_threshold = 0.5 * (vals[k].first + vals[k + 1].first);
                }
            }
        }
        if (best_feature < 0) return node_id;

        std::vector<Eigen::Index> left_idx, right_idx;
        for (const auto i : idx)
            (features(i, best_feature) <= best_threshold ? left_idx : right_idx).push_back(i);
        if (left_idx.empty() || right_idx.empty()) return node_id;

        tree.nodes[static_cast<std::size_t>(node_id)].feature = best_feature;
        tree.nodes[static_cast<std::size_t>(node_id)].threshold = best_threshold;
        const int l = build(left_idx, depth + 1, 2 * path);
        const int r = build(right_idx, depth + 1, 2 * path + 1);
        tree.nodes[static_cast<std::size_t>(node_id)].left = l;
        tree.nodes[static_cast<std::size_t>(node_id)].right = r;
        return node_id;
    }
};

} // namespace detail

/// Bagged CART forest with sqrt(p) feature subsampling and majority voting.
struct RandomForest {
    ForestSpec spec;
    std::vector<DecisionTree> trees;
    bool constant_flag = false; // single-class training data
    int constant_label = 0;

    int predict(const Vector& row) const {
        if (constant_flag) return constant_label;
        std::map<int, int> votes;
        for (const auto& t : trees) ++votes[t.predict(row)];
        return detail::majority(votes);
    }
};

inline RandomForest rf_train(const ForestSpec& spec, const Matrix& features,
                             const std::vector<int>& targets) {
    spec.validate();
    if (features.rows() < 2) throw ValidationError("rf_train: need at least 2 rows");
    if (static_cast<std::size_t>(features.rows()) != targets.size())
        throw ValidationError("rf_train: feature/target row mismatch");
    if (!features.allFinite()) throw ValidationError("rf_train: non-finite features");

    RandomForest forest;
    forest.spec = spec;
    if (std::all_of(targets.begin(), targets.end(),
                    [&](int t) { return t == targets.front(); })) {
        forest.constant_flag = true;
        forest.constant_label = targets.front();
        return forest;
    }

    const Eigen::Index m = features.rows();
    const int n_candidates = std::max(
        1, static_cast<int>(std::round(std::sqrt(static_cast<double>(features.cols())))));
    for (int t = 0; t < spec.n_trees; ++t) {
        const std::uint64_t tree_seed =
            spec.seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(t) + 1;
        std::mt19937_64 rng(tree_seed);
        std::uniform_int_distribution<Eigen::Index> pick(0, m - 1);
        std::vector<Eigen::Index> bootstrap(static_cast<std::size_t>(m));
        for (auto& i : bootstrap) i = pick(rng);
        detail::TreeBuilder builder{features, targets, spec.max_depth, n_candidates, tree_seed,
                                    {}};
        builder.build(bootstrap, 0, 1);
        forest.trees.push_back(std::move(builder.tree));
    }
    return forest;
}

inline int rf_predict(const RandomForest& forest, const Vector& row) {
    return forest.predict(row);
}

} // namespace microact
