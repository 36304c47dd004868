#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "botkit/common.hpp"
#include "botkit/features.hpp"

namespace botkit::forest {

// Raw bot score: fraction of trees voting "bot", on a 1/n_trees grid.
using RawScore = double;

struct TrainParams {
    int n_trees = 100;
    int max_depth = 0;           // 0 = unlimited
    int min_leaf = 1;
    int features_per_split = 0;  // 0 = ceil(sqrt(d))
    bool bootstrap = true;
};

struct TreeNode {
    int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int32_t left = -1;
    int32_t right = -1;
    // Direction for rows whose split feature is missing, learned at training.
    uint8_t missing_left = 1;
    // Training label counts at this node (kept for all nodes, so leaf votes and
    // impurity-based importances are both recoverable from a saved model).
    int64_t bot = 0;
    int64_t human = 0;
};

struct Tree {
    std::vector<TreeNode> nodes;
    // Majority vote of the reached leaf; ties vote human.
    int vote(const features::FeatureVector& v) const;
};

struct Forest {
    std::string schema_id;
    TrainParams params;
    uint64_t seed = 0;
    std::vector<std::string> dataset_names;
    std::vector<Tree> trees;
};

// Gini-split random forest on bootstrap resamples with per-split feature
// subsampling. Fully deterministic: tree i uses derive_seed(seed, "tree/i"),
// so results are independent of thread count.
Forest train_forest(std::span<const features::FeatureVector> rows, std::span<const int> labels,
                    const TrainParams& params, uint64_t seed, unsigned threads = 1,
                    std::vector<std::string> dataset_names = {});

RawScore score(const Forest& f, const features::FeatureVector& v);

std::vector<RawScore> score_all(const Forest& f, std::span<const features::FeatureVector> rows,
                                unsigned threads = 1);

// Mean impurity decrease per feature, normalized to sum 1, sorted descending
// (ties broken by feature index).
std::vector<std::pair<std::string, double>> feature_importances(const Forest& f);

constexpr int kForestFormatVersion = 1;

std::string forest_to_json(const Forest& f);
Forest forest_from_json(const std::string& text);
void save_forest(const Forest& f, const std::string& path);
Forest load_forest(const std::string& path);

}  // namespace botkit::forest
