#include "botkit/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include <json.hpp>

using nlohmann::json;

namespace botkit::forest {

namespace {

double gini(int64_t bot, int64_t human) {
    int64_t n = bot + human;
    if (n == 0) return 0.0;
    double pb = static_cast<double>(bot) / static_cast<double>(n);
    double ph = static_cast<double>(human) / static_cast<double>(n);
    return 1.0 - pb * pb - ph * ph;
}

struct SplitChoice {
    bool valid = false;
    int feature = -1;
    double threshold = 0.0;
    bool missing_left = true;
    double gain = 0.0;
};

class TreeBuilder {
public:
    TreeBuilder(std::span<const features::FeatureVector> rows, std::span<const int> labels,
                const TrainParams& params, uint64_t tree_seed)
        : rows_(rows), labels_(labels), params_(params), rng_(tree_seed) {
        d_ = rows.empty() ? 0 : static_cast<int>(rows[0].values.size());
        size_t n = rows.size();
        samples_.resize(n);
        if (params.bootstrap) {
            for (size_t i = 0; i < n; ++i)
                samples_[i] = static_cast<uint32_t>(rng_.uniform_int(n));
        } else {
            std::iota(samples_.begin(), samples_.end(), 0u);
        }
    }

    Tree build() {
        Tree t;
        nodes_ = &t.nodes;
        build_node(0, samples_.size(), 0);
        return t;
    }

private:
    int32_t build_node(size_t begin, size_t end, int depth) {
        int64_t bot = 0, human = 0;
        for (size_t i = begin; i < end; ++i) {
            if (labels_[samples_[i]] == 1)
                ++bot;
            else
                ++human;
        }
        int32_t index = static_cast<int32_t>(nodes_->size());
        nodes_->push_back(TreeNode{});
        (*nodes_)[index].bot = bot;
        (*nodes_)[index].human = human;

        size_t n = end - begin;
        bool depth_capped = params_.max_depth > 0 && depth >= params_.max_depth;
        if (bot == 0 || human == 0 || depth_capped ||
            n < 2 * static_cast<size_t>(params_.min_leaf)) {
            return index;
        }
        SplitChoice split = choose_split(begin, end, bot, human);
        if (!split.valid) return index;

        size_t mid = partition(begin, end, split);
        int32_t left = build_node(begin, mid, depth + 1);
        int32_t right = build_node(mid, end, depth + 1);
        TreeNode& node = (*nodes_)[index];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.missing_left = split.missing_left ? 1 : 0;
        node.left = left;
        node.right = right;
        return index;
    }

    SplitChoice choose_split(size_t begin, size_t end, int64_t bot, int64_t human) {
        int mtry = params_.features_per_split > 0
                       ? std::min(params_.features_per_split, d_)
                       : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d_))));
        std::vector<uint32_t> order = rng_.permutation(static_cast<uint32_t>(d_));
        double parent_gini = gini(bot, human);
        int64_t n = bot + human;

        SplitChoice best;
        for (int fi = 0; fi < d_; ++fi) {
            // All of the first mtry features are candidates; past that we keep
            // scanning only while nothing splittable has been found, so a node
            // becomes a leaf only when no feature can separate it.
            if (fi >= mtry && best.valid) break;
            int feature = static_cast<int>(order[fi]);
            scan_feature(begin, end, feature, parent_gini, n, bot, human, best);
        }
        return best;
    }

    void scan_feature(size_t begin, size_t end, int feature, double parent_gini, int64_t n,
                      int64_t bot, int64_t human, SplitChoice& best) {
        present_.clear();
        int64_t missing_bot = 0, missing_human = 0;
        for (size_t i = begin; i < end; ++i) {
            uint32_t row = samples_[i];
            if (rows_[row].missing[feature]) {
                if (labels_[row] == 1)
                    ++missing_bot;
                else
                    ++missing_human;
            } else {
                present_.push_back(row);
            }
        }
        if (present_.size() < 2) return;
        std::sort(present_.begin(), present_.end(), [&](uint32_t a, uint32_t b) {
            double va = rows_[a].values[feature];
            double vb = rows_[b].values[feature];
            if (va != vb) return va < vb;
            return a < b;
        });

        size_t p = present_.size();
        int64_t left_bot = 0, left_human = 0;
        int64_t present_bot = bot - missing_bot;
        int64_t present_human = human - missing_human;
        for (size_t k = 1; k < p; ++k) {
            uint32_t prev = present_[k - 1];
            if (labels_[prev] == 1)
                ++left_bot;
            else
                ++left_human;
            double lo = rows_[prev].values[feature];
            double hi = rows_[present_[k]].values[feature];
            if (!(lo < hi)) continue;
            double threshold = lo + (hi - lo) / 2.0;
            if (!(lo < threshold)) threshold = hi;  // adjacent doubles

            bool missing_left = k >= p - k;  // majority of present rows; ties go left
            int64_t lb = left_bot + (missing_left ? missing_bot : 0);
            int64_t lh = left_human + (missing_left ? missing_human : 0);
            int64_t rb = (present_bot - left_bot) + (missing_left ? 0 : missing_bot);
            int64_t rh = (present_human - left_human) + (missing_left ? 0 : missing_human);
            int64_t nl = lb + lh;
            int64_t nr = rb + rh;
            if (nl < params_.min_leaf || nr < params_.min_leaf) continue;
            double gain = parent_gini -
                          (static_cast<double>(nl) / static_cast<double>(n)) * gini(lb, lh) -
                          (static_cast<double>(nr) / static_cast<double>(n)) * gini(rb, rh);
            if (gain > 1e-12 && gain > best.gain) {
                best.valid = true;
                best.feature = feature;
                best.threshold = threshold;
                best.missing_left = missing_left;
                best.gain = gain;
            }
        }
    }

    size_t partition(size_t begin, size_t end, const SplitChoice& split) {
        auto goes_left = [&](uint32_t row) {
            if (rows_[row].missing[split.feature]) return split.missing_left;
            return rows_[row].values[split.feature] < split.threshold;
        };
        // Stable partition keeps sample order deterministic for child nodes.
        scratch_.clear();
        size_t mid = begin;
        for (size_t i = begin; i < end; ++i) {
            if (goes_left(samples_[i]))
                samples_[mid++] = samples_[i];
            else
                scratch_.push_back(samples_[i]);
        }
        std::copy(scratch_.begin(), scratch_.end(), samples_.begin() + mid);
        return mid;
    }

    std::span<const features::FeatureVector> rows_;
    std::span<const int> labels_;
    TrainParams params_;
    Rng rng_;
    int d_ = 0;
    std::vector<uint32_t> samples_;
    std::vector<uint32_t> present_;
    std::vector<uint32_t> scratch_;
    std::vector<TreeNode>* nodes_ = nullptr;
};

}  // namespace

int Tree::vote(const features::FeatureVector& v) const {
    const TreeNode* node = &nodes[0];
    while (node->feature >= 0) {
        bool left;
        if (v.missing[node->feature])
            left = node->missing_left != 0;
        else
            left = v.values[node->feature] < node->threshold;
        node = &nodes[left ? node->left : node->right];
    }
    return node->bot > node->human ? 1 : 0;
}

Forest train_forest(std::span<const features::FeatureVector> rows, std::span<const int> labels,
                    const TrainParams& params, uint64_t seed, unsigned threads,
                    std::vector<std::string> dataset_names) {
    if (rows.empty()) throw data_error("train_forest: no training rows");
    if (rows.size() != labels.size())
        throw data_error("train_forest: rows and labels differ in length");
    if (params.n_trees < 1) throw config_error("train_forest: n_trees must be >= 1");
    if (params.min_leaf < 1) throw config_error("train_forest: min_leaf must be >= 1");
    if (params.max_depth < 0 || params.features_per_split < 0)
        throw config_error("train_forest: negative parameter");

    const std::string& schema_id = rows[0].schema_id;
    size_t d = rows[0].values.size();
    int64_t bots = 0;
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].schema_id != schema_id)
            throw data_error("train_forest: mixed feature schemas (" + schema_id + " vs " +
                             rows[i].schema_id + ")");
        if (rows[i].values.size() != d || rows[i].missing.size() != d)
            throw data_error("train_forest: inconsistent vector length");
        if (labels[i] != 0 && labels[i] != 1)
            throw data_error("train_forest: labels must be 0 or 1");
        bots += labels[i];
    }
    if (bots == 0 || bots == static_cast<int64_t>(rows.size()))
        throw data_error("train_forest: training data contains a single class");

    Forest f;
    f.schema_id = schema_id;
    f.params = params;
    f.seed = seed;
    f.dataset_names = std::move(dataset_names);
    f.trees.resize(static_cast<size_t>(params.n_trees));
    parallel_for(f.trees.size(), threads, [&](size_t i) {
        uint64_t tree_seed = derive_seed(seed, "tree/" + std::to_string(i));
        TreeBuilder builder(rows, labels, params, tree_seed);
        f.trees[i] = builder.build();
    });
    return f;
}

RawScore score(const Forest& f, const features::FeatureVector& v) {
    if (v.schema_id != f.schema_id)
        throw data_error("score: vector schema " + v.schema_id + " does not match model schema " +
                         f.schema_id);
    if (v.values.size() != v.missing.size())
        throw data_error("score: vector values and missing mask differ in length");
    if (f.trees.empty()) throw data_error("score: empty forest");
    int64_t bot_votes = 0;
    for (const auto& t : f.trees) bot_votes += t.vote(v);
    return static_cast<double>(bot_votes) / static_cast<double>(f.trees.size());
}

std::vector<RawScore> score_all(const Forest& f, std::span<const features::FeatureVector> rows,
                                unsigned threads) {
    std::vector<RawScore> out(rows.size());
    parallel_for(rows.size(), threads, [&](size_t i) { out[i] = score(f, rows[i]); });
    return out;
}

std::vector<std::pair<std::string, double>> feature_importances(const Forest& f) {
    if (f.trees.empty()) throw data_error("feature_importances: empty forest");
    size_t d = 0;
    for (const auto& t : f.trees)
        for (const auto& n : t.nodes)
            if (n.feature >= 0) d = std::max(d, static_cast<size_t>(n.feature) + 1);
    std::vector<std::string> names;
    try {
        const auto& schema = features::feature_schema(f.schema_id);
        d = std::max(d, schema.size());
        for (const auto& def : schema.features) names.push_back(def.name);
    } catch (const config_error&) {
        // Models trained on ad-hoc schemas still get positional names.
    }
    while (names.size() < d) names.push_back("f" + std::to_string(names.size()));

    std::vector<double> acc(d, 0.0);
    for (const auto& t : f.trees) {
        if (t.nodes.empty()) continue;
        double n_root = static_cast<double>(t.nodes[0].bot + t.nodes[0].human);
        if (n_root == 0) continue;
        for (const auto& node : t.nodes) {
            if (node.feature < 0) continue;
            const TreeNode& l = t.nodes[node.left];
            const TreeNode& r = t.nodes[node.right];
            double n = static_cast<double>(node.bot + node.human);
            double nl = static_cast<double>(l.bot + l.human);
            double nr = static_cast<double>(r.bot + r.human);
            double decrease = gini(node.bot, node.human) - (nl / n) * gini(l.bot, l.human) -
                              (nr / n) * gini(r.bot, r.human);
            acc[static_cast<size_t>(node.feature)] += (n / n_root) * decrease;
        }
    }
    for (double& a : acc) a /= static_cast<double>(f.trees.size());
    double total = std::accumulate(acc.begin(), acc.end(), 0.0);
    if (total > 0)
        for (double& a : acc) a /= total;

    std::vector<size_t> idx(d);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
        if (acc[a] != acc[b]) return acc[a] > acc[b];
        return a < b;
    });
    std::vector<std::pair<std::string, double>> out;
    out.reserve(d);
    for (size_t i : idx) out.emplace_back(names[i], acc[i]);
    return out;
}

std::string forest_to_json(const Forest& f) {
    json j;
    j["format_version"] = kForestFormatVersion;
    j["kind"] = "forest";
    j["schema_id"] = f.schema_id;
    j["seed"] = f.seed;
    j["params"] = {{"n_trees", f.params.n_trees},
                   {"max_depth", f.params.max_depth},
                   {"min_leaf", f.params.min_leaf},
                   {"features_per_split", f.params.features_per_split},
                   {"bootstrap", f.params.bootstrap}};
    j["datasets"] = f.dataset_names;
    json trees = json::array();
    for (const auto& t : f.trees) {
        json nodes = json::array();
        for (const auto& n : t.nodes)
            nodes.push_back(json::array(
                {n.feature, n.threshold, n.left, n.right, n.missing_left, n.bot, n.human}));
        trees.push_back(json{{"nodes", std::move(nodes)}});
    }
    j["trees"] = std::move(trees);
    return j.dump();
}

Forest forest_from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw data_error("model file is not valid JSON");
    if (!j.contains("format_version") || j.at("format_version").get<int>() != kForestFormatVersion)
        throw data_error("unsupported forest model format_version (expected " +
                         std::to_string(kForestFormatVersion) + ")");
    if (!j.contains("kind") || j.at("kind").get<std::string>() != "forest")
        throw data_error("model file is not a forest model");
    Forest f;
    f.schema_id = j.at("schema_id").get<std::string>();
    f.seed = j.at("seed").get<uint64_t>();
    const json& p = j.at("params");
    f.params.n_trees = p.at("n_trees").get<int>();
    f.params.max_depth = p.at("max_depth").get<int>();
    f.params.min_leaf = p.at("min_leaf").get<int>();
    f.params.features_per_split = p.at("features_per_split").get<int>();
    f.params.bootstrap = p.at("bootstrap").get<bool>();
    for (const auto& name : j.at("datasets")) f.dataset_names.push_back(name.get<std::string>());
    for (const auto& tj : j.at("trees")) {
        Tree t;
        for (const auto& nj : tj.at("nodes")) {
            if (!nj.is_array() || nj.size() != 7) throw data_error("malformed tree node");
            TreeNode n;
            n.feature = nj[0].get<int32_t>();
            n.threshold = nj[1].get<double>();
            n.left = nj[2].get<int32_t>();
            n.right = nj[3].get<int32_t>();
            n.missing_left = nj[4].get<uint8_t>();
            n.bot = nj[5].get<int64_t>();
            n.human = nj[6].get<int64_t>();
            t.nodes.push_back(n);
        }
        if (t.nodes.empty()) throw data_error("tree with no nodes");
        f.trees.push_back(std::move(t));
    }
    if (f.trees.empty()) throw data_error("forest with no trees");
    return f;
}

void save_forest(const Forest& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write model file: " + path);
    out << forest_to_json(f) << '\n';
}

Forest load_forest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open model file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return forest_from_json(text);
}

}  // namespace botkit::forest
