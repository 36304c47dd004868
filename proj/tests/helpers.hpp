#pragma once

#include <unistd.h>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "botkit/common.hpp"
#include "botkit/features.hpp"
#include "botkit/forest.hpp"
#include "botkit/ingest.hpp"

namespace testutil {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<uint64_t> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("botkit_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline botkit::ingest::UserObject make_user(const std::string& id = "u1") {
    botkit::ingest::UserObject u;
    u.id = id;
    u.screen_name = "name_" + id;
    u.display_name = "Name " + id;
    u.description = "plain account";
    u.created_at = 1262304000;   // 2010-01-01
    u.observed_at = 1704067200;  // 2024-01-01
    u.statuses_count = 100;
    u.followers_count = 50;
    u.friends_count = 100;
    u.favourites_count = 10;
    u.listed_count = 1;
    u.geo_enabled = true;
    return u;
}

inline botkit::ingest::TweetRecord make_tweet(const botkit::ingest::UserObject& author,
                                              const std::string& id, int64_t created_at,
                                              const std::string& text, bool retweet = false) {
    botkit::ingest::TweetRecord t;
    t.id = id;
    t.created_at = created_at;
    t.text = text;
    t.is_retweet = retweet;
    t.author = author;
    t.author.observed_at = author.observed_at;
    return t;
}

// 1-D feature rows under an ad-hoc schema, convenient for forest tests.
inline std::vector<botkit::features::FeatureVector> toy_rows(std::span<const double> xs,
                                                             const std::string& schema = "toy-1d") {
    std::vector<botkit::features::FeatureVector> rows;
    for (double x : xs) {
        botkit::features::FeatureVector v;
        v.schema_id = schema;
        v.values = {x};
        v.missing = {0};
        rows.push_back(std::move(v));
    }
    return rows;
}

// A forest of n single-leaf trees, k of them voting bot: score is exactly k/n.
inline botkit::forest::Forest constant_forest(int bot_votes, int n_trees,
                                              const std::string& schema = "toy-1d") {
    botkit::forest::Forest f;
    f.schema_id = schema;
    f.params.n_trees = n_trees;
    for (int i = 0; i < n_trees; ++i) {
        botkit::forest::Tree t;
        botkit::forest::TreeNode leaf;
        leaf.bot = i < bot_votes ? 1 : 0;
        leaf.human = i < bot_votes ? 0 : 1;
        t.nodes.push_back(leaf);
        f.trees.push_back(std::move(t));
    }
    return f;
}

// O(n^2) pairwise AUC: mean over (positive, negative) pairs of
// 1[s_p > s_n] + 0.5 * 1[s_p == s_n]. Independent of the rank-sum route.
inline double brute_force_auc(std::span<const double> scores, std::span<const int> labels) {
    double wins = 0.0;
    size_t pairs = 0;
    for (size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j])
                wins += 1.0;
            else if (scores[i] == scores[j])
                wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

// Preset scaled down for unit-test speed.
inline botkit::ingest::SyntheticSpec scaled_preset(const std::string& name, int64_t class_size,
                                                   uint64_t seed) {
    botkit::ingest::SyntheticSpec spec = botkit::ingest::SyntheticSpec::preset(name);
    spec.seed = seed;
    for (auto& c : spec.classes) c.size = class_size;
    return spec;
}

}  // namespace testutil
