#include "botkit/esc.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

using nlohmann::json;

namespace botkit::esc {

std::vector<double> voting_transform(std::span<const double> sub_scores) {
    std::vector<double> out(sub_scores.begin(), sub_scores.end());
    if (!out.empty()) out[0] = 1.0 - out[0];
    return out;
}

int winning_index(std::span<const double> transformed) {
    if (transformed.empty()) throw data_error("winning_index: no scores");
    int best = 0;
    for (int i = 1; i < static_cast<int>(transformed.size()); ++i)
        if (transformed[static_cast<size_t>(i)] > transformed[static_cast<size_t>(best)]) best = i;
    return best;
}

namespace {

struct PooledSample {
    const features::FeatureVector* row;
    int class_index;  // 0 = human, i >= 1 = bot class i
};

// Per-class shuffle dealt round-robin, so every fold sees every class.
std::vector<int> class_stratified_folds(std::span<const PooledSample> samples, size_t n_classes,
                                        int folds, uint64_t seed) {
    std::vector<int> assignment(samples.size(), 0);
    for (size_t cls = 0; cls < n_classes; ++cls) {
        std::vector<size_t> idx;
        for (size_t i = 0; i < samples.size(); ++i)
            if (samples[i].class_index == static_cast<int>(cls)) idx.push_back(i);
        Rng rng(derive_seed(seed, "esc-folds/" + std::to_string(cls)));
        std::vector<uint32_t> perm = rng.permutation(static_cast<uint32_t>(idx.size()));
        for (size_t k = 0; k < idx.size(); ++k)
            assignment[idx[perm[k]]] = static_cast<int>(k % static_cast<size_t>(folds));
    }
    return assignment;
}

// Trains rf_0 (humans vs all bots) and one forest per bot class (class vs
// humans) from an arbitrary subset of the pooled samples.
std::vector<forest::Forest> train_members(std::span<const PooledSample> samples, size_t n_bot,
                                          const forest::TrainParams& params, uint64_t seed,
                                          unsigned threads) {
    std::vector<forest::Forest> members(n_bot + 1);
    parallel_for(n_bot + 1, threads, [&](size_t m) {
        std::vector<features::FeatureVector> rows;
        std::vector<int> labels;
        for (const auto& s : samples) {
            if (m == 0) {
                rows.push_back(*s.row);
                labels.push_back(s.class_index == 0 ? 0 : 1);
            } else if (s.class_index == 0 || s.class_index == static_cast<int>(m)) {
                rows.push_back(*s.row);
                labels.push_back(s.class_index == 0 ? 0 : 1);
            }
        }
        members[m] = forest::train_forest(rows, labels, params,
                                          derive_seed(seed, "rf/" + std::to_string(m)), 1);
    });
    return members;
}

std::vector<double> member_scores(const std::vector<forest::Forest>& members,
                                  const features::FeatureVector& v) {
    std::vector<double> s(members.size());
    for (size_t i = 0; i < members.size(); ++i) s[i] = forest::score(members[i], v);
    return s;
}

std::string member_file_name(const std::string& stem, size_t index, const std::string& tag) {
    std::string safe;
    for (char c : tag)
        safe.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    return stem + "_rf" + std::to_string(index) + "_" + safe + ".json";
}

}  // namespace

EscTraining train_esc(std::span<const BotClassData> bot_classes,
                      std::span<const features::FeatureVector> humans, const EscParams& params,
                      uint64_t seed, unsigned threads) {
    if (bot_classes.empty()) throw data_error("train_esc: need at least one bot class");
    if (humans.empty()) throw data_error("train_esc: human data is empty");
    if (params.calibration_folds < 2)
        throw config_error("train_esc: calibration_folds must be >= 2");
    std::set<std::string> tags;
    for (const auto& c : bot_classes) {
        if (c.tag.empty() || c.tag == "human")
            throw data_error("train_esc: invalid bot class tag '" + c.tag + "'");
        if (!tags.insert(c.tag).second)
            throw data_error("train_esc: duplicate bot class tag '" + c.tag + "'");
        if (c.rows.empty()) throw data_error("train_esc: bot class '" + c.tag + "' is empty");
        if (c.rows.size() < static_cast<size_t>(params.calibration_folds))
            throw data_error("train_esc: bot class '" + c.tag + "' has fewer samples than folds");
    }
    if (humans.size() < static_cast<size_t>(params.calibration_folds))
        throw data_error("train_esc: fewer human samples than folds");

    const std::string& schema_id = humans[0].schema_id;
    std::vector<PooledSample> pooled;
    for (const auto& r : humans) {
        if (r.schema_id != schema_id) throw data_error("train_esc: mixed schemas in human data");
        pooled.push_back({&r, 0});
    }
    for (size_t c = 0; c < bot_classes.size(); ++c)
        for (const auto& r : bot_classes[c].rows) {
            if (r.schema_id != schema_id)
                throw data_error("train_esc: mixed schemas in class '" + bot_classes[c].tag + "'");
            pooled.push_back({&r, static_cast<int>(c) + 1});
        }

    size_t n_bot = bot_classes.size();
    int folds = params.calibration_folds;
    std::vector<int> fold_of =
        class_stratified_folds(pooled, n_bot + 1, folds, derive_seed(seed, "esc-calib"));

    EscTraining out;
    for (int f = 0; f < folds; ++f) {
        std::vector<PooledSample> train_part;
        std::vector<const PooledSample*> test_part;
        for (size_t i = 0; i < pooled.size(); ++i) {
            if (fold_of[i] == f)
                test_part.push_back(&pooled[i]);
            else
                train_part.push_back(pooled[i]);
        }
        if (test_part.empty()) continue;
        std::vector<forest::Forest> members = train_members(
            train_part, n_bot, params.forest, derive_seed(seed, "esc-fold/" + std::to_string(f)),
            threads);
        for (const PooledSample* s : test_part) {
            std::vector<double> sub = member_scores(members, *s->row);
            std::vector<double> transformed = voting_transform(sub);
            int winner = winning_index(transformed);
            out.oof_winner_scores.push_back(sub[static_cast<size_t>(winner)]);
            out.oof_labels.push_back(s->class_index == 0 ? 0 : 1);
        }
    }

    EscEnsemble& e = out.ensemble;
    e.schema_id = schema_id;
    e.seed = seed;
    e.class_tags.push_back("human");
    for (const auto& c : bot_classes) e.class_tags.push_back(c.tag);
    e.forests = train_members(pooled, n_bot, params.forest, derive_seed(seed, "esc-final"),
                              threads);
    e.calibrator = calibrate::fit_platt(out.oof_winner_scores, out.oof_labels);
    return out;
}

EscResult esc_score(const EscEnsemble& e, const features::FeatureVector& v, unsigned threads) {
    if (e.forests.empty()) throw data_error("esc_score: empty ensemble");
    if (v.schema_id != e.schema_id)
        throw data_error("esc_score: vector schema " + v.schema_id +
                         " does not match ensemble schema " + e.schema_id);
    EscResult r;
    r.sub_scores.resize(e.forests.size());
    parallel_for(e.forests.size(), threads,
                 [&](size_t i) { r.sub_scores[i] = forest::score(e.forests[i], v); });
    r.transformed = voting_transform(r.sub_scores);
    r.winner = winning_index(r.transformed);
    r.winner_class = e.class_tags[static_cast<size_t>(r.winner)];
    r.final_score = calibrate::apply_platt(e.calibrator, r.sub_scores[static_cast<size_t>(r.winner)]);
    return r;
}

void save_esc(const EscEnsemble& e, const std::string& path) {
    namespace fs = std::filesystem;
    fs::path p(path);
    std::string stem = p.stem().string();
    fs::path dir = p.parent_path();

    json j;
    j["format_version"] = kEscFormatVersion;
    j["kind"] = "esc";
    j["schema_id"] = e.schema_id;
    j["seed"] = e.seed;
    j["class_tags"] = e.class_tags;
    j["platt"] = {{"a", e.calibrator.a}, {"b", e.calibrator.b}};
    json members = json::array();
    for (size_t i = 0; i < e.forests.size(); ++i) {
        std::string name = member_file_name(stem, i, e.class_tags[i]);
        forest::save_forest(e.forests[i], (dir / name).string());
        members.push_back(name);
    }
    j["members"] = std::move(members);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write esc model: " + path);
    out << j.dump() << '\n';
}

EscEnsemble load_esc(const std::string& path) {
    namespace fs = std::filesystem;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open esc model: " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw data_error("esc model file is not valid JSON");
    if (!j.contains("format_version") || j.at("format_version").get<int>() != kEscFormatVersion)
        throw data_error("unsupported esc model format_version (expected " +
                         std::to_string(kEscFormatVersion) + ")");
    if (!j.contains("kind") || j.at("kind").get<std::string>() != "esc")
        throw data_error("model file is not an esc model");
    EscEnsemble e;
    e.schema_id = j.at("schema_id").get<std::string>();
    e.seed = j.at("seed").get<uint64_t>();
    for (const auto& t : j.at("class_tags")) e.class_tags.push_back(t.get<std::string>());
    e.calibrator.a = j.at("platt").at("a").get<double>();
    e.calibrator.b = j.at("platt").at("b").get<double>();
    fs::path dir = fs::path(path).parent_path();
    for (const auto& m : j.at("members"))
        e.forests.push_back(forest::load_forest((dir / m.get<std::string>()).string()));
    if (e.forests.size() != e.class_tags.size() || e.class_tags.empty() ||
        e.class_tags[0] != "human")
        throw data_error("esc model: member list does not match class tags");
    for (const auto& f : e.forests)
        if (f.schema_id != e.schema_id) throw data_error("esc model: member schema mismatch");
    return e;
}

}  // namespace botkit::esc
