#include "botkit/selection.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "botkit/eval.hpp"
#include "botkit/features.hpp"

using nlohmann::json;

namespace botkit::selection {

std::vector<std::vector<std::string>> enumerate_combos(std::span<const std::string> candidates) {
    if (candidates.empty()) throw data_error("enumerate_combos: no candidates");
    if (candidates.size() > 16)
        throw data_error("enumerate_combos: more than 16 candidates; exhaustive search refused");
    std::set<std::string> unique(candidates.begin(), candidates.end());
    if (unique.size() != candidates.size())
        throw data_error("enumerate_combos: duplicate candidate names");

    uint32_t k = static_cast<uint32_t>(candidates.size());
    std::vector<std::vector<std::string>> out;
    out.reserve((1u << k) - 1);
    for (uint32_t mask = 1; mask < (1u << k); ++mask) {
        std::vector<std::string> combo;
        for (uint32_t i = 0; i < k; ++i)
            if (mask & (1u << i)) combo.push_back(candidates[i]);
        out.push_back(std::move(combo));
    }
    return out;
}

ComboReport evaluate_combo(std::span<const ingest::LabeledDataset* const> combo,
                           std::span<const ingest::LabeledDataset* const> holdouts,
                           const std::map<std::string, double>& reference_scores,
                           const forest::TrainParams& params, uint64_t seed, unsigned threads) {
    if (combo.empty()) throw data_error("evaluate_combo: empty combo");

    std::unordered_set<std::string> combo_ids;
    ComboReport report;
    std::vector<features::FeatureVector> rows;
    std::vector<int> labels;
    for (const auto* ds : combo) {
        report.combo.push_back(ds->name);
        // The selection harness always works on the metadata-only schema.
        features::DataMatrix m = features::extract_matrix(*ds, "lite-v1");
        for (size_t i = 0; i < m.rows.size(); ++i) {
            rows.push_back(std::move(m.rows[i]));
            labels.push_back(m.labels[i]);
            combo_ids.insert(m.ids[i]);
        }
    }
    for (const auto* h : holdouts)
        for (const auto& a : h->accounts)
            if (combo_ids.count(a.user.id))
                throw data_error("evaluate_combo: account " + a.user.id +
                                 " appears in both combo and holdout '" + h->name + "'");

    report.cv_auc = eval::cv_auc(rows, labels, params, derive_seed(seed, "combo-cv"), 5, threads);

    forest::Forest model =
        forest::train_forest(rows, labels, params, derive_seed(seed, "combo-model"), threads);

    std::vector<double> probe_model, probe_reference;
    for (const auto* h : holdouts) {
        features::DataMatrix m = features::extract_matrix(*h, "lite-v1");
        std::vector<double> scores = forest::score_all(model, m.rows, threads);
        report.holdout_auc.emplace_back(h->name, eval::auc(scores, m.labels));
        for (size_t i = 0; i < m.ids.size(); ++i) {
            auto it = reference_scores.find(m.ids[i]);
            if (it != reference_scores.end()) {
                probe_model.push_back(scores[i]);
                probe_reference.push_back(it->second);
            }
        }
    }
    if (!reference_scores.empty() && probe_model.size() >= 2)
        report.consistency = eval::spearman(probe_model, probe_reference);
    return report;
}

bool admissible(const ComboReport& r, const SelectionPolicy& policy) {
    if (r.cv_auc < policy.min_cv) return false;
    for (const auto& [name, a] : r.holdout_auc)
        if (a < policy.min_holdout) return false;
    return true;
}

double policy_score(const ComboReport& r, const SelectionPolicy& policy) {
    double mean_holdout = 0.0;
    for (const auto& [name, a] : r.holdout_auc) mean_holdout += a;
    if (!r.holdout_auc.empty()) mean_holdout /= static_cast<double>(r.holdout_auc.size());

    double total = policy.w_cv * r.cv_auc;
    double weight = policy.w_cv;
    if (!r.holdout_auc.empty()) {
        total += policy.w_holdout * mean_holdout;
        weight += policy.w_holdout;
    }
    if (r.consistency) {
        total += policy.w_consistency * *r.consistency;
        weight += policy.w_consistency;
    }
    return weight > 0 ? total / weight : 0.0;
}

SelectionOutcome select_winner(std::span<const ComboReport> reports,
                               const SelectionPolicy& policy) {
    if (reports.empty()) throw data_error("select_winner: no reports");
    const ComboReport* best = nullptr;
    double best_score = 0.0;
    for (const auto& r : reports) {
        if (!admissible(r, policy)) continue;
        double s = policy_score(r, policy);
        if (!best) {
            best = &r;
            best_score = s;
            continue;
        }
        if (s > best_score) {
            best = &r;
            best_score = s;
        } else if (s == best_score) {
            // Deterministic tie-break regardless of report order.
            if (r.combo.size() < best->combo.size() ||
                (r.combo.size() == best->combo.size() && r.combo < best->combo)) {
                best = &r;
            }
        }
    }
    SelectionOutcome out;
    if (best) out.winner = *best;
    return out;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return std::string(buf);
}

}  // namespace

std::string reports_to_csv(std::span<const ComboReport> reports) {
    std::ostringstream out;
    // Header lists holdouts from the first report; all reports share them.
    out << "bitmask,combo,cv_auc";
    if (!reports.empty())
        for (const auto& [name, a] : reports.front().holdout_auc) out << ",holdout_" << name;
    out << ",consistency\n";
    for (const auto& r : reports) {
        out << r.bitmask << ',';
        for (size_t i = 0; i < r.combo.size(); ++i) {
            if (i) out << '+';
            out << r.combo[i];
        }
        out << ',' << fmt(r.cv_auc);
        for (const auto& [name, a] : r.holdout_auc) out << ',' << fmt(a);
        out << ',' << (r.consistency ? fmt(*r.consistency) : std::string()) << '\n';
    }
    return out.str();
}

std::string SelectionOutcome::to_json() const {
    json j;
    if (winner) {
        j["winner"] = winner->combo;
        j["bitmask"] = winner->bitmask;
        j["cv_auc"] = winner->cv_auc;
        json h;
        for (const auto& [name, a] : winner->holdout_auc) h[name] = a;
        j["holdout_auc"] = std::move(h);
        if (winner->consistency) j["consistency"] = *winner->consistency;
    } else {
        j["winner"] = nullptr;
        j["reason"] = "no admissible combo";
    }
    return j.dump(2);
}

}  // namespace botkit::selection
