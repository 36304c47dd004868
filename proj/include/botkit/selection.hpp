#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "botkit/common.hpp"
#include "botkit/forest.hpp"
#include "botkit/ingest.hpp"

namespace botkit::selection {

// All 2^k - 1 nonempty subsets in ascending bitmask order (bit i = candidate i).
// Capped at 16 candidates; beyond that the call refuses instead of sampling.
std::vector<std::vector<std::string>> enumerate_combos(std::span<const std::string> candidates);

struct ComboReport {
    std::vector<std::string> combo;  // dataset names, candidate order
    uint32_t bitmask = 0;
    double cv_auc = 0.0;
    std::vector<std::pair<std::string, double>> holdout_auc;  // per holdout dataset
    std::optional<double> consistency;  // Spearman vs reference scores; empty if no reference
};

// Trains a lite-schema forest on the union of the combo datasets, then scores
// 5-fold CV AUC, AUC per holdout, and rank consistency against a reference
// scorer on the holdout accounts present in reference_scores.
ComboReport evaluate_combo(std::span<const ingest::LabeledDataset* const> combo,
                           std::span<const ingest::LabeledDataset* const> holdouts,
                           const std::map<std::string, double>& reference_scores,
                           const forest::TrainParams& params, uint64_t seed,
                           unsigned threads = 1);

struct SelectionPolicy {
    double min_cv = 0.9;
    double min_holdout = 0.7;  // applies to the worst holdout AUC
    double w_cv = 1.0;
    double w_holdout = 1.0;
    double w_consistency = 1.0;
};

bool admissible(const ComboReport& r, const SelectionPolicy& policy);

// Weighted mean of the available metrics (consistency only when present).
double policy_score(const ComboReport& r, const SelectionPolicy& policy);

struct SelectionOutcome {
    std::optional<ComboReport> winner;  // empty: no admissible combo
    std::string to_json() const;
};

// Among admissible combos, maximizes the policy score; ties prefer fewer
// datasets, then lexicographically smaller name lists. Invariant under
// reordering of the report list.
SelectionOutcome select_winner(std::span<const ComboReport> reports,
                               const SelectionPolicy& policy);

std::string reports_to_csv(std::span<const ComboReport> reports);

}  // namespace botkit::selection
