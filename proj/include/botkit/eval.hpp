#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "botkit/common.hpp"
#include "botkit/features.hpp"
#include "botkit/forest.hpp"
#include "botkit/ingest.hpp"

namespace botkit::eval {

// Mid-ranks (1-based) with ties sharing their average rank.
std::vector<double> midranks(std::span<const double> values);

// Mann-Whitney rank-sum AUC with mid-rank tie handling. labels are 0/1 and
// both classes must be present. Depends only on score ordering, so any
// strictly increasing transform of the scores leaves the result bit-identical.
double auc(std::span<const double> scores, std::span<const int> labels);

// Spearman rank correlation (mid-ranks, Pearson on ranks).
double spearman(std::span<const double> a, std::span<const double> b);

// Deterministic stratified fold assignment: fold index per row.
std::vector<int> stratified_folds(std::span<const int> labels, int folds, uint64_t seed);

// Out-of-fold raw scores from k-fold retraining; the usual input for both
// cross-validated AUC and calibrator fitting.
std::vector<double> out_of_fold_scores(std::span<const features::FeatureVector> rows,
                                       std::span<const int> labels,
                                       const forest::TrainParams& params, uint64_t seed,
                                       int folds = 5, unsigned threads = 1);

// AUC of pooled out-of-fold scores.
double cv_auc(std::span<const features::FeatureVector> rows, std::span<const int> labels,
              const forest::TrainParams& params, uint64_t seed, int folds = 5,
              unsigned threads = 1);

// Cross-dataset AUC grid: cell (i, j) trains on dataset i and tests on j.
// The diagonal holds 5-fold CV (plain resubstitution would saturate it).
struct GeneralizabilityMatrix {
    std::vector<std::string> names;         // row = train, column = test
    std::vector<std::vector<double>> cells;
    std::string to_csv() const;
};

GeneralizabilityMatrix generalizability_matrix(std::span<const ingest::LabeledDataset> datasets,
                                               const forest::TrainParams& params, uint64_t seed,
                                               unsigned threads = 1,
                                               const std::string& schema_id = "lite-v1");

struct ClassHistogram {
    std::string class_tag;
    size_t count = 0;
    std::vector<double> mass;  // sums to 1
    double median = 0.0;
    double skewness = 0.0;
};

struct ScoreDistributions {
    std::vector<double> edges;  // bins + 1 edges over [0,1], right-closed bins
    std::vector<ClassHistogram> classes;
    std::string to_csv() const;
    std::string stats_csv() const;
};

ScoreDistributions score_distributions(std::span<const double> scores,
                                       std::span<const std::string> class_tags, int bins = 20);
ScoreDistributions score_distributions(const forest::Forest& model,
                                       const ingest::LabeledDataset& ds, int bins = 20,
                                       unsigned threads = 1);

struct SweepRow {
    double threshold = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double prevalence = 0.0;  // fraction of accounts called bot at this threshold
};

// Accounts with score >= threshold are called bots. Precision with no positive
// calls is reported as 0.
std::vector<SweepRow> threshold_sweep(std::span<const double> scores, std::span<const int> labels,
                                      std::span<const double> thresholds);

std::string sweep_to_csv(std::span<const SweepRow> rows);

}  // namespace botkit::eval
