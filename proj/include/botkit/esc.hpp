#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "botkit/calibrate.hpp"
#include "botkit/common.hpp"
#include "botkit/forest.hpp"

namespace botkit::esc {

// Ensemble of Specialized Classifiers: forests[0] is the human-specialized
// model (trained on humans vs the union of all bot classes); forests[i >= 1]
// are trained on bot class i vs humans. Every forest outputs a bot score.
struct EscEnsemble {
    std::string schema_id;
    std::vector<std::string> class_tags;  // tags[0] == "human"
    std::vector<forest::Forest> forests;
    calibrate::PlattParams calibrator;    // applied to the winning sub-score
    uint64_t seed = 0;
};

struct EscResult {
    std::vector<double> sub_scores;   // s_i, bot score of each specialist
    std::vector<double> transformed;  // s'_0 = 1 - s_0, s'_i = s_i
    int winner = 0;                   // argmax of transformed; ties -> lowest index
    std::string winner_class;
    double final_score = 0.0;         // Platt-calibrated winning sub-score
};

// The voting transform and argmax, exposed separately so they can be checked
// against the formula directly.
std::vector<double> voting_transform(std::span<const double> sub_scores);
int winning_index(std::span<const double> transformed);

struct EscParams {
    forest::TrainParams forest;
    int calibration_folds = 5;  // out-of-fold winner scores feed the calibrator
};

struct BotClassData {
    std::string tag;
    std::vector<features::FeatureVector> rows;
};

struct EscTraining {
    EscEnsemble ensemble;
    // Pooled out-of-fold winner scores and bot labels; used to fit the
    // calibrator and reusable for CAP fitting downstream.
    std::vector<double> oof_winner_scores;
    std::vector<int> oof_labels;
};

EscTraining train_esc(std::span<const BotClassData> bot_classes,
                      std::span<const features::FeatureVector> humans, const EscParams& params,
                      uint64_t seed, unsigned threads = 1);

EscResult esc_score(const EscEnsemble& e, const features::FeatureVector& v, unsigned threads = 1);

constexpr int kEscFormatVersion = 1;

// The container references its member forest files by name, next to it.
void save_esc(const EscEnsemble& e, const std::string& path);
EscEnsemble load_esc(const std::string& path);

}  // namespace botkit::esc
