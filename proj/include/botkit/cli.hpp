#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "botkit/common.hpp"
#include "botkit/forest.hpp"
#include "botkit/selection.hpp"

namespace botkit::cli {

// Single run configuration; every command draws its randomness from `seed`
// through named child seeds. Unknown keys anywhere in the file are rejected.
struct RunConfig {
    uint64_t seed = 0;
    bool seed_set = false;
    std::string output_dir = "out";  // resolved relative to the config file
    std::string schema_id = "lite-v1";
    std::string registry_path;
    std::string model_kind = "forest";  // "forest" or "esc"
    forest::TrainParams forest_params;
    double cap_prior = 0.15;
    int cap_degree = 10;
    int calibration_folds = 5;
    std::vector<std::string> esc_classes;  // empty: every bot class in the data
    int esc_calibration_folds = 5;
    selection::SelectionPolicy policy;
    std::string reference_scores_path;
    int eval_bins = 20;
    std::vector<double> eval_thresholds;  // defaults to 0.1 .. 0.9
    std::string eval_model_path;
    std::string eval_dataset;

    std::string path;  // where the config was loaded from

    static RunConfig load(const std::string& path);
    // BOTKIT_OUTPUT_DIR wins over the configured output directory.
    std::string resolved_output_dir() const;
};

// Exit codes: 0 ok, 1 usage/config, 2 data validation, 3 numeric failure.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);  // args[0] is the program name

}  // namespace botkit::cli
