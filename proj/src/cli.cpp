#include "botkit/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "botkit/calibrate.hpp"
#include "botkit/esc.hpp"
#include "botkit/eval.hpp"
#include "botkit/features.hpp"
#include "botkit/ingest.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace botkit::cli {

namespace {

json parse_json_file(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw config_error(std::string("cannot open ") + what + ": " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded())
        throw config_error(std::string(what) + " is not valid JSON: " + path);
    return j;
}

[[noreturn]] void unknown_key(const std::string& where, const std::string& key) {
    throw config_error("unknown key '" + key + "' in config section " + where);
}

void apply_config_json(RunConfig& cfg, const json& j,
                       const std::function<std::string(const std::string&)>& resolve) {
    for (const auto& [key, value] : j.items()) {
        if (key == "seed") {
            cfg.seed = value.get<uint64_t>();
            cfg.seed_set = true;
        } else if (key == "output_dir") {
            // Like every other path in the config, relative to the config file.
            cfg.output_dir = resolve(value.get<std::string>());
        } else if (key == "schema_id") {
            cfg.schema_id = value.get<std::string>();
        } else if (key == "registry") {
            cfg.registry_path = resolve(value.get<std::string>());
        } else if (key == "model") {
            for (const auto& [mk, mv] : value.items()) {
                if (mk == "kind")
                    cfg.model_kind = mv.get<std::string>();
                else
                    unknown_key("model", mk);
            }
        } else if (key == "forest") {
            for (const auto& [fk, fv] : value.items()) {
                if (fk == "n_trees")
                    cfg.forest_params.n_trees = fv.get<int>();
                else if (fk == "max_depth")
                    cfg.forest_params.max_depth = fv.get<int>();
                else if (fk == "min_leaf")
                    cfg.forest_params.min_leaf = fv.get<int>();
                else if (fk == "features_per_split")
                    cfg.forest_params.features_per_split = fv.get<int>();
                else if (fk == "bootstrap")
                    cfg.forest_params.bootstrap = fv.get<bool>();
                else
                    unknown_key("forest", fk);
            }
        } else if (key == "calibration") {
            for (const auto& [ck, cv] : value.items()) {
                if (ck == "prior")
                    cfg.cap_prior = cv.get<double>();
                else if (ck == "degree")
                    cfg.cap_degree = cv.get<int>();
                else if (ck == "folds")
                    cfg.calibration_folds = cv.get<int>();
                else
                    unknown_key("calibration", ck);
            }
        } else if (key == "esc") {
            for (const auto& [ek, ev] : value.items()) {
                if (ek == "classes") {
                    for (const auto& c : ev) cfg.esc_classes.push_back(c.get<std::string>());
                } else if (ek == "calibration_folds") {
                    cfg.esc_calibration_folds = ev.get<int>();
                } else {
                    unknown_key("esc", ek);
                }
            }
        } else if (key == "selection") {
            for (const auto& [sk, sv] : value.items()) {
                if (sk == "min_cv")
                    cfg.policy.min_cv = sv.get<double>();
                else if (sk == "min_holdout")
                    cfg.policy.min_holdout = sv.get<double>();
                else if (sk == "weights") {
                    for (const auto& [wk, wv] : sv.items()) {
                        if (wk == "cv")
                            cfg.policy.w_cv = wv.get<double>();
                        else if (wk == "holdout")
                            cfg.policy.w_holdout = wv.get<double>();
                        else if (wk == "consistency")
                            cfg.policy.w_consistency = wv.get<double>();
                        else
                            unknown_key("selection.weights", wk);
                    }
                } else if (sk == "reference_scores") {
                    cfg.reference_scores_path = resolve(sv.get<std::string>());
                } else {
                    unknown_key("selection", sk);
                }
            }
        } else if (key == "eval") {
            for (const auto& [ek, ev] : value.items()) {
                if (ek == "bins")
                    cfg.eval_bins = ev.get<int>();
                else if (ek == "thresholds") {
                    for (const auto& t : ev) cfg.eval_thresholds.push_back(t.get<double>());
                } else if (ek == "model")
                    cfg.eval_model_path = resolve(ev.get<std::string>());
                else if (ek == "dataset")
                    cfg.eval_dataset = ev.get<std::string>();
                else
                    unknown_key("eval", ek);
            }
        } else {
            unknown_key("top level", key);
        }
    }
}

}  // namespace

RunConfig RunConfig::load(const std::string& path) {
    json j = parse_json_file(path, "config");
    RunConfig cfg;
    cfg.path = path;
    fs::path base = fs::path(path).parent_path();
    auto resolve = [&](const std::string& p) { return (base / p).string(); };
    cfg.output_dir = resolve("out");

    try {
        apply_config_json(cfg, j, resolve);
    } catch (const json::exception& e) {
        throw config_error(std::string("config: ") + e.what());
    }
    if (!cfg.seed_set) throw config_error("config is missing required key 'seed'");
    if (cfg.model_kind != "forest" && cfg.model_kind != "esc")
        throw config_error("model.kind must be 'forest' or 'esc'");
    if (cfg.schema_id != "lite-v1" && cfg.schema_id != "full-v1")
        throw config_error("schema_id must be 'lite-v1' or 'full-v1'");
    if (cfg.eval_thresholds.empty())
        for (int i = 1; i <= 9; ++i) cfg.eval_thresholds.push_back(i / 10.0);
    return cfg;
}

std::string RunConfig::resolved_output_dir() const {
    if (const char* env = std::getenv("BOTKIT_OUTPUT_DIR"); env && *env) return env;
    return output_dir;
}

namespace {

// Every command drops a manifest next to its outputs: format version, seed,
// and content hashes of all inputs and outputs. No timestamps or absolute
// paths, so reruns with identical inputs produce identical bytes.
class Manifest {
public:
    Manifest(std::string command, uint64_t seed) : command_(std::move(command)), seed_(seed) {}

    void add_input(const std::string& label, const std::string& path) {
        inputs_[label] = hash_hex(hash_file(path));
    }
    void add_output(const std::string& name, const std::string& path) {
        outputs_[name] = hash_hex(hash_file(path));
    }

    std::string write(const fs::path& dir) {
        json j;
        j["format_version"] = 1;
        j["command"] = command_;
        j["seed"] = seed_;
        j["inputs"] = inputs_;
        j["outputs"] = outputs_;
        fs::path path = dir / (command_ + "_manifest.json");
        std::ofstream out(path, std::ios::binary);
        if (!out) throw data_error("cannot write manifest: " + path.string());
        out << j.dump(2) << '\n';
        return path.string();
    }

private:
    std::string command_;
    uint64_t seed_;
    std::map<std::string, std::string> inputs_;
    std::map<std::string, std::string> outputs_;
};

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write file: " + path.string());
    out << text;
}

struct LoadedRegistry {
    ingest::Registry registry;
    std::map<std::string, ingest::LabeledDataset> datasets;  // by name
};

LoadedRegistry load_registry_datasets(const RunConfig& cfg, Manifest& manifest) {
    if (cfg.registry_path.empty()) throw config_error("config is missing required key 'registry'");
    LoadedRegistry out;
    out.registry = ingest::Registry::load(cfg.registry_path);
    manifest.add_input("registry", cfg.registry_path);
    for (const auto& e : out.registry.entries) {
        out.datasets.emplace(e.name, ingest::load_dataset(e.data_path, e.labels_path, e.name));
        manifest.add_input("data:" + e.name, e.data_path);
        manifest.add_input("labels:" + e.name, e.labels_path);
    }
    return out;
}

void report_dataset(const ingest::LabeledDataset& ds) {
    std::cerr << "dataset " << ds.name << ": " << ds.accounts.size() << " accounts ("
              << ds.human_count() << " human";
    for (const auto& [cls, n] : ds.bots_per_class()) std::cerr << ", " << n << " " << cls;
    std::cerr << ")";
    if (ds.labels_without_data > 0)
        std::cerr << "; warning: " << ds.labels_without_data << " labeled ids missing from data";
    if (ds.data_without_labels > 0)
        std::cerr << "; " << ds.data_without_labels << " unlabeled records skipped";
    std::cerr << "\n";
}

const features::Lexicon& lexicon_for(const std::string& lexicon_path,
                                     features::Lexicon& storage) {
    if (lexicon_path.empty()) return features::Lexicon::builtin();
    storage = features::Lexicon::load_tsv(lexicon_path);
    return storage;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

int cmd_train(const RunConfig& cfg, const std::string& lexicon_path, unsigned threads) {
    Manifest manifest("train", cfg.seed);
    manifest.add_input("config", cfg.path);
    features::Lexicon lexicon_storage;
    const features::Lexicon& lexicon = lexicon_for(lexicon_path, lexicon_storage);
    if (!lexicon_path.empty()) manifest.add_input("lexicon", lexicon_path);

    LoadedRegistry reg = load_registry_datasets(cfg, manifest);
    std::vector<const ingest::LabeledDataset*> train_sets;
    for (const auto& e : reg.registry.with_role("train"))
        train_sets.push_back(&reg.datasets.at(e.name));
    if (train_sets.empty()) throw config_error("registry has no datasets with role 'train'");

    fs::path out_dir(cfg.resolved_output_dir());
    fs::create_directories(out_dir);

    std::vector<features::FeatureVector> rows;
    std::vector<int> labels;
    std::vector<std::string> tags;
    std::vector<std::string> dataset_names;
    for (const auto* ds : train_sets) {
        report_dataset(*ds);
        dataset_names.push_back(ds->name);
        features::DataMatrix m = features::extract_matrix(*ds, cfg.schema_id, lexicon);
        for (size_t i = 0; i < m.rows.size(); ++i) {
            rows.push_back(std::move(m.rows[i]));
            labels.push_back(m.labels[i]);
            tags.push_back(m.class_tags[i]);
        }
    }

    if (cfg.model_kind == "forest") {
        forest::Forest model = forest::train_forest(rows, labels, cfg.forest_params,
                                                    derive_seed(cfg.seed, "train/forest"), threads,
                                                    dataset_names);
        fs::path model_path = out_dir / "forest.json";
        forest::save_forest(model, model_path.string());
        manifest.add_output("forest.json", model_path.string());

        std::vector<double> oof = eval::out_of_fold_scores(rows, labels, cfg.forest_params,
                                                           derive_seed(cfg.seed, "train/calib"),
                                                           cfg.calibration_folds, threads);
        calibrate::CapModel cap =
            calibrate::fit_cap_model(oof, labels, cfg.cap_prior, cfg.cap_degree);
        fs::path cap_path = out_dir / "cap.json";
        calibrate::save_cap_model(cap, cap_path.string());
        manifest.add_output("cap.json", cap_path.string());
        std::cerr << "trained forest (" << model.trees.size() << " trees) -> " << model_path
                  << "\n";
    } else {
        std::map<std::string, esc::BotClassData> by_class;
        std::vector<features::FeatureVector> humans;
        for (size_t i = 0; i < rows.size(); ++i) {
            if (labels[i] == 0) {
                humans.push_back(rows[i]);
            } else {
                auto& cls = by_class[tags[i]];
                cls.tag = tags[i];
                cls.rows.push_back(rows[i]);
            }
        }
        std::vector<esc::BotClassData> bot_classes;
        if (cfg.esc_classes.empty()) {
            for (auto& [tag, data] : by_class) bot_classes.push_back(std::move(data));
        } else {
            for (const auto& tag : cfg.esc_classes) {
                auto it = by_class.find(tag);
                if (it == by_class.end())
                    throw data_error("esc class '" + tag + "' not present in training data");
                bot_classes.push_back(std::move(it->second));
            }
        }
        esc::EscParams params;
        params.forest = cfg.forest_params;
        params.calibration_folds = cfg.esc_calibration_folds;
        esc::EscTraining training =
            esc::train_esc(bot_classes, humans, params, derive_seed(cfg.seed, "train/esc"),
                           threads);
        fs::path model_path = out_dir / "esc.json";
        esc::save_esc(training.ensemble, model_path.string());
        manifest.add_output("esc.json", model_path.string());
        for (size_t i = 0; i < training.ensemble.forests.size(); ++i) {
            // Member files sit next to the container; hash them as outputs too.
            std::string tag = training.ensemble.class_tags[i];
            std::string safe;
            for (char c : tag)
                safe.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
            std::string member = "esc_rf" + std::to_string(i) + "_" + safe + ".json";
            manifest.add_output(member, (out_dir / member).string());
        }
        calibrate::CapModel cap = calibrate::fit_cap_model(
            training.oof_winner_scores, training.oof_labels, cfg.cap_prior, cfg.cap_degree);
        fs::path cap_path = out_dir / "cap.json";
        calibrate::save_cap_model(cap, cap_path.string());
        manifest.add_output("cap.json", cap_path.string());
        std::cerr << "trained esc ensemble (" << training.ensemble.forests.size()
                  << " forests) -> " << model_path << "\n";
    }
    manifest.write(out_dir);
    return 0;
}

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

struct ScoreFlags {
    bool cap = false;
    bool display = false;
    bool esc_subscores = false;
};

struct LoadedModel {
    std::string kind;  // "forest" or "esc"
    forest::Forest forest;
    esc::EscEnsemble ensemble;
    const std::string& schema_id() const {
        return kind == "forest" ? forest.schema_id : ensemble.schema_id;
    }
    uint64_t seed() const { return kind == "forest" ? forest.seed : ensemble.seed; }
};

LoadedModel load_model(const std::string& path) {
    json j = parse_json_file(path, "model");
    if (!j.contains("kind") || !j.at("kind").is_string())
        throw data_error("model file has no kind field: " + path);
    LoadedModel m;
    m.kind = j.at("kind").get<std::string>();
    if (m.kind == "forest")
        m.forest = forest::load_forest(path);
    else if (m.kind == "esc")
        m.ensemble = esc::load_esc(path);
    else
        throw data_error("unknown model kind '" + m.kind + "' in " + path);
    return m;
}

int cmd_score(const std::string& model_path, const std::string& input_path,
              const std::string& output_path, const std::string& cap_model_path,
              const std::string& lexicon_path, const ScoreFlags& flags, unsigned threads) {
    LoadedModel model = load_model(model_path);
    features::Lexicon lexicon_storage;
    const features::Lexicon& lexicon = lexicon_for(lexicon_path, lexicon_storage);

    std::optional<calibrate::CapModel> cap;
    if (!cap_model_path.empty()) cap = calibrate::load_cap_model(cap_model_path);
    if (flags.cap && !cap)
        throw config_error("--cap requires --cap-model");

    std::ifstream in(input_path);
    if (!in) throw data_error("cannot open input: " + input_path);
    std::ostream* out = &std::cout;
    std::ofstream out_file;
    if (!output_path.empty() && output_path != "-") {
        out_file.open(output_path, std::ios::binary);
        if (!out_file) throw data_error("cannot write output: " + output_path);
        out = &out_file;
    }

    const std::string& schema_id = model.schema_id();
    size_t ok = 0, failed = 0;
    std::vector<std::pair<size_t, std::string>> batch;  // (line number, text)
    std::vector<std::string> results;
    std::string line;
    size_t line_no = 0;

    auto score_one = [&](const std::string& text, size_t line_no) -> std::string {
        try {
            ingest::AccountRecord rec = ingest::parse_account_record(text, line_no);
            features::FeatureVector v =
                schema_id == "lite-v1"
                    ? features::extract_lite_features(rec.user)
                    : features::extract_full_features(rec.user, rec.tweets, lexicon);
            json r;
            r["v"] = 1;
            r["id"] = rec.user.id;
            r["schema_id"] = schema_id;
            double raw;
            if (model.kind == "forest") {
                raw = forest::score(model.forest, v);
            } else {
                esc::EscResult er = esc::esc_score(model.ensemble, v);
                raw = er.sub_scores[static_cast<size_t>(er.winner)];
                r["winner"] = er.winner_class;
                r["calibrated"] = er.final_score;
                if (flags.esc_subscores) {
                    json sub;
                    for (size_t i = 0; i < er.sub_scores.size(); ++i)
                        sub[model.ensemble.class_tags[i]] = er.sub_scores[i];
                    r["sub_scores"] = std::move(sub);
                }
            }
            r["raw"] = raw;
            if (cap && model.kind == "forest")
                r["calibrated"] = calibrate::apply_platt(cap->platt, raw);
            if (flags.cap) r["cap"] = calibrate::cap_from_raw(*cap, raw);
            if (flags.display) r["display"] = calibrate::display_score(raw);
            return r.dump();
        } catch (const std::exception& e) {
            json r;
            r["v"] = 1;
            r["line"] = line_no;
            r["error"] = e.what();
            return std::string("\x01") + r.dump();  // marker: failed record
        }
    };

    auto flush_batch = [&] {
        results.assign(batch.size(), {});
        parallel_for(batch.size(), threads,
                     [&](size_t i) { results[i] = score_one(batch[i].second, batch[i].first); });
        for (auto& s : results) {
            if (!s.empty() && s[0] == '\x01') {
                ++failed;
                *out << s.substr(1) << '\n';
            } else {
                ++ok;
                *out << s << '\n';
            }
        }
        batch.clear();
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty()) batch.emplace_back(line_no, line);
        if (batch.size() >= 8192) flush_batch();
    }
    flush_batch();
    out->flush();
    if (out == &out_file) {
        out_file.close();
        Manifest manifest("score", model.seed());
        manifest.add_input("model", model_path);
        if (!cap_model_path.empty()) manifest.add_input("cap_model", cap_model_path);
        if (!lexicon_path.empty()) manifest.add_input("lexicon", lexicon_path);
        manifest.add_input("input", input_path);
        fs::path out_path(output_path);
        manifest.add_output(out_path.filename().string(), output_path);
        manifest.write(out_path.has_parent_path() ? out_path.parent_path() : fs::path("."));
    }

    std::cerr << "scored " << ok << " accounts, " << failed << " failed\n";
    if (ok == 0 && failed > 0) return static_cast<int>(errc::data);
    return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

const ingest::LabeledDataset& dataset_by_name(const LoadedRegistry& reg, const std::string& name) {
    auto it = reg.datasets.find(name);
    if (it == reg.datasets.end())
        throw config_error("eval.dataset '" + name + "' not found in registry");
    return it->second;
}

int cmd_eval(const RunConfig& cfg, const std::string& mode, unsigned threads) {
    if (mode != "matrix" && mode != "dist" && mode != "sweep")
        throw config_error("eval mode must be matrix, dist, or sweep");
    Manifest manifest("eval_" + mode, cfg.seed);
    manifest.add_input("config", cfg.path);
    LoadedRegistry reg = load_registry_datasets(cfg, manifest);
    fs::path out_dir(cfg.resolved_output_dir());
    fs::create_directories(out_dir);

    if (mode == "matrix") {
        std::vector<ingest::LabeledDataset> datasets;
        for (const auto& e : reg.registry.entries) datasets.push_back(reg.datasets.at(e.name));
        eval::GeneralizabilityMatrix m = eval::generalizability_matrix(
            datasets, cfg.forest_params, derive_seed(cfg.seed, "eval/matrix"), threads,
            cfg.schema_id);
        fs::path csv = out_dir / "matrix.csv";
        write_text_file(csv, m.to_csv());
        manifest.add_output("matrix.csv", csv.string());
        std::cerr << "wrote " << csv << "\n";
    } else {
        if (cfg.eval_model_path.empty())
            throw config_error("eval." + mode + " requires eval.model in the config");
        if (cfg.eval_dataset.empty())
            throw config_error("eval." + mode + " requires eval.dataset in the config");
        manifest.add_input("model", cfg.eval_model_path);
        forest::Forest model = forest::load_forest(cfg.eval_model_path);
        const ingest::LabeledDataset& ds = dataset_by_name(reg, cfg.eval_dataset);
        if (mode == "dist") {
            eval::ScoreDistributions dist =
                eval::score_distributions(model, ds, cfg.eval_bins, threads);
            fs::path csv = out_dir / "dist.csv";
            fs::path stats = out_dir / "dist_stats.csv";
            write_text_file(csv, dist.to_csv());
            write_text_file(stats, dist.stats_csv());
            manifest.add_output("dist.csv", csv.string());
            manifest.add_output("dist_stats.csv", stats.string());
            std::cerr << "wrote " << csv << " and " << stats << "\n";
        } else {
            features::DataMatrix m = features::extract_matrix(ds, model.schema_id);
            std::vector<double> scores = forest::score_all(model, m.rows, threads);
            auto rows = eval::threshold_sweep(scores, m.labels, cfg.eval_thresholds);
            fs::path csv = out_dir / "sweep.csv";
            write_text_file(csv, eval::sweep_to_csv(rows));
            manifest.add_output("sweep.csv", csv.string());
            std::cerr << "wrote " << csv << "\n";
        }
    }
    manifest.write(out_dir);
    return 0;
}

// ---------------------------------------------------------------------------
// select
// ---------------------------------------------------------------------------

std::map<std::string, double> load_reference_scores(const std::string& path) {
    std::map<std::string, double> out;
    if (path.empty()) return out;
    std::ifstream in(path);
    if (!in) throw data_error("cannot open reference scores: " + path);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("id") || !j.contains("score"))
            throw data_error("reference scores line " + std::to_string(line_no) +
                             ": expected {\"id\":..., \"score\":...}");
        out[j.at("id").is_string() ? j.at("id").get<std::string>()
                                   : std::to_string(j.at("id").get<int64_t>())] =
            j.at("score").get<double>();
    }
    return out;
}

int cmd_select(const RunConfig& cfg, unsigned threads) {
    Manifest manifest("select", cfg.seed);
    manifest.add_input("config", cfg.path);
    LoadedRegistry reg = load_registry_datasets(cfg, manifest);

    std::vector<std::string> candidate_names;
    std::vector<const ingest::LabeledDataset*> holdouts;
    for (const auto& e : reg.registry.entries) {
        if (e.role == "candidate") candidate_names.push_back(e.name);
        if (e.role == "holdout") holdouts.push_back(&reg.datasets.at(e.name));
    }
    if (candidate_names.empty())
        throw config_error("registry has no datasets with role 'candidate'");

    std::map<std::string, double> reference = load_reference_scores(cfg.reference_scores_path);
    if (!cfg.reference_scores_path.empty())
        manifest.add_input("reference_scores", cfg.reference_scores_path);

    auto combos = selection::enumerate_combos(candidate_names);
    std::vector<selection::ComboReport> reports(combos.size());
    parallel_for(combos.size(), threads, [&](size_t i) {
        std::vector<const ingest::LabeledDataset*> combo;
        for (const auto& name : combos[i]) combo.push_back(&reg.datasets.at(name));
        uint32_t bitmask = static_cast<uint32_t>(i) + 1;  // enumeration order is mask order
        reports[i] = selection::evaluate_combo(
            combo, holdouts, reference, cfg.forest_params,
            derive_seed(cfg.seed, "combo/" + std::to_string(bitmask)), 1);
        reports[i].bitmask = bitmask;
    });

    selection::SelectionOutcome outcome = selection::select_winner(reports, cfg.policy);

    fs::path out_dir(cfg.resolved_output_dir());
    fs::create_directories(out_dir);
    fs::path csv = out_dir / "selection_report.csv";
    write_text_file(csv, selection::reports_to_csv(reports));
    manifest.add_output("selection_report.csv", csv.string());
    fs::path winner = out_dir / "winner.json";
    write_text_file(winner, outcome.to_json() + "\n");
    manifest.add_output("winner.json", winner.string());
    manifest.write(out_dir);

    if (outcome.winner) {
        std::cerr << "winner:";
        for (const auto& n : outcome.winner->combo) std::cerr << ' ' << n;
        std::cerr << "\n";
    } else {
        std::cerr << "no admissible combo\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

int cmd_synth(const std::string& preset, const std::string& spec_path, const std::string& name,
              std::optional<uint64_t> seed_override, const std::string& out_dir_flag) {
    if (preset.empty() == spec_path.empty())
        throw config_error("synth needs exactly one of --preset or --spec");
    ingest::SyntheticSpec spec = preset.empty() ? ingest::SyntheticSpec::from_json_file(spec_path)
                                                : ingest::SyntheticSpec::preset(preset);
    if (seed_override) spec.seed = *seed_override;

    std::string out_dir_value = out_dir_flag;
    if (const char* env = std::getenv("BOTKIT_OUTPUT_DIR"); env && *env) out_dir_value = env;
    fs::path out_dir(out_dir_value);
    fs::create_directories(out_dir);

    ingest::LabeledDataset ds = ingest::generate_synthetic_corpus(spec, name);
    fs::path data = out_dir / (name + ".data.jsonl");
    fs::path labels = out_dir / (name + ".labels.jsonl");
    ingest::write_dataset(ds, data.string(), labels.string());

    Manifest manifest("synth", spec.seed);
    if (!spec_path.empty()) manifest.add_input("spec", spec_path);
    manifest.add_output(name + ".data.jsonl", data.string());
    manifest.add_output(name + ".labels.jsonl", labels.string());
    manifest.write(out_dir);
    report_dataset(ds);
    std::cerr << "wrote " << data << " and " << labels << "\n";
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"botkit: social bot detection toolkit"};
    app.require_subcommand(1);
    unsigned threads = 1;
    app.add_option("--threads", threads, "worker threads for training and batch scoring")
        ->capture_default_str();
    std::string lexicon_path;
    app.add_option("--lexicon", lexicon_path,
                   "sentiment lexicon TSV (token, adjective, valence, arousal)");

    std::string config_path;
    auto add_config = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "run config JSON")->required();
    };

    CLI::App* train = app.add_subcommand("train", "train a forest or ESC model plus CAP model");
    add_config(train);

    CLI::App* score = app.add_subcommand("score", "score accounts from a JSONL file");
    std::string model_path, input_path, output_path = "-", cap_model_path;
    ScoreFlags flags;
    score->add_option("--model", model_path, "model file (forest or esc)")->required();
    score->add_option("--input", input_path, "input JSONL of user objects")->required();
    score->add_option("--output", output_path, "output JSONL ('-' for stdout)");
    score->add_option("--cap-model", cap_model_path, "cap model file");
    score->add_flag("--cap", flags.cap, "emit CAP posterior (needs --cap-model)");
    score->add_flag("--display", flags.display, "emit 0-5 display score");
    score->add_flag("--esc-subscores", flags.esc_subscores, "emit per-class sub-scores");

    CLI::App* eval_cmd = app.add_subcommand("eval", "matrix / dist / sweep reports");
    std::string eval_mode;
    add_config(eval_cmd);
    eval_cmd->add_option("--mode", eval_mode, "matrix, dist, or sweep")->required();

    CLI::App* select = app.add_subcommand("select", "training-set selection over candidates");
    add_config(select);

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic labeled corpus");
    std::string preset, spec_path, synth_name = "synthetic", synth_out = "out";
    std::optional<uint64_t> synth_seed;
    synth->add_option("--preset", preset,
                      "separable-2000, twin-2000, three-class-900, or content-240");
    synth->add_option("--spec", spec_path, "synthetic spec JSON file");
    synth->add_option("--name", synth_name, "dataset name and file stem");
    synth->add_option("--seed", synth_seed, "override the spec seed");
    synth->add_option("--out", synth_out, "output directory");

    for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(errc::config);
    }

    try {
        if (*train) return cmd_train(RunConfig::load(config_path), lexicon_path, threads);
        if (*score)
            return cmd_score(model_path, input_path, output_path, cap_model_path, lexicon_path,
                             flags, threads);
        if (*eval_cmd) return cmd_eval(RunConfig::load(config_path), eval_mode, threads);
        if (*select) return cmd_select(RunConfig::load(config_path), threads);
        if (*synth) return cmd_synth(preset, spec_path, synth_name, synth_seed, synth_out);
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(errc::config);
    }
    return static_cast<int>(errc::config);
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace botkit::cli
