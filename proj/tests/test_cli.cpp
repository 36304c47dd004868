#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "botkit/cli.hpp"
#include "botkit/forest.hpp"
#include "botkit/ingest.hpp"
#include "helpers.hpp"

using namespace botkit;
using namespace botkit::cli;
using testutil::TempDir;
namespace fs = std::filesystem;

namespace {

int run(std::initializer_list<std::string> args) {
    std::vector<std::string> argv = {"botkit"};
    argv.insert(argv.end(), args.begin(), args.end());
    return run_cli(argv);
}

// Minimal config + registry + data for one synthetic dataset.
void write_project(const TempDir& dir, const std::string& extra_config = "") {
    ingest::SyntheticSpec spec = testutil::scaled_preset("separable-2000", 80, 42);
    ingest::LabeledDataset ds = ingest::generate_synthetic_corpus(spec, "sep");
    ingest::write_dataset(ds, dir.file("sep.data.jsonl"), dir.file("sep.labels.jsonl"));
    testutil::write_file(dir.file("registry.json"),
                         R"({"datasets":[{"name":"sep","data":"sep.data.jsonl",)"
                         R"("labels":"sep.labels.jsonl","role":"train"}]})");
    testutil::write_file(dir.file("run.json"),
                         R"({"seed":42,"output_dir":")" + dir.file("out") +
                             R"(","registry":"registry.json",)"
                             R"("forest":{"n_trees":15})" +
                             extra_config + "}");
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("config parsing is strict") {
    TempDir dir("cfg");
    SUBCASE("unknown top-level key") {
        testutil::write_file(dir.file("c.json"), R"({"seed":1,"zebra":2})");
        CHECK_THROWS_AS(RunConfig::load(dir.file("c.json")), config_error);
    }
    SUBCASE("unknown nested key") {
        testutil::write_file(dir.file("c.json"), R"({"seed":1,"forest":{"trees":10}})");
        CHECK_THROWS_AS(RunConfig::load(dir.file("c.json")), config_error);
    }
    SUBCASE("missing seed") {
        testutil::write_file(dir.file("c.json"), R"({"output_dir":"x"})");
        CHECK_THROWS_AS(RunConfig::load(dir.file("c.json")), config_error);
    }
    SUBCASE("bad model kind") {
        testutil::write_file(dir.file("c.json"), R"({"seed":1,"model":{"kind":"svm"}})");
        CHECK_THROWS_AS(RunConfig::load(dir.file("c.json")), config_error);
    }
    SUBCASE("full config round trips") {
        testutil::write_file(dir.file("c.json"), R"({
            "seed": 7, "output_dir": "o", "schema_id": "full-v1", "registry": "r.json",
            "model": {"kind": "esc"},
            "forest": {"n_trees": 10, "max_depth": 4, "min_leaf": 2, "features_per_split": 3,
                       "bootstrap": false},
            "calibration": {"prior": 0.2, "degree": 8, "folds": 4},
            "esc": {"classes": ["spam"], "calibration_folds": 3},
            "selection": {"min_cv": 0.8, "min_holdout": 0.6,
                          "weights": {"cv": 2, "holdout": 1, "consistency": 0.5}},
            "eval": {"bins": 10, "thresholds": [0.25, 0.5], "model": "m.json", "dataset": "d"}
        })");
        RunConfig cfg = RunConfig::load(dir.file("c.json"));
        CHECK(cfg.seed == 7);
        CHECK(cfg.schema_id == "full-v1");
        CHECK(cfg.model_kind == "esc");
        CHECK(cfg.forest_params.n_trees == 10);
        CHECK_FALSE(cfg.forest_params.bootstrap);
        CHECK(cfg.cap_prior == doctest::Approx(0.2));
        CHECK(cfg.esc_classes == std::vector<std::string>{"spam"});
        CHECK(cfg.policy.w_cv == doctest::Approx(2.0));
        CHECK(cfg.eval_thresholds.size() == 2);
        CHECK(cfg.eval_dataset == "d");
    }
    SUBCASE("default thresholds are 0.1 through 0.9") {
        testutil::write_file(dir.file("c.json"), R"({"seed":1})");
        RunConfig cfg = RunConfig::load(dir.file("c.json"));
        REQUIRE(cfg.eval_thresholds.size() == 9);
        CHECK(cfg.eval_thresholds.front() == doctest::Approx(0.1));
        CHECK(cfg.eval_thresholds.back() == doctest::Approx(0.9));
    }
}

TEST_CASE("synth then train then score then eval") {
    TempDir dir("pipeline");
    write_project(dir);

    CHECK(run({"train", "--config", dir.file("run.json")}) == 0);
    CHECK(fs::exists(dir.file("out/forest.json")));
    CHECK(fs::exists(dir.file("out/cap.json")));
    CHECK(fs::exists(dir.file("out/train_manifest.json")));
    std::string manifest = testutil::read_file(dir.file("out/train_manifest.json"));
    CHECK(manifest.find("\"seed\": 42") != std::string::npos);
    CHECK(manifest.find("forest.json") != std::string::npos);

    CHECK(run({"score", "--model", dir.file("out/forest.json"), "--cap-model",
               dir.file("out/cap.json"), "--input", dir.file("sep.data.jsonl"), "--output",
               dir.file("scores.jsonl"), "--cap", "--display"}) == 0);
    std::string scores = testutil::read_file(dir.file("scores.jsonl"));
    CHECK(scores.find("\"raw\"") != std::string::npos);
    CHECK(scores.find("\"cap\"") != std::string::npos);
    CHECK(scores.find("\"display\"") != std::string::npos);

    // sweep and dist need eval.model / eval.dataset in the config
    testutil::write_file(dir.file("run_eval.json"),
                         R"({"seed":42,"output_dir":")" + dir.file("out") +
                             R"(","registry":"registry.json","forest":{"n_trees":15},)"
                             R"("eval":{"model":")" +
                             dir.file("out/forest.json") + R"(","dataset":"sep"}})");
    CHECK(run({"eval", "--config", dir.file("run_eval.json"), "--mode", "sweep"}) == 0);
    std::string sweep = testutil::read_file(dir.file("out/sweep.csv"));
    CHECK(std::count(sweep.begin(), sweep.end(), '\n') == 10);  // header + 9 default thresholds
    CHECK(run({"eval", "--config", dir.file("run_eval.json"), "--mode", "dist"}) == 0);
    CHECK(fs::exists(dir.file("out/dist.csv")));
    CHECK(fs::exists(dir.file("out/dist_stats.csv")));
}

TEST_CASE("matrix mode on a two-dataset registry emits a 2x2 grid") {
    TempDir dir("matrix2");
    for (int i = 0; i < 2; ++i) {
        std::string name = "m" + std::to_string(i);
        ingest::LabeledDataset ds = ingest::generate_synthetic_corpus(
            testutil::scaled_preset("separable-2000", 50, 700 + static_cast<uint64_t>(i)), name);
        ingest::write_dataset(ds, dir.file(name + ".data.jsonl"), dir.file(name + ".labels.jsonl"));
    }
    testutil::write_file(dir.file("registry.json"), R"({"datasets":[
        {"name":"m0","data":"m0.data.jsonl","labels":"m0.labels.jsonl","role":"train"},
        {"name":"m1","data":"m1.data.jsonl","labels":"m1.labels.jsonl","role":"train"}]})");
    testutil::write_file(dir.file("run.json"),
                         R"({"seed":4,"output_dir":")" + dir.file("out") +
                             R"(","registry":"registry.json","forest":{"n_trees":10}})");
    CHECK(run({"eval", "--config", dir.file("run.json"), "--mode", "matrix"}) == 0);
    std::string csv = testutil::read_file(dir.file("out/matrix.csv"));
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + 2 rows
    CHECK(csv.find("train\\test,m0,m1") == 0);
}

TEST_CASE("full schema flows through train and score with a custom lexicon") {
    TempDir dir("fullcli");
    ingest::SyntheticSpec spec = testutil::scaled_preset("content-240", 40, 33);
    ingest::LabeledDataset ds = ingest::generate_synthetic_corpus(spec, "content");
    ingest::write_dataset(ds, dir.file("content.data.jsonl"), dir.file("content.labels.jsonl"));
    testutil::write_file(dir.file("registry.json"),
                         R"({"datasets":[{"name":"content","data":"content.data.jsonl",)"
                         R"("labels":"content.labels.jsonl","role":"train"}]})");
    testutil::write_file(dir.file("run.json"),
                         R"({"seed":6,"output_dir":")" + dir.file("out") +
                             R"(","schema_id":"full-v1","registry":"registry.json",)"
                             R"("forest":{"n_trees":12}})");
    testutil::write_file(dir.file("lex.tsv"),
                         "great\t1\t0.8\t0.5\nnews\t0\t0.0\t0.3\nw3\t1\t0.2\t0.2\n");
    CHECK(run({"train", "--config", dir.file("run.json"), "--lexicon", dir.file("lex.tsv")}) == 0);
    forest::Forest model = forest::load_forest(dir.file("out/forest.json"));
    CHECK(model.schema_id == "full-v1");

    CHECK(run({"score", "--model", dir.file("out/forest.json"), "--lexicon", dir.file("lex.tsv"),
               "--input", dir.file("content.data.jsonl"), "--output",
               dir.file("scores.jsonl")}) == 0);
    std::string out = testutil::read_file(dir.file("scores.jsonl"));
    CHECK(out.find("\"schema_id\":\"full-v1\"") != std::string::npos);
    CHECK(std::count(out.begin(), out.end(), '\n') ==
          static_cast<long>(ds.accounts.size()));
}

TEST_CASE("score examples from the interface contract") {
    TempDir dir("scorex");
    // Hand-built model scoring exactly 0.6 everywhere.
    forest::Forest f = testutil::constant_forest(6, 10, "lite-v1");
    forest::save_forest(f, dir.file("model.json"));
    ingest::UserObject u = testutil::make_user("acct");
    testutil::write_file(dir.file("in.jsonl"), ingest::user_to_jsonl(u) + "\n");

    CHECK(run({"score", "--model", dir.file("model.json"), "--input", dir.file("in.jsonl"),
               "--output", dir.file("out.jsonl"), "--display"}) == 0);
    std::string out = testutil::read_file(dir.file("out.jsonl"));
    CHECK(out.find("\"raw\":0.6") != std::string::npos);
    CHECK(out.find("\"display\":3.0") != std::string::npos);

    SUBCASE("equal densities pass the prior through as the cap") {
        testutil::write_file(dir.file("cap.json"),
                             R"({"format_version":1,"kind":"cap","prior":0.15,"degree":2,)"
                             R"("w_bot":[1.0,1.0,1.0],"w_human":[1.0,1.0,1.0],)"
                             R"("platt":{"a":1.0,"b":0.0}})");
        CHECK(run({"score", "--model", dir.file("model.json"), "--cap-model", dir.file("cap.json"),
                   "--input", dir.file("in.jsonl"), "--output", dir.file("out2.jsonl"),
                   "--cap"}) == 0);
        std::string out2 = testutil::read_file(dir.file("out2.jsonl"));
        CHECK(out2.find("\"cap\":0.15") != std::string::npos);
    }
    SUBCASE("malformed records produce error entries and exit 2 when all fail") {
        testutil::write_file(dir.file("bad.jsonl"), "{broken\n{also broken\n");
        CHECK(run({"score", "--model", dir.file("model.json"), "--input", dir.file("bad.jsonl"),
                   "--output", dir.file("err.jsonl")}) == 2);
        std::string err = testutil::read_file(dir.file("err.jsonl"));
        CHECK(err.find("\"error\"") != std::string::npos);
        CHECK(err.find("\"line\":1") != std::string::npos);
    }
    SUBCASE("mixed good and bad records exit 0 with per-record errors") {
        // blank line between records: error entries still carry file line numbers
        testutil::write_file(dir.file("mixed.jsonl"),
                             ingest::user_to_jsonl(u) + "\n\n{broken\n");
        CHECK(run({"score", "--model", dir.file("model.json"), "--input", dir.file("mixed.jsonl"),
                   "--output", dir.file("mixed_out.jsonl")}) == 0);
        std::string text = testutil::read_file(dir.file("mixed_out.jsonl"));
        CHECK(text.find("\"raw\"") != std::string::npos);
        CHECK(text.find("\"error\"") != std::string::npos);
        CHECK(text.find("\"line\":3") != std::string::npos);
    }
    SUBCASE("a wrong-typed field is a per-record error, not an abort") {
        std::string bad = ingest::user_to_jsonl(u);
        auto pos = bad.find("\"verified\":false");
        REQUIRE(pos != std::string::npos);
        bad.replace(pos, 16, "\"verified\":\"yes\"");
        testutil::write_file(dir.file("typed.jsonl"), ingest::user_to_jsonl(u) + "\n" + bad + "\n");
        CHECK(run({"score", "--model", dir.file("model.json"), "--input", dir.file("typed.jsonl"),
                   "--output", dir.file("typed_out.jsonl")}) == 0);
        std::string text = testutil::read_file(dir.file("typed_out.jsonl"));
        CHECK(text.find("\"raw\"") != std::string::npos);
        CHECK(text.find("\"error\"") != std::string::npos);
    }
    SUBCASE("score to a file drops a manifest next to it") {
        CHECK(run({"score", "--model", dir.file("model.json"), "--input", dir.file("in.jsonl"),
                   "--output", dir.file("m_out.jsonl")}) == 0);
        std::string manifest = testutil::read_file(dir.file("score_manifest.json"));
        CHECK(manifest.find("\"command\": \"score\"") != std::string::npos);
        CHECK(manifest.find("m_out.jsonl") != std::string::npos);
    }
}

TEST_CASE("esc training and scoring through the cli") {
    TempDir dir("esccli");
    ingest::SyntheticSpec spec = testutil::scaled_preset("three-class-900", 40, 11);
    ingest::LabeledDataset ds = ingest::generate_synthetic_corpus(spec, "tri");
    ingest::write_dataset(ds, dir.file("tri.data.jsonl"), dir.file("tri.labels.jsonl"));
    testutil::write_file(dir.file("registry.json"),
                         R"({"datasets":[{"name":"tri","data":"tri.data.jsonl",)"
                         R"("labels":"tri.labels.jsonl","role":"train"}]})");
    testutil::write_file(dir.file("run.json"),
                         R"({"seed":9,"output_dir":")" + dir.file("out") +
                             R"(","registry":"registry.json","model":{"kind":"esc"},)"
                             R"("forest":{"n_trees":10},"esc":{"calibration_folds":3}})");
    CHECK(run({"train", "--config", dir.file("run.json")}) == 0);
    CHECK(fs::exists(dir.file("out/esc.json")));
    CHECK(fs::exists(dir.file("out/esc_rf0_human.json")));

    CHECK(run({"score", "--model", dir.file("out/esc.json"), "--input", dir.file("tri.data.jsonl"),
               "--output", dir.file("esc_scores.jsonl"), "--esc-subscores"}) == 0);
    std::string out = testutil::read_file(dir.file("esc_scores.jsonl"));
    CHECK(out.find("\"winner\"") != std::string::npos);
    CHECK(out.find("\"sub_scores\"") != std::string::npos);
    CHECK(out.find("\"calibrated\"") != std::string::npos);
}

TEST_CASE("synth writes datasets and honors the output-dir override") {
    TempDir dir("synth");
    CHECK(run({"synth", "--preset", "twin-2000", "--name", "twin", "--out", dir.file("a")}) == 0);
    CHECK(fs::exists(dir.file("a/twin.data.jsonl")));
    CHECK(fs::exists(dir.file("a/twin.labels.jsonl")));
    CHECK(fs::exists(dir.file("a/synth_manifest.json")));

    ::setenv("BOTKIT_OUTPUT_DIR", dir.file("b").c_str(), 1);
    CHECK(run({"synth", "--preset", "twin-2000", "--name", "twin", "--out", dir.file("a")}) == 0);
    ::unsetenv("BOTKIT_OUTPUT_DIR");
    CHECK(fs::exists(dir.file("b/twin.data.jsonl")));
    CHECK(testutil::read_file(dir.file("a/twin.data.jsonl")) ==
          testutil::read_file(dir.file("b/twin.data.jsonl")));
}

TEST_CASE("select runs the harness end to end") {
    TempDir dir("select");
    for (int i = 0; i < 3; ++i) {
        ingest::SyntheticSpec spec =
            testutil::scaled_preset("separable-2000", 40, 500 + static_cast<uint64_t>(i));
        std::string name = "c" + std::to_string(i);
        ingest::LabeledDataset ds = ingest::generate_synthetic_corpus(spec, name);
        ingest::write_dataset(ds, dir.file(name + ".data.jsonl"), dir.file(name + ".labels.jsonl"));
    }
    ingest::LabeledDataset h = ingest::generate_synthetic_corpus(
        testutil::scaled_preset("separable-2000", 40, 600), "h");
    ingest::write_dataset(h, dir.file("h.data.jsonl"), dir.file("h.labels.jsonl"));

    testutil::write_file(dir.file("registry.json"), R"({"datasets":[
        {"name":"c0","data":"c0.data.jsonl","labels":"c0.labels.jsonl","role":"candidate"},
        {"name":"c1","data":"c1.data.jsonl","labels":"c1.labels.jsonl","role":"candidate"},
        {"name":"c2","data":"c2.data.jsonl","labels":"c2.labels.jsonl","role":"candidate"},
        {"name":"h","data":"h.data.jsonl","labels":"h.labels.jsonl","role":"holdout"}]})");
    testutil::write_file(dir.file("run.json"),
                         R"({"seed":3,"output_dir":")" + dir.file("out") +
                             R"(","registry":"registry.json","forest":{"n_trees":10}})");
    CHECK(run({"select", "--config", dir.file("run.json"), "--threads", "2"}) == 0);
    std::string report = testutil::read_file(dir.file("out/selection_report.csv"));
    CHECK(std::count(report.begin(), report.end(), '\n') == 8);  // header + 7 combos
    std::string winner = testutil::read_file(dir.file("out/winner.json"));
    CHECK(winner.find("\"winner\"") != std::string::npos);

    SUBCASE("no candidates is a usage error") {
        testutil::write_file(dir.file("reg2.json"),
                             R"({"datasets":[{"name":"h","data":"h.data.jsonl",)"
                             R"("labels":"h.labels.jsonl","role":"holdout"}]})");
        testutil::write_file(dir.file("run2.json"),
                             R"({"seed":3,"output_dir":")" + dir.file("out2") +
                                 R"(","registry":"reg2.json"})");
        CHECK(run({"select", "--config", dir.file("run2.json")}) == 1);
    }
}

TEST_CASE("exit codes map error kinds") {
    TempDir dir("codes");
    SUBCASE("missing config file is a usage error") {
        CHECK(run({"train", "--config", dir.file("nope.json")}) == 1);
    }
    SUBCASE("config pointing at a missing registry is a usage error") {
        testutil::write_file(dir.file("c.json"),
                             R"({"seed":1,"registry":"missing.json","output_dir":")" +
                                 dir.file("out") + R"("})");
        CHECK(run({"train", "--config", dir.file("c.json")}) == 1);
    }
    SUBCASE("corrupt data file is a data error") {
        testutil::write_file(dir.file("bad.data.jsonl"), "{oops\n");
        testutil::write_file(dir.file("bad.labels.jsonl"), R"({"id":"1","label":"human"})"
                                                           "\n");
        testutil::write_file(dir.file("reg.json"),
                             R"({"datasets":[{"name":"bad","data":"bad.data.jsonl",)"
                             R"("labels":"bad.labels.jsonl","role":"train"}]})");
        testutil::write_file(dir.file("c.json"), R"({"seed":1,"registry":"reg.json",)"
                                                 R"("output_dir":")" +
                                                     dir.file("out") + R"("})");
        CHECK(run({"train", "--config", dir.file("c.json")}) == 2);
    }
    SUBCASE("unknown subcommand is a usage error") { CHECK(run({"frobnicate"}) == 1); }
    SUBCASE("missing required option is a usage error") { CHECK(run({"train"}) == 1); }
}

TEST_CASE("reruns with identical inputs are byte-identical") {
    TempDir dir("determinism");
    write_project(dir);
    CHECK(run({"train", "--config", dir.file("run.json")}) == 0);
    std::string forest_a = testutil::read_file(dir.file("out/forest.json"));
    std::string cap_a = testutil::read_file(dir.file("out/cap.json"));
    std::string manifest_a = testutil::read_file(dir.file("out/train_manifest.json"));
    fs::remove_all(dir.file("out"));
    CHECK(run({"train", "--config", dir.file("run.json"), "--threads", "2"}) == 0);
    CHECK(testutil::read_file(dir.file("out/forest.json")) == forest_a);
    CHECK(testutil::read_file(dir.file("out/cap.json")) == cap_a);
    CHECK(testutil::read_file(dir.file("out/train_manifest.json")) == manifest_a);
}

TEST_SUITE_END();
