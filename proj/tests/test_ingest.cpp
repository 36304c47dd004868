#include <doctest.h>

#include <algorithm>

#include "botkit/eval.hpp"
#include "botkit/features.hpp"
#include "botkit/forest.hpp"
#include "botkit/ingest.hpp"
#include "helpers.hpp"

using namespace botkit;
using namespace botkit::ingest;
using testutil::TempDir;

TEST_SUITE_BEGIN("ingest");

TEST_CASE("timestamp parsing handles classic and iso forms") {
    int64_t classic = parse_timestamp("Mon Apr 26 06:01:55 +0000 2010");
    int64_t iso = parse_timestamp("2010-04-26T06:01:55Z");
    CHECK(classic == iso);
    CHECK(format_timestamp(iso) == "2010-04-26T06:01:55Z");
    // Offsets shift toward UTC.
    CHECK(parse_timestamp("2010-04-26T08:01:55+02:00") == iso);
    CHECK(parse_timestamp("Mon Apr 26 08:01:55 +0200 2010") == iso);
    CHECK(parse_timestamp("2010-04-26 06:01:55.250Z") == iso);
    CHECK(parse_timestamp("1970-01-01T00:00:00Z") == 0);
    CHECK_THROWS_AS(parse_timestamp("yesterday"), data_error);
}

TEST_CASE("parse_user_object copies fields and validates counts") {
    std::string line = R"({"id":"42","screen_name":"bob","name":"Bob","description":"hi",)"
                       R"("created_at":"2010-04-26T06:01:55Z","observed_at":"2020-01-01T00:00:00Z",)"
                       R"("statuses_count":5,"followers_count":50,"friends_count":100,)"
                       R"("favourites_count":1,"listed_count":0,"verified":true,)"
                       R"("default_profile":false,"default_profile_image":false,)"
                       R"("protected":false,"geo_enabled":false})";
    UserObject u = parse_user_object(line);
    CHECK(u.id == "42");
    CHECK(u.followers_count == 50);
    CHECK(u.friends_count == 100);
    CHECK(u.verified);
    REQUIRE(u.geo_enabled.has_value());
    CHECK_FALSE(*u.geo_enabled);

    SUBCASE("missing geo_enabled stays absent, not false") {
        std::string no_geo = R"({"id":"1","screen_name":"a","created_at":"2010-01-01T00:00:00Z",)"
                             R"("statuses_count":0,"followers_count":0,"friends_count":0,)"
                             R"("favourites_count":0,"listed_count":0})";
        UserObject v = parse_user_object(no_geo);
        CHECK_FALSE(v.geo_enabled.has_value());
    }
    SUBCASE("negative count is a validation error") {
        std::string bad = R"({"id":"1","screen_name":"a","created_at":"2010-01-01T00:00:00Z",)"
                          R"("statuses_count":-1,"followers_count":0,"friends_count":0,)"
                          R"("favourites_count":0,"listed_count":0})";
        CHECK_THROWS_AS(parse_user_object(bad), data_error);
    }
    SUBCASE("missing count is rejected") {
        std::string bad = R"({"id":"1","screen_name":"a","created_at":"2010-01-01T00:00:00Z",)"
                          R"("followers_count":0,"friends_count":0,)"
                          R"("favourites_count":0,"listed_count":0})";
        CHECK_THROWS_AS(parse_user_object(bad), data_error);
    }
    SUBCASE("malformed json reports the line number") {
        try {
            parse_user_object("{not json", 17);
            FAIL("expected data_error");
        } catch (const data_error& e) {
            CHECK(std::string(e.what()).find("line 17") != std::string::npos);
        }
    }
    SUBCASE("wrong-typed fields become data errors with line numbers") {
        std::string bad = R"({"id":"1","screen_name":"a","created_at":"2010-01-01T00:00:00Z",)"
                          R"("statuses_count":0,"followers_count":0,"friends_count":0,)"
                          R"("favourites_count":0,"listed_count":0,"verified":"yes"})";
        try {
            parse_user_object(bad, 9);
            FAIL("expected data_error");
        } catch (const data_error& e) {
            CHECK(std::string(e.what()).find("line 9") != std::string::npos);
        }
    }
    SUBCASE("created_at after observed_at is rejected") {
        std::string bad = R"({"id":"1","screen_name":"a","created_at":"2021-01-01T00:00:00Z",)"
                          R"("observed_at":"2020-01-01T00:00:00Z","statuses_count":0,)"
                          R"("followers_count":0,"friends_count":0,"favourites_count":0,)"
                          R"("listed_count":0})";
        CHECK_THROWS_AS(parse_user_object(bad), data_error);
    }
}

TEST_CASE("parse_tweet handles retweets, entities, and the embedded user") {
    std::string author = R"({"id":"9","screen_name":"a","created_at":"2010-01-01T00:00:00Z",)"
                         R"("statuses_count":1,"followers_count":0,"friends_count":0,)"
                         R"("favourites_count":0,"listed_count":0})";
    std::string line = R"({"id":"t1","created_at":"2015-06-01T12:00:00Z","text":"hi @x @y",)"
                       R"("retweeted_status":{"id":"t0"},)"
                       R"("entities":{"user_mentions":[{},{}],"hashtags":[],"urls":[{}]},)"
                       R"("retweet_count":3,"favorite_count":1,"user":)" +
                       author + "}";
    TweetRecord t = parse_tweet(line);
    CHECK(t.is_retweet);
    CHECK(t.mention_count == 2);
    CHECK(t.hashtag_count == 0);
    CHECK(t.url_count == 1);
    // Embedded snapshot: author pinned to the tweet's collection time.
    CHECK(t.author.observed_at == t.created_at);

    SUBCASE("explicit collected_at wins") {
        std::string c = R"({"id":"t2","created_at":"2015-06-01T12:00:00Z",)"
                        R"("collected_at":"2015-07-01T00:00:00Z","text":"x","user":)" +
                        author + "}";
        TweetRecord t2 = parse_tweet(c);
        CHECK(t2.author.observed_at == parse_timestamp("2015-07-01T00:00:00Z"));
    }
    SUBCASE("tweet without embedded user is a structural error") {
        std::string bad = R"({"id":"t3","created_at":"2015-06-01T12:00:00Z","text":"x"})";
        CHECK_THROWS_AS(parse_tweet(bad), data_error);
    }
}

TEST_CASE("user and tweet round-trip through jsonl") {
    Rng rng(99);
    for (int i = 0; i < 50; ++i) {
        UserObject u = testutil::make_user("rt" + std::to_string(i));
        u.statuses_count = static_cast<int64_t>(rng.uniform_int(100000));
        u.followers_count = static_cast<int64_t>(rng.uniform_int(100000));
        u.description = i % 3 ? "words and more words" : "";
        u.verified = rng.bernoulli(0.5);
        u.default_profile = rng.bernoulli(0.5);
        u.is_protected = rng.bernoulli(0.2);
        if (i % 3 == 0)
            u.geo_enabled.reset();
        else
            u.geo_enabled = rng.bernoulli(0.5);
        UserObject back = parse_user_object(user_to_jsonl(u));
        CHECK(back == u);

        TweetRecord t = testutil::make_tweet(u, "tw" + std::to_string(i),
                                             u.created_at + 1000 + i, "go go go", i % 2 == 0);
        t.mention_count = static_cast<int64_t>(rng.uniform_int(4));
        t.retweet_count = static_cast<int64_t>(rng.uniform_int(50));
        TweetRecord tback = parse_tweet(tweet_to_jsonl(t));
        CHECK(tback == t);
    }
}

TEST_CASE("load_dataset joins data and labels") {
    TempDir dir("load");
    UserObject a = testutil::make_user("1"), b = testutil::make_user("2"),
               c = testutil::make_user("3");
    testutil::write_file(dir.file("d.jsonl"), user_to_jsonl(a) + "\n" + user_to_jsonl(b) + "\n" +
                                                  user_to_jsonl(c) + "\n");
    testutil::write_file(dir.file("l.jsonl"),
                         R"({"id":"1","label":"human"})"
                         "\n"
                         R"({"id":"2","label":"bot","class":"spam"})"
                         "\n"
                         R"({"id":"3","label":"bot","class":"spam"})"
                         "\n");
    LabeledDataset ds = load_dataset(dir.file("d.jsonl"), dir.file("l.jsonl"), "t");
    CHECK(ds.accounts.size() == 3);
    CHECK(ds.human_count() == 1);
    CHECK(ds.bots_per_class().at("spam") == 2);

    SUBCASE("label without data becomes a warning count") {
        testutil::write_file(dir.file("l2.jsonl"),
                             R"({"id":"1","label":"human"})"
                             "\n"
                             R"({"id":"404","label":"bot","class":"x"})"
                             "\n");
        LabeledDataset d2 = load_dataset(dir.file("d.jsonl"), dir.file("l2.jsonl"), "t2");
        CHECK(d2.accounts.size() == 1);
        CHECK(d2.labels_without_data == 1);
        CHECK(d2.data_without_labels == 2);
    }
    SUBCASE("duplicate id in the data file is an error") {
        testutil::write_file(dir.file("dup.jsonl"), user_to_jsonl(a) + "\n" + user_to_jsonl(a) + "\n");
        CHECK_THROWS_AS(load_dataset(dir.file("dup.jsonl"), dir.file("l.jsonl"), "t3"), data_error);
    }
    SUBCASE("bot label without class falls back to tag 'bot'") {
        testutil::write_file(dir.file("l3.jsonl"), R"({"id":"1","label":"bot"})"
                                                   "\n");
        LabeledDataset d3 = load_dataset(dir.file("d.jsonl"), dir.file("l3.jsonl"), "t4");
        REQUIRE(d3.accounts.size() == 1);
        CHECK(d3.accounts[0].bot_class == "bot");
    }
}

TEST_CASE("dataset write/load round trip preserves accounts and tweets") {
    SyntheticSpec spec = testutil::scaled_preset("content-240", 12, 3);
    LabeledDataset ds = generate_synthetic_corpus(spec, "roundtrip");
    TempDir dir("rt");
    write_dataset(ds, dir.file("d.jsonl"), dir.file("l.jsonl"));
    LabeledDataset back = load_dataset(dir.file("d.jsonl"), dir.file("l.jsonl"), "roundtrip");
    REQUIRE(back.accounts.size() == ds.accounts.size());
    for (size_t i = 0; i < ds.accounts.size(); ++i) {
        CHECK(back.accounts[i].user == ds.accounts[i].user);
        CHECK(back.accounts[i].bot == ds.accounts[i].bot);
        CHECK(back.accounts[i].bot_class == ds.accounts[i].bot_class);
        REQUIRE(back.accounts[i].tweets.size() == ds.accounts[i].tweets.size());
        for (size_t k = 0; k < ds.accounts[i].tweets.size(); ++k)
            CHECK(back.accounts[i].tweets[k] == ds.accounts[i].tweets[k]);
    }
}

TEST_CASE("synthetic generation is deterministic per (spec, seed)") {
    SyntheticSpec spec = testutil::scaled_preset("separable-2000", 40, 42);
    LabeledDataset a = generate_synthetic_corpus(spec);
    LabeledDataset b = generate_synthetic_corpus(spec);
    REQUIRE(a.accounts.size() == b.accounts.size());
    for (size_t i = 0; i < a.accounts.size(); ++i) CHECK(a.accounts[i].user == b.accounts[i].user);

    spec.seed = 43;
    LabeledDataset c = generate_synthetic_corpus(spec);
    bool any_diff = false;
    for (size_t i = 0; i < a.accounts.size(); ++i)
        if (!(a.accounts[i].user == c.accounts[i].user)) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("every tweet keeps the embedded-snapshot invariant") {
    SyntheticSpec spec = testutil::scaled_preset("content-240", 20, 9);
    LabeledDataset ds = generate_synthetic_corpus(spec);
    size_t tweets = 0;
    for (const auto& acct : ds.accounts)
        for (const auto& t : acct.tweets) {
            ++tweets;
            CHECK(t.author.observed_at == 1704067200);  // corpus collection time
            CHECK(t.author.id == acct.user.id);
        }
    CHECK(tweets > 0);
}

// Downstream oracle: a separable spec must be learnable, identical class
// parameters must not be.
TEST_CASE("separable corpus reaches cv auc >= 0.95") {
    SyntheticSpec spec = testutil::scaled_preset("separable-2000", 150, 42);
    LabeledDataset ds = generate_synthetic_corpus(spec);
    features::DataMatrix m = features::extract_matrix(ds, "lite-v1");
    forest::TrainParams params;
    params.n_trees = 30;
    double auc = eval::cv_auc(m.rows, m.labels, params, 7, 5, 2);
    CHECK(auc >= 0.95);
}

TEST_CASE("twin classes with identical parameters are indistinguishable") {
    SyntheticSpec spec = SyntheticSpec::preset("twin-2000");
    LabeledDataset ds = generate_synthetic_corpus(spec);
    features::DataMatrix m = features::extract_matrix(ds, "lite-v1");
    forest::TrainParams params;
    params.n_trees = 30;
    double auc = eval::cv_auc(m.rows, m.labels, params, 7, 5, 2);
    CHECK(auc >= 0.45);
    CHECK(auc <= 0.55);
}

TEST_CASE("synthetic spec json round trip and validation") {
    SyntheticSpec spec = testutil::scaled_preset("three-class-900", 10, 5);
    TempDir dir("spec");
    testutil::write_file(dir.file("spec.json"), spec.to_json());
    SyntheticSpec back = SyntheticSpec::from_json_file(dir.file("spec.json"));
    LabeledDataset a = generate_synthetic_corpus(spec);
    LabeledDataset b = generate_synthetic_corpus(back);
    REQUIRE(a.accounts.size() == b.accounts.size());
    for (size_t i = 0; i < a.accounts.size(); ++i) CHECK(a.accounts[i].user == b.accounts[i].user);

    SUBCASE("unknown keys are rejected") {
        testutil::write_file(dir.file("bad.json"), R"({"seed":1,"classes":[],"bogus":2})");
        CHECK_THROWS_AS(SyntheticSpec::from_json_file(dir.file("bad.json")), config_error);
    }
    SUBCASE("nonpositive dispersion is rejected") {
        SyntheticSpec bad = spec;
        bad.classes[0].age_days.dispersion = 0.0;
        CHECK_THROWS_AS(bad.validate(), config_error);
    }
    SUBCASE("nonpositive size is rejected") {
        SyntheticSpec bad = spec;
        bad.classes[0].size = 0;
        CHECK_THROWS_AS(bad.validate(), config_error);
    }
}

TEST_CASE("registry loads entries with roles and resolves paths") {
    TempDir dir("reg");
    testutil::write_file(dir.file("a.jsonl"), "");
    testutil::write_file(dir.file("reg.json"), R"({"datasets":[
        {"name":"x","data":"a.jsonl","labels":"a.jsonl","role":"candidate"},
        {"name":"y","data":"a.jsonl","labels":"a.jsonl"}]})");
    Registry reg = Registry::load(dir.file("reg.json"));
    REQUIRE(reg.entries.size() == 2);
    CHECK(reg.entries[0].role == "candidate");
    CHECK(reg.entries[1].role == "train");
    CHECK(reg.with_role("candidate").size() == 1);
    CHECK(reg.entries[0].data_path.find(dir.file("a.jsonl")) != std::string::npos);

    SUBCASE("unknown role rejected") {
        testutil::write_file(dir.file("bad.json"),
                             R"({"datasets":[{"name":"x","data":"a","labels":"a","role":"zebra"}]})");
        CHECK_THROWS_AS(Registry::load(dir.file("bad.json")), config_error);
    }
    SUBCASE("duplicate names rejected") {
        testutil::write_file(dir.file("dup.json"), R"({"datasets":[
            {"name":"x","data":"a","labels":"a"},{"name":"x","data":"a","labels":"a"}]})");
        CHECK_THROWS_AS(Registry::load(dir.file("dup.json")), config_error);
    }
}

TEST_SUITE_END();
