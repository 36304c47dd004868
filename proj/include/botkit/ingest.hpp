#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "botkit/common.hpp"

namespace botkit::ingest {

// Published platform rate limits, kept as reference constants for capacity
// planning. No API client lives in this toolkit.
constexpr int64_t kUserLookupAccountsPerKeyPerDay = 8'600'000;
constexpr int64_t kTimelineAccountsPerKeyPerDay = 43'200;

// Epoch seconds, UTC. Accepts the classic "Wed Apr 26 06:01:55 +0000 2010" form
// and ISO-8601 ("2010-04-26T06:01:55Z", optional fraction and offset).
int64_t parse_timestamp(std::string_view text);
std::string format_timestamp(int64_t epoch_seconds);  // ISO-8601, Z suffix

// Profile metadata snapshot of one account at observed_at.
struct UserObject {
    std::string id;
    std::string screen_name;
    std::string display_name;
    std::string description;
    int64_t created_at = 0;
    int64_t observed_at = 0;
    int64_t statuses_count = 0;
    int64_t followers_count = 0;
    int64_t friends_count = 0;
    int64_t favourites_count = 0;
    int64_t listed_count = 0;
    bool verified = false;
    bool default_profile = false;
    bool default_profile_image = false;
    bool is_protected = false;  // JSON key "protected"
    // Tri-state: platforms have dropped this field, and "absent" must stay
    // distinguishable from "false" for feature extraction.
    std::optional<bool> geo_enabled;

    bool operator==(const UserObject&) const = default;
};

struct TweetRecord {
    std::string id;
    int64_t created_at = 0;
    std::string text;
    bool is_retweet = false;
    int64_t mention_count = 0;
    int64_t hashtag_count = 0;
    int64_t url_count = 0;
    int64_t retweet_count = 0;
    int64_t favorite_count = 0;
    UserObject author;  // embedded snapshot; author.observed_at == collection time

    bool operator==(const TweetRecord&) const = default;
};

// One JSON object per line. line_no is only used in error messages.
// If the record has no "observed_at", default_observed_at is used when given,
// otherwise observed_at falls back to created_at.
UserObject parse_user_object(std::string_view line, size_t line_no = 0,
                             std::optional<int64_t> default_observed_at = std::nullopt);
TweetRecord parse_tweet(std::string_view line, size_t line_no = 0);

// A user object line with an optional embedded "tweets" array. Tweets without
// their own "user" object borrow the enclosing account's.
struct AccountRecord {
    UserObject user;
    std::vector<TweetRecord> tweets;
};

AccountRecord parse_account_record(std::string_view line, size_t line_no = 0);

std::string user_to_jsonl(const UserObject& u);
std::string tweet_to_jsonl(const TweetRecord& t);

struct LabeledAccount {
    UserObject user;
    std::vector<TweetRecord> tweets;
    bool bot = false;
    std::string bot_class;  // nonempty iff bot
};

struct LabeledDataset {
    std::string name;
    std::vector<LabeledAccount> accounts;
    // Loader bookkeeping: labels whose id never appeared in the data file, and
    // data records that carried no label.
    size_t labels_without_data = 0;
    size_t data_without_labels = 0;

    size_t human_count() const;
    std::map<std::string, size_t> bots_per_class() const;
};

// data_path: JSONL of user objects, each optionally carrying a "tweets" array.
// labels_path: JSONL of {"id":..., "label":"human"|"bot", "class": optional}.
// Only accounts present in both files are kept; bot entries without a "class"
// get the tag "bot".
LabeledDataset load_dataset(const std::string& data_path, const std::string& labels_path,
                            const std::string& name);

void write_dataset(const LabeledDataset& ds, const std::string& data_path,
                   const std::string& labels_path);

// Lognormal quantity: value = mean * exp(dispersion * z). "mean" is the median
// of the distribution in natural units.
struct Quantity {
    double mean = 1.0;
    double dispersion = 0.5;
};

struct ClassSpec {
    std::string name;          // "human" means human label unless bot is forced
    bool bot = false;
    int64_t size = 0;
    Quantity age_days{400, 0.5};
    Quantity statuses_per_day{5, 0.7};
    Quantity followers_per_day{1, 0.8};
    Quantity friends_per_day{1, 0.8};
    Quantity favourites_per_day{2, 0.9};
    Quantity listed_per_day{0.005, 1.0};
    Quantity name_letters{8, 0.25};
    Quantity name_digits{0.5, 0.8};
    Quantity description_words{6, 0.6};
    double p_verified = 0.02;
    double p_default_profile = 0.3;
    double p_default_profile_image = 0.05;
    double p_protected = 0.03;
    double p_geo_known = 0.9;
    double p_geo_true = 0.35;
    // Content generation; tweets_per_account.mean == 0 disables tweets.
    Quantity tweets_per_account{0, 0.5};
    Quantity words_per_tweet{8, 0.4};
    Quantity interevent_seconds{3600, 0.6};
    Quantity tweet_retweets{1, 1.0};
    Quantity tweet_favorites{1, 1.0};
    double p_retweet = 0.2;
    int64_t vocab_size = 60;
};

struct SyntheticSpec {
    uint64_t seed = 0;
    std::vector<ClassSpec> classes;

    void validate() const;
    static SyntheticSpec from_json_file(const std::string& path);
    std::string to_json() const;

    // Built-in corpora used by the bundled experiments:
    //   separable-2000    1000 humans + 1000 spambots, strongly separated
    //   twin-2000         two classes drawn from identical parameters
    //   three-class-900   300 humans + 3 bot classes with distinct signatures
    //   content-240       small corpus with generated tweets for the full schema
    static SyntheticSpec preset(const std::string& name);
};

// Deterministic for a fixed (spec, seed): each account is generated from a
// seed derived from spec.seed, the class name, and the account index.
LabeledDataset generate_synthetic_corpus(const SyntheticSpec& spec,
                                         const std::string& dataset_name = "synthetic");

struct RegistryEntry {
    std::string name;
    std::string data_path;    // resolved relative to the registry file
    std::string labels_path;
    std::string role;         // "train", "candidate", or "holdout"
};

struct Registry {
    std::vector<RegistryEntry> entries;
    static Registry load(const std::string& path);
    std::vector<RegistryEntry> with_role(const std::string& role) const;
};

}  // namespace botkit::ingest
