#include "botkit/features.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace botkit::features {

namespace {

std::vector<FeatureDef> lite_feature_defs() {
    using enum Tier;
    return {
        {"account_age_hours", "hours between created_at and observed_at", metadata},
        {"statuses_count", "total statuses", metadata},
        {"followers_count", "total followers", metadata},
        {"friends_count", "total friends (followees)", metadata},
        {"favourites_count", "total favourites given", metadata},
        {"listed_count", "list memberships", metadata},
        {"statuses_rate", "statuses per hour of account age", metadata},
        {"followers_rate", "followers per hour of account age", metadata},
        {"friends_rate", "friends per hour of account age", metadata},
        {"favourites_rate", "favourites per hour of account age", metadata},
        {"listed_rate", "list memberships per hour of account age", metadata},
        {"friend_follower_ratio", "friends / max(followers, 1)", metadata},
        {"screen_name_entropy", "character entropy of the screen name, bits", metadata},
        {"screen_name_digit_count", "digits in the screen name", metadata},
        {"screen_name_length", "characters in the screen name", metadata},
        {"description_length", "characters in the profile description", metadata},
        {"verified", "verified flag", metadata},
        {"default_profile", "default profile flag", metadata},
        {"default_profile_image", "default profile image flag", metadata},
        {"protected", "protected flag", metadata},
        {"geo_enabled_known", "1 when the geo_enabled field was present", metadata},
        {"geo_enabled_value", "geo_enabled value; masked when the field was absent", metadata},
    };
}

std::vector<FeatureDef> full_feature_defs() {
    using enum Tier;
    auto defs = lite_feature_defs();
    defs.push_back({"word_entropy", "token entropy over all tweet text, bits", content});
    defs.push_back({"tweet_retweet_ratio", "original tweets / max(retweets, 1)", content});
    defs.push_back({"interevent_std_seconds",
                    "std dev of gaps between consecutive tweets; masked below 3 tweets", temporal});
    defs.push_back({"retweet_count_max", "max retweet_count over tweets", content});
    defs.push_back({"favorite_count_min", "min favorite_count over tweets", content});
    defs.push_back({"adjective_freq_mean",
                    "mean per-tweet fraction of lexicon-adjective tokens", content});
    defs.push_back({"sentiment_valence_mean",
                    "mean lexicon valence over matched tokens", content});
    return defs;
}

}  // namespace

const FeatureSchema& feature_schema(const std::string& schema_id) {
    static const FeatureSchema lite{"lite-v1", lite_feature_defs()};
    static const FeatureSchema full{"full-v1", full_feature_defs()};
    if (schema_id == "lite-v1") return lite;
    if (schema_id == "full-v1") return full;
    throw config_error("unknown feature schema: " + schema_id);
}

double shannon_entropy_bits(std::span<const size_t> counts) {
    size_t total = 0;
    for (size_t c : counts) total += c;
    if (total == 0) return 0.0;
    double h = 0.0;
    for (size_t c : counts) {
        if (c == 0) continue;
        double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return std::max(h, 0.0);
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char ch : text) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

Lexicon Lexicon::load_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open lexicon file: " + path);
    Lexicon lex;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string token, adjective, valence, arousal;
        if (!std::getline(ss, token, '\t') || !std::getline(ss, adjective, '\t') ||
            !std::getline(ss, valence, '\t') || !std::getline(ss, arousal))
            throw data_error("lexicon line " + std::to_string(line_no) +
                             ": expected token\\tadjective\\tvalence\\tarousal");
        try {
            lex.insert(token, Entry{adjective == "1", std::stod(valence), std::stod(arousal)});
        } catch (const std::exception&) {
            throw data_error("lexicon line " + std::to_string(line_no) + ": bad number");
        }
    }
    return lex;
}

const Lexicon& Lexicon::builtin() {
    static const Lexicon lex = [] {
        Lexicon l;
        struct Row {
            const char* token;
            bool adj;
            double valence;
            double arousal;
        };
        static constexpr std::array rows = {
            Row{"great", true, 0.8, 0.5},    Row{"amazing", true, 0.9, 0.7},
            Row{"happy", true, 0.9, 0.6},    Row{"free", true, 0.6, 0.5},
            Row{"best", true, 0.8, 0.5},     Row{"new", true, 0.4, 0.4},
            Row{"bad", true, -0.7, 0.5},     Row{"sad", true, -0.8, 0.3},
            Row{"cool", true, 0.6, 0.4},     Row{"nice", true, 0.7, 0.3},
            Row{"official", true, 0.2, 0.2}, Row{"angry", true, -0.8, 0.8},
            Row{"terrible", true, -0.9, 0.7}, Row{"love", false, 0.9, 0.6},
            Row{"win", false, 0.7, 0.7},     Row{"deals", false, 0.3, 0.4},
            Row{"hate", false, -0.9, 0.7},   Row{"news", false, 0.0, 0.3},
        };
        for (const auto& r : rows) l.insert(r.token, Entry{r.adj, r.valence, r.arousal});
        return l;
    }();
    return lex;
}

const Lexicon& Lexicon::none() {
    static const Lexicon lex;
    return lex;
}

const Lexicon::Entry* Lexicon::find(const std::string& token) const {
    auto it = words_.find(token);
    return it == words_.end() ? nullptr : &it->second;
}

namespace {

// All ratio denominators are floored at 1 so degenerate accounts stay finite.
double guarded_ratio(double num, double den) {
    return num / std::max(den, 1.0);
}

double screen_name_entropy(const std::string& name) {
    std::array<size_t, 256> counts{};
    for (unsigned char c : name) ++counts[c];
    return shannon_entropy_bits(counts);
}

}  // namespace

FeatureVector extract_lite_features(const ingest::UserObject& u) {
    if (u.created_at > u.observed_at)
        throw data_error("account " + u.id + ": created_at is after observed_at");
    const FeatureSchema& schema = feature_schema("lite-v1");
    FeatureVector v;
    v.schema_id = schema.schema_id;
    v.values.reserve(schema.size());
    v.missing.assign(schema.size(), 0);

    double age_hours = static_cast<double>(u.observed_at - u.created_at) / 3600.0;
    size_t digits = 0;
    for (unsigned char c : u.screen_name)
        if (std::isdigit(c)) ++digits;

    v.values.push_back(age_hours);
    v.values.push_back(static_cast<double>(u.statuses_count));
    v.values.push_back(static_cast<double>(u.followers_count));
    v.values.push_back(static_cast<double>(u.friends_count));
    v.values.push_back(static_cast<double>(u.favourites_count));
    v.values.push_back(static_cast<double>(u.listed_count));
    v.values.push_back(guarded_ratio(static_cast<double>(u.statuses_count), age_hours));
    v.values.push_back(guarded_ratio(static_cast<double>(u.followers_count), age_hours));
    v.values.push_back(guarded_ratio(static_cast<double>(u.friends_count), age_hours));
    v.values.push_back(guarded_ratio(static_cast<double>(u.favourites_count), age_hours));
    v.values.push_back(guarded_ratio(static_cast<double>(u.listed_count), age_hours));
    v.values.push_back(guarded_ratio(static_cast<double>(u.friends_count),
                                     static_cast<double>(u.followers_count)));
    v.values.push_back(screen_name_entropy(u.screen_name));
    v.values.push_back(static_cast<double>(digits));
    v.values.push_back(static_cast<double>(u.screen_name.size()));
    v.values.push_back(static_cast<double>(u.description.size()));
    v.values.push_back(u.verified ? 1.0 : 0.0);
    v.values.push_back(u.default_profile ? 1.0 : 0.0);
    v.values.push_back(u.default_profile_image ? 1.0 : 0.0);
    v.values.push_back(u.is_protected ? 1.0 : 0.0);
    v.values.push_back(u.geo_enabled.has_value() ? 1.0 : 0.0);
    if (u.geo_enabled.has_value()) {
        v.values.push_back(*u.geo_enabled ? 1.0 : 0.0);
    } else {
        v.values.push_back(0.0);
        v.missing[v.values.size() - 1] = 1;
    }
    return v;
}

FeatureVector extract_full_features(const ingest::UserObject& u,
                                    std::span<const ingest::TweetRecord> tweets,
                                    const Lexicon& lexicon) {
    for (const auto& t : tweets)
        if (t.author.id != u.id)
            throw data_error("tweet " + t.id + " authored by " + t.author.id +
                             ", expected " + u.id);

    FeatureVector v = extract_lite_features(u);
    const FeatureSchema& schema = feature_schema("full-v1");
    v.schema_id = schema.schema_id;
    v.missing.resize(schema.size(), 0);

    auto push = [&](double value, bool missing) {
        v.values.push_back(value);
        v.missing[v.values.size() - 1] = missing ? 1 : 0;
    };

    const bool no_tweets = tweets.empty();

    // word entropy over all tweet text pooled
    std::map<std::string, size_t> token_counts;
    size_t total_tokens = 0;
    for (const auto& t : tweets)
        for (auto& tok : tokenize(t.text)) {
            ++token_counts[tok];
            ++total_tokens;
        }
    double word_entropy = 0.0;
    if (total_tokens > 0) {
        std::vector<size_t> counts;
        counts.reserve(token_counts.size());
        for (const auto& [tok, c] : token_counts) counts.push_back(c);
        word_entropy = shannon_entropy_bits(counts);
    }
    push(word_entropy, no_tweets);

    size_t retweets = 0;
    for (const auto& t : tweets)
        if (t.is_retweet) ++retweets;
    double originals = static_cast<double>(tweets.size() - retweets);
    push(guarded_ratio(originals, static_cast<double>(retweets)), no_tweets);

    // std dev of inter-event gaps, in posting order
    double interevent_std = 0.0;
    bool interevent_missing = tweets.size() < 3;
    if (tweets.size() >= 2) {
        std::vector<int64_t> times;
        times.reserve(tweets.size());
        for (const auto& t : tweets) times.push_back(t.created_at);
        std::sort(times.begin(), times.end());
        std::vector<double> gaps;
        gaps.reserve(times.size() - 1);
        for (size_t i = 1; i < times.size(); ++i)
            gaps.push_back(static_cast<double>(times[i] - times[i - 1]));
        double mean = 0.0;
        for (double g : gaps) mean += g;
        mean /= static_cast<double>(gaps.size());
        double var = 0.0;
        for (double g : gaps) var += (g - mean) * (g - mean);
        var /= static_cast<double>(gaps.size());
        interevent_std = std::sqrt(var);
    }
    if (interevent_missing) interevent_std = 0.0;
    push(interevent_std, interevent_missing);

    int64_t rt_max = 0;
    int64_t fav_min = 0;
    if (!no_tweets) {
        rt_max = tweets[0].retweet_count;
        fav_min = tweets[0].favorite_count;
        for (const auto& t : tweets) {
            rt_max = std::max(rt_max, t.retweet_count);
            fav_min = std::min(fav_min, t.favorite_count);
        }
    }
    push(static_cast<double>(rt_max), no_tweets);
    push(static_cast<double>(fav_min), no_tweets);

    // lexicon features
    if (lexicon.empty() || no_tweets) {
        push(0.0, true);
        push(0.0, true);
    } else {
        double adj_freq_sum = 0.0;
        size_t tweets_with_tokens = 0;
        double valence_sum = 0.0;
        size_t matched = 0;
        for (const auto& t : tweets) {
            auto tokens = tokenize(t.text);
            if (tokens.empty()) continue;
            ++tweets_with_tokens;
            size_t adjectives = 0;
            for (const auto& tok : tokens) {
                const Lexicon::Entry* e = lexicon.find(tok);
                if (!e) continue;
                if (e->adjective) ++adjectives;
                valence_sum += e->valence;
                ++matched;
            }
            adj_freq_sum += static_cast<double>(adjectives) / static_cast<double>(tokens.size());
        }
        if (tweets_with_tokens == 0)
            push(0.0, true);
        else
            push(adj_freq_sum / static_cast<double>(tweets_with_tokens), false);
        if (matched == 0)
            push(0.0, true);
        else
            push(valence_sum / static_cast<double>(matched), false);
    }
    return v;
}

FeatureVector extract_for_schema(const std::string& schema_id, const ingest::LabeledAccount& a,
                                 const Lexicon& lexicon) {
    if (schema_id == "lite-v1") return extract_lite_features(a.user);
    if (schema_id == "full-v1") return extract_full_features(a.user, a.tweets, lexicon);
    throw config_error("unknown feature schema: " + schema_id);
}

DataMatrix extract_matrix(const ingest::LabeledDataset& ds, const std::string& schema_id,
                          const Lexicon& lexicon) {
    DataMatrix m;
    m.schema_id = schema_id;
    m.rows.reserve(ds.accounts.size());
    m.labels.reserve(ds.accounts.size());
    for (const auto& a : ds.accounts) {
        m.rows.push_back(extract_for_schema(schema_id, a, lexicon));
        m.labels.push_back(a.bot ? 1 : 0);
        m.class_tags.push_back(a.bot ? a.bot_class : "human");
        m.ids.push_back(a.user.id);
    }
    return m;
}

}  // namespace botkit::features
