#include "botkit/ingest.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

using nlohmann::json;

namespace botkit::ingest {

namespace {

// Howard Hinnant's civil-date algorithms.
int64_t days_from_civil(int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

void civil_from_days(int64_t z, int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

int64_t civil_to_epoch(int64_t y, unsigned mo, unsigned d, unsigned h, unsigned mi, unsigned s) {
    return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

bool parse_uint(std::string_view s, unsigned& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

int month_from_abbrev(std::string_view m) {
    static constexpr std::array<std::string_view, 12> names = {
        "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
    for (size_t i = 0; i < names.size(); ++i)
        if (m == names[i]) return static_cast<int>(i) + 1;
    return 0;
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && s[i] == ' ') ++i;
        size_t j = i;
        while (j < s.size() && s[j] != ' ') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

// "Wed Apr 26 06:01:55 +0000 2010"
std::optional<int64_t> parse_classic_timestamp(std::string_view s) {
    auto tok = split_ws(s);
    if (tok.size() != 6) return std::nullopt;
    int month = month_from_abbrev(tok[1]);
    if (month == 0) return std::nullopt;
    unsigned day = 0, year = 0;
    if (!parse_uint(tok[2], day) || !parse_uint(tok[5], year)) return std::nullopt;
    std::string_view hms = tok[3];
    if (hms.size() != 8 || hms[2] != ':' || hms[5] != ':') return std::nullopt;
    unsigned h = 0, mi = 0, sec = 0;
    if (!parse_uint(hms.substr(0, 2), h) || !parse_uint(hms.substr(3, 2), mi) ||
        !parse_uint(hms.substr(6, 2), sec))
        return std::nullopt;
    std::string_view off = tok[4];
    if (off.size() != 5 || (off[0] != '+' && off[0] != '-')) return std::nullopt;
    unsigned oh = 0, om = 0;
    if (!parse_uint(off.substr(1, 2), oh) || !parse_uint(off.substr(3, 2), om)) return std::nullopt;
    int64_t offset = (off[0] == '-' ? -1 : 1) * (oh * 3600 + om * 60);
    return civil_to_epoch(year, month, day, h, mi, sec) - offset;
}

// "2010-04-26T06:01:55Z", optional ".fff" fraction, "Z" / "+HH:MM" / "+HHMM" offset.
std::optional<int64_t> parse_iso_timestamp(std::string_view s) {
    if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') ||
        s[13] != ':' || s[16] != ':')
        return std::nullopt;
    unsigned y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    if (!parse_uint(s.substr(0, 4), y) || !parse_uint(s.substr(5, 2), mo) ||
        !parse_uint(s.substr(8, 2), d) || !parse_uint(s.substr(11, 2), h) ||
        !parse_uint(s.substr(14, 2), mi) || !parse_uint(s.substr(17, 2), sec))
        return std::nullopt;
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || sec > 60)
        return std::nullopt;
    size_t i = 19;
    if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    }
    int64_t offset = 0;
    if (i < s.size()) {
        if (s[i] == 'Z' && i + 1 == s.size()) {
            // UTC
        } else if ((s[i] == '+' || s[i] == '-') && (s.size() - i == 6 || s.size() - i == 5)) {
            unsigned oh = 0, om = 0;
            std::string_view rest = s.substr(i + 1);
            if (rest.size() == 5 && rest[2] == ':') {
                if (!parse_uint(rest.substr(0, 2), oh) || !parse_uint(rest.substr(3, 2), om))
                    return std::nullopt;
            } else if (rest.size() == 4) {
                if (!parse_uint(rest.substr(0, 2), oh) || !parse_uint(rest.substr(2, 2), om))
                    return std::nullopt;
            } else {
                return std::nullopt;
            }
            offset = (s[i] == '-' ? -1 : 1) * (oh * 3600 + om * 60);
        } else {
            return std::nullopt;
        }
    }
    return civil_to_epoch(y, mo, d, h, mi, sec) - offset;
}

}  // namespace

int64_t parse_timestamp(std::string_view text) {
    if (auto t = parse_iso_timestamp(text)) return *t;
    if (auto t = parse_classic_timestamp(text)) return *t;
    throw data_error("unrecognized timestamp: '" + std::string(text) + "'");
}

std::string format_timestamp(int64_t epoch_seconds) {
    int64_t days = epoch_seconds >= 0 ? epoch_seconds / 86400
                                      : (epoch_seconds - 86399) / 86400;
    int64_t secs = epoch_seconds - days * 86400;
    int64_t y;
    unsigned mo, d;
    civil_from_days(days, y, mo, d);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                  static_cast<long long>(y), mo, d, static_cast<long long>(secs / 3600),
                  static_cast<long long>((secs / 60) % 60), static_cast<long long>(secs % 60));
    return std::string(buf);
}

namespace {

std::string err_at(size_t line_no, const std::string& msg) {
    if (line_no == 0) return msg;
    return "line " + std::to_string(line_no) + ": " + msg;
}

int64_t get_timestamp_field(const json& j, const char* key, size_t line_no) {
    const auto& v = j.at(key);
    if (v.is_number_integer()) return v.get<int64_t>();
    if (v.is_string()) return parse_timestamp(v.get_ref<const std::string&>());
    throw data_error(err_at(line_no, std::string(key) + " must be a timestamp string or epoch seconds"));
}

int64_t get_count_field(const json& j, const char* key, size_t line_no, bool required) {
    if (!j.contains(key)) {
        if (required) throw data_error(err_at(line_no, std::string("missing count field ") + key));
        return 0;
    }
    const auto& v = j.at(key);
    if (!v.is_number_integer())
        throw data_error(err_at(line_no, std::string(key) + " must be an integer"));
    int64_t n = v.get<int64_t>();
    if (n < 0) throw data_error(err_at(line_no, std::string(key) + " is negative"));
    return n;
}

bool get_bool_field(const json& j, const char* key, bool fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    return j.at(key).get<bool>();
}

std::string get_id_field(const json& j, size_t line_no) {
    std::string id;
    if (j.contains("id_str") && j.at("id_str").is_string()) {
        id = j.at("id_str").get<std::string>();
    } else if (j.contains("id")) {
        const auto& v = j.at("id");
        if (v.is_string())
            id = v.get<std::string>();
        else if (v.is_number_integer())
            id = std::to_string(v.get<int64_t>());
        else if (v.is_number_unsigned())
            id = std::to_string(v.get<uint64_t>());
    }
    if (id.empty()) throw data_error(err_at(line_no, "missing or empty id"));
    return id;
}

UserObject user_from_json(const json& j, size_t line_no, std::optional<int64_t> default_observed) {
    if (!j.is_object()) throw data_error(err_at(line_no, "user record is not a JSON object"));
    UserObject u;
    u.id = get_id_field(j, line_no);
    if (!j.contains("screen_name") || !j.at("screen_name").is_string())
        throw data_error(err_at(line_no, "missing screen_name"));
    u.screen_name = j.at("screen_name").get<std::string>();
    if (j.contains("display_name"))
        u.display_name = j.at("display_name").get<std::string>();
    else if (j.contains("name") && j.at("name").is_string())
        u.display_name = j.at("name").get<std::string>();
    if (j.contains("description") && j.at("description").is_string())
        u.description = j.at("description").get<std::string>();
    if (!j.contains("created_at")) throw data_error(err_at(line_no, "missing created_at"));
    u.created_at = get_timestamp_field(j, "created_at", line_no);
    u.statuses_count = get_count_field(j, "statuses_count", line_no, true);
    u.followers_count = get_count_field(j, "followers_count", line_no, true);
    u.friends_count = get_count_field(j, "friends_count", line_no, true);
    u.favourites_count = get_count_field(j, "favourites_count", line_no, true);
    u.listed_count = get_count_field(j, "listed_count", line_no, true);
    u.verified = get_bool_field(j, "verified", false);
    u.default_profile = get_bool_field(j, "default_profile", false);
    u.default_profile_image = get_bool_field(j, "default_profile_image", false);
    u.is_protected = get_bool_field(j, "protected", false);
    if (j.contains("geo_enabled") && !j.at("geo_enabled").is_null())
        u.geo_enabled = j.at("geo_enabled").get<bool>();
    if (j.contains("observed_at"))
        u.observed_at = get_timestamp_field(j, "observed_at", line_no);
    else if (default_observed)
        u.observed_at = *default_observed;
    else
        u.observed_at = u.created_at;
    if (u.created_at > u.observed_at)
        throw data_error(err_at(line_no, "created_at is after observed_at for id " + u.id));
    return u;
}

json parse_line(std::string_view line, size_t line_no) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw data_error(err_at(line_no, "malformed JSON"));
    return j;
}

TweetRecord tweet_from_json(const json& j, size_t line_no, const UserObject* fallback_author) {
    if (!j.is_object()) throw data_error(err_at(line_no, "tweet record is not a JSON object"));
    TweetRecord t;
    t.id = get_id_field(j, line_no);
    if (!j.contains("created_at")) throw data_error(err_at(line_no, "tweet missing created_at"));
    t.created_at = get_timestamp_field(j, "created_at", line_no);
    if (j.contains("text") && j.at("text").is_string()) t.text = j.at("text").get<std::string>();
    t.is_retweet = (j.contains("retweeted_status") && !j.at("retweeted_status").is_null()) ||
                   get_bool_field(j, "is_retweet", false);
    if (j.contains("entities") && j.at("entities").is_object()) {
        const auto& e = j.at("entities");
        auto count_of = [&](const char* key) -> int64_t {
            return e.contains(key) && e.at(key).is_array()
                       ? static_cast<int64_t>(e.at(key).size())
                       : 0;
        };
        t.mention_count = count_of("user_mentions");
        t.hashtag_count = count_of("hashtags");
        t.url_count = count_of("urls");
    } else {
        t.mention_count = get_count_field(j, "mention_count", line_no, false);
        t.hashtag_count = get_count_field(j, "hashtag_count", line_no, false);
        t.url_count = get_count_field(j, "url_count", line_no, false);
    }
    t.retweet_count = get_count_field(j, "retweet_count", line_no, false);
    t.favorite_count = get_count_field(j, "favorite_count", line_no, false);

    int64_t collected = j.contains("collected_at") ? get_timestamp_field(j, "collected_at", line_no)
                                                   : t.created_at;
    if (j.contains("user") || j.contains("author")) {
        const json& author = j.contains("user") ? j.at("user") : j.at("author");
        t.author = user_from_json(author, line_no, collected);
    } else if (fallback_author) {
        t.author = *fallback_author;
    } else {
        throw data_error(err_at(line_no, "tweet has no embedded user object"));
    }
    // Embedded snapshot semantics: the author profile is pinned to collection time.
    t.author.observed_at = collected;
    if (t.author.created_at > t.author.observed_at)
        throw data_error(err_at(line_no, "author created_at is after tweet collection time"));
    return t;
}

}  // namespace

UserObject parse_user_object(std::string_view line, size_t line_no,
                             std::optional<int64_t> default_observed_at) {
    try {
        return user_from_json(parse_line(line, line_no), line_no, default_observed_at);
    } catch (const json::exception& e) {
        throw data_error(err_at(line_no, e.what()));
    }
}

TweetRecord parse_tweet(std::string_view line, size_t line_no) {
    try {
        return tweet_from_json(parse_line(line, line_no), line_no, nullptr);
    } catch (const json::exception& e) {
        throw data_error(err_at(line_no, e.what()));
    }
}

namespace {

AccountRecord account_from_json(const json& j, size_t line_no) {
    AccountRecord rec;
    rec.user = user_from_json(j, line_no, std::nullopt);
    if (j.contains("tweets")) {
        if (!j.at("tweets").is_array())
            throw data_error(err_at(line_no, "\"tweets\" must be an array"));
        for (const auto& tj : j.at("tweets")) {
            TweetRecord t = tweet_from_json(tj, line_no, &rec.user);
            if (t.author.id != rec.user.id)
                throw data_error(err_at(line_no,
                                        "embedded tweet authored by different id " + t.author.id));
            rec.tweets.push_back(std::move(t));
        }
    }
    return rec;
}

}  // namespace

AccountRecord parse_account_record(std::string_view line, size_t line_no) {
    try {
        return account_from_json(parse_line(line, line_no), line_no);
    } catch (const json::exception& e) {
        throw data_error(err_at(line_no, e.what()));
    }
}

namespace {

json user_to_json(const UserObject& u) {
    json j;
    j["id"] = u.id;
    j["screen_name"] = u.screen_name;
    j["display_name"] = u.display_name;
    j["description"] = u.description;
    j["created_at"] = format_timestamp(u.created_at);
    j["observed_at"] = format_timestamp(u.observed_at);
    j["statuses_count"] = u.statuses_count;
    j["followers_count"] = u.followers_count;
    j["friends_count"] = u.friends_count;
    j["favourites_count"] = u.favourites_count;
    j["listed_count"] = u.listed_count;
    j["verified"] = u.verified;
    j["default_profile"] = u.default_profile;
    j["default_profile_image"] = u.default_profile_image;
    j["protected"] = u.is_protected;
    if (u.geo_enabled) j["geo_enabled"] = *u.geo_enabled;
    return j;
}

json tweet_to_json(const TweetRecord& t, bool with_author) {
    json j;
    j["id"] = t.id;
    j["created_at"] = format_timestamp(t.created_at);
    j["collected_at"] = format_timestamp(t.author.observed_at);
    j["text"] = t.text;
    j["is_retweet"] = t.is_retweet;
    j["mention_count"] = t.mention_count;
    j["hashtag_count"] = t.hashtag_count;
    j["url_count"] = t.url_count;
    j["retweet_count"] = t.retweet_count;
    j["favorite_count"] = t.favorite_count;
    if (with_author) j["user"] = user_to_json(t.author);
    return j;
}

}  // namespace

std::string user_to_jsonl(const UserObject& u) {
    return user_to_json(u).dump();
}

std::string tweet_to_jsonl(const TweetRecord& t) {
    return tweet_to_json(t, true).dump();
}

size_t LabeledDataset::human_count() const {
    size_t n = 0;
    for (const auto& a : accounts)
        if (!a.bot) ++n;
    return n;
}

std::map<std::string, size_t> LabeledDataset::bots_per_class() const {
    std::map<std::string, size_t> out;
    for (const auto& a : accounts)
        if (a.bot) ++out[a.bot_class];
    return out;
}

namespace {

struct LabelEntry {
    bool bot = false;
    std::string bot_class;
};

std::unordered_map<std::string, LabelEntry> load_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open labels file: " + path);
    std::unordered_map<std::string, LabelEntry> labels;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = parse_line(line, line_no);
        std::string id = get_id_field(j, line_no);
        if (!j.contains("label") || !j.at("label").is_string())
            throw data_error(err_at(line_no, "label record missing \"label\""));
        std::string label = j.at("label").get<std::string>();
        LabelEntry e;
        if (label == "bot") {
            e.bot = true;
            e.bot_class = j.contains("class") && j.at("class").is_string()
                              ? j.at("class").get<std::string>()
                              : "bot";
        } else if (label != "human") {
            throw data_error(err_at(line_no, "label must be \"human\" or \"bot\", got \"" + label + "\""));
        }
        if (!labels.emplace(id, std::move(e)).second)
            throw data_error(err_at(line_no, "duplicate id in labels file: " + id));
    }
    return labels;
}

}  // namespace

LabeledDataset load_dataset(const std::string& data_path, const std::string& labels_path,
                            const std::string& name) {
    auto labels = load_labels(labels_path);
    std::ifstream in(data_path);
    if (!in) throw data_error("cannot open data file: " + data_path);

    LabeledDataset ds;
    ds.name = name;
    std::unordered_set<std::string> seen;
    std::string line;
    size_t line_no = 0;
    size_t matched = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        AccountRecord rec;
        try {
            rec = account_from_json(parse_line(line, line_no), line_no);
        } catch (const json::exception& e) {
            throw data_error(err_at(line_no, e.what()));
        }
        if (!seen.insert(rec.user.id).second)
            throw data_error(err_at(line_no, "duplicate account id in data file: " + rec.user.id));
        auto it = labels.find(rec.user.id);
        if (it == labels.end()) {
            ++ds.data_without_labels;
            continue;
        }
        LabeledAccount acct;
        acct.bot = it->second.bot;
        acct.bot_class = it->second.bot_class;
        acct.tweets = std::move(rec.tweets);
        acct.user = std::move(rec.user);
        ds.accounts.push_back(std::move(acct));
        ++matched;
    }
    ds.labels_without_data = labels.size() - matched;
    return ds;
}

void write_dataset(const LabeledDataset& ds, const std::string& data_path,
                   const std::string& labels_path) {
    std::ofstream data(data_path, std::ios::binary);
    if (!data) throw data_error("cannot write data file: " + data_path);
    std::ofstream lab(labels_path, std::ios::binary);
    if (!lab) throw data_error("cannot write labels file: " + labels_path);
    for (const auto& a : ds.accounts) {
        json j = user_to_json(a.user);
        if (!a.tweets.empty()) {
            json arr = json::array();
            for (const auto& t : a.tweets) arr.push_back(tweet_to_json(t, false));
            j["tweets"] = std::move(arr);
        }
        data << j.dump() << '\n';
        json l;
        l["id"] = a.user.id;
        l["label"] = a.bot ? "bot" : "human";
        if (a.bot) l["class"] = a.bot_class;
        lab << l.dump() << '\n';
    }
}

// ---------------------------------------------------------------------------
// Synthetic corpora
// ---------------------------------------------------------------------------

namespace {

constexpr int64_t kObservationEpoch = 1704067200;  // 2024-01-01T00:00:00Z

const std::vector<std::string>& word_pool() {
    static const std::vector<std::string> pool = {
        "great", "amazing", "news",  "daily",   "follow", "me",     "crypto", "love",
        "happy", "world",   "free",  "best",    "new",    "sad",    "fan",    "life",
        "music", "sports",  "deals", "win",     "now",    "today",  "page",   "official",
        "bad",   "cool",    "nice",  "updates", "buy",    "stream",
    };
    return pool;
}

std::string token_at(int64_t k) {
    const auto& pool = word_pool();
    if (k < static_cast<int64_t>(pool.size())) return pool[static_cast<size_t>(k)];
    return "w" + std::to_string(k);
}

int64_t draw_count(Rng& rng, const Quantity& q) {
    if (q.mean <= 0) return 0;
    return std::llround(rng.lognormal(q.mean, q.dispersion));
}

void check_quantity(const ClassSpec& c, const Quantity& q, const char* what) {
    if (q.dispersion <= 0)
        throw config_error("synthetic class '" + c.name + "': dispersion of " + what +
                           " must be > 0");
    if (q.mean < 0)
        throw config_error("synthetic class '" + c.name + "': mean of " + what +
                           " must be >= 0");
}

void check_prob(const ClassSpec& c, double p, const char* what) {
    if (p < 0 || p > 1)
        throw config_error("synthetic class '" + c.name + "': " + what + " must be in [0,1]");
}

}  // namespace

void SyntheticSpec::validate() const {
    if (classes.empty()) throw config_error("synthetic spec has no classes");
    std::set<std::string> names;
    for (const auto& c : classes) {
        if (c.name.empty()) throw config_error("synthetic class with empty name");
        if (!names.insert(c.name).second)
            throw config_error("duplicate synthetic class name: " + c.name);
        if (c.size <= 0) throw config_error("synthetic class '" + c.name + "': size must be > 0");
        if (c.age_days.mean <= 0)
            throw config_error("synthetic class '" + c.name + "': age_days mean must be > 0");
        check_quantity(c, c.age_days, "age_days");
        check_quantity(c, c.statuses_per_day, "statuses_per_day");
        check_quantity(c, c.followers_per_day, "followers_per_day");
        check_quantity(c, c.friends_per_day, "friends_per_day");
        check_quantity(c, c.favourites_per_day, "favourites_per_day");
        check_quantity(c, c.listed_per_day, "listed_per_day");
        check_quantity(c, c.name_letters, "name_letters");
        check_quantity(c, c.name_digits, "name_digits");
        check_quantity(c, c.description_words, "description_words");
        check_quantity(c, c.tweets_per_account, "tweets_per_account");
        check_quantity(c, c.words_per_tweet, "words_per_tweet");
        check_quantity(c, c.interevent_seconds, "interevent_seconds");
        check_quantity(c, c.tweet_retweets, "tweet_retweets");
        check_quantity(c, c.tweet_favorites, "tweet_favorites");
        check_prob(c, c.p_verified, "verified");
        check_prob(c, c.p_default_profile, "default_profile");
        check_prob(c, c.p_default_profile_image, "default_profile_image");
        check_prob(c, c.p_protected, "protected");
        check_prob(c, c.p_geo_known, "geo_known");
        check_prob(c, c.p_geo_true, "geo_true");
        check_prob(c, c.p_retweet, "retweet");
        if (c.vocab_size < 1)
            throw config_error("synthetic class '" + c.name + "': vocab_size must be >= 1");
    }
}

namespace {

const std::map<std::string, Quantity ClassSpec::*>& quantity_fields() {
    static const std::map<std::string, Quantity ClassSpec::*> m = {
        {"age_days", &ClassSpec::age_days},
        {"statuses_per_day", &ClassSpec::statuses_per_day},
        {"followers_per_day", &ClassSpec::followers_per_day},
        {"friends_per_day", &ClassSpec::friends_per_day},
        {"favourites_per_day", &ClassSpec::favourites_per_day},
        {"listed_per_day", &ClassSpec::listed_per_day},
        {"name_letters", &ClassSpec::name_letters},
        {"name_digits", &ClassSpec::name_digits},
        {"description_words", &ClassSpec::description_words},
        {"tweets_per_account", &ClassSpec::tweets_per_account},
        {"words_per_tweet", &ClassSpec::words_per_tweet},
        {"interevent_seconds", &ClassSpec::interevent_seconds},
        {"tweet_retweets", &ClassSpec::tweet_retweets},
        {"tweet_favorites", &ClassSpec::tweet_favorites},
    };
    return m;
}

const std::map<std::string, double ClassSpec::*>& flag_fields() {
    static const std::map<std::string, double ClassSpec::*> m = {
        {"verified", &ClassSpec::p_verified},
        {"default_profile", &ClassSpec::p_default_profile},
        {"default_profile_image", &ClassSpec::p_default_profile_image},
        {"protected", &ClassSpec::p_protected},
        {"geo_known", &ClassSpec::p_geo_known},
        {"geo_true", &ClassSpec::p_geo_true},
        {"retweet", &ClassSpec::p_retweet},
    };
    return m;
}

}  // namespace

SyntheticSpec SyntheticSpec::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open synthetic spec: " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw config_error("synthetic spec is not valid JSON: " + path);
    SyntheticSpec spec;
    for (const auto& [key, value] : j.items()) {
        if (key == "seed") {
            spec.seed = value.get<uint64_t>();
        } else if (key == "classes") {
            for (const auto& cj : value) {
                ClassSpec c;
                for (const auto& [ck, cv] : cj.items()) {
                    if (ck == "name") {
                        c.name = cv.get<std::string>();
                    } else if (ck == "bot") {
                        c.bot = cv.get<bool>();
                    } else if (ck == "size") {
                        c.size = cv.get<int64_t>();
                    } else if (ck == "vocab_size") {
                        c.vocab_size = cv.get<int64_t>();
                    } else if (ck == "quantities") {
                        for (const auto& [qk, qv] : cv.items()) {
                            auto it = quantity_fields().find(qk);
                            if (it == quantity_fields().end())
                                throw config_error("unknown quantity '" + qk + "' in synthetic spec");
                            Quantity q;
                            for (const auto& [pk, pv] : qv.items()) {
                                if (pk == "mean")
                                    q.mean = pv.get<double>();
                                else if (pk == "dispersion")
                                    q.dispersion = pv.get<double>();
                                else
                                    throw config_error("unknown key '" + pk + "' in quantity " + qk);
                            }
                            c.*(it->second) = q;
                        }
                    } else if (ck == "flags") {
                        for (const auto& [fk, fv] : cv.items()) {
                            auto it = flag_fields().find(fk);
                            if (it == flag_fields().end())
                                throw config_error("unknown flag '" + fk + "' in synthetic spec");
                            c.*(it->second) = fv.get<double>();
                        }
                    } else {
                        throw config_error("unknown key '" + ck + "' in synthetic class");
                    }
                }
                if (!cj.contains("bot")) c.bot = (c.name != "human");
                spec.classes.push_back(std::move(c));
            }
        } else {
            throw config_error("unknown key '" + key + "' in synthetic spec");
        }
    }
    spec.validate();
    return spec;
}

std::string SyntheticSpec::to_json() const {
    json j;
    j["seed"] = seed;
    json classes_json = json::array();
    for (const auto& c : classes) {
        json cj;
        cj["name"] = c.name;
        cj["bot"] = c.bot;
        cj["size"] = c.size;
        cj["vocab_size"] = c.vocab_size;
        json q;
        for (const auto& [name, field] : quantity_fields())
            q[name] = {{"mean", (c.*field).mean}, {"dispersion", (c.*field).dispersion}};
        cj["quantities"] = std::move(q);
        json f;
        for (const auto& [name, field] : flag_fields()) f[name] = c.*field;
        cj["flags"] = std::move(f);
        classes_json.push_back(std::move(cj));
    }
    j["classes"] = std::move(classes_json);
    return j.dump(2);
}

namespace {

ClassSpec baseline_human(int64_t size) {
    ClassSpec c;
    c.name = "human";
    c.bot = false;
    c.size = size;
    c.age_days = {1200, 0.4};
    c.statuses_per_day = {8, 0.6};
    c.followers_per_day = {1.5, 0.7};
    c.friends_per_day = {0.8, 0.7};
    c.favourites_per_day = {4, 0.8};
    c.listed_per_day = {0.01, 1.0};
    c.name_letters = {9, 0.2};
    c.name_digits = {0.4, 0.8};
    c.description_words = {8, 0.5};
    c.p_verified = 0.05;
    c.p_default_profile = 0.25;
    c.p_default_profile_image = 0.03;
    c.p_protected = 0.05;
    c.p_geo_known = 0.95;
    c.p_geo_true = 0.4;
    return c;
}

ClassSpec baseline_spambot(int64_t size) {
    ClassSpec c;
    c.name = "spambot";
    c.bot = true;
    c.size = size;
    c.age_days = {90, 0.5};
    c.statuses_per_day = {120, 0.5};
    c.followers_per_day = {0.4, 0.8};
    c.friends_per_day = {30, 0.6};
    c.favourites_per_day = {0.5, 1.0};
    c.listed_per_day = {0.001, 1.0};
    c.name_letters = {10, 0.2};
    c.name_digits = {3.5, 0.5};
    c.description_words = {2, 0.6};
    c.p_verified = 0.0;
    c.p_default_profile = 0.8;
    c.p_default_profile_image = 0.5;
    c.p_protected = 0.01;
    c.p_geo_known = 0.3;
    c.p_geo_true = 0.1;
    return c;
}

// The three-class corpus mirrors the structure motivating specialized
// ensembles: homogeneous humans, and bot classes whose informative axes
// pairwise overlap (posting rate, following rate, favouriting rate).
ClassSpec three_class_human(int64_t size) {
    ClassSpec c;
    c.name = "human";
    c.bot = false;
    c.size = size;
    c.age_days = {1200, 0.5};
    c.statuses_per_day = {8, 0.5};
    c.followers_per_day = {1.5, 0.6};
    c.friends_per_day = {0.9, 0.5};
    c.favourites_per_day = {4, 0.6};
    c.listed_per_day = {0.01, 1.0};
    c.name_letters = {9, 0.2};
    c.name_digits = {0.6, 0.9};
    c.description_words = {8, 0.6};
    c.p_verified = 0.04;
    c.p_default_profile = 0.3;
    c.p_default_profile_image = 0.05;
    c.p_protected = 0.04;
    c.p_geo_known = 0.9;
    c.p_geo_true = 0.4;
    return c;
}

ClassSpec three_class_spambot(int64_t size) {
    ClassSpec c = three_class_human(size);
    c.name = "spambot";
    c.bot = true;
    c.age_days = {400, 0.7};
    c.statuses_per_day = {55, 0.7};  // shared axis with astroturf
    c.friends_per_day = {13, 0.7};   // shared axis with fakefollower
    c.p_default_profile = 0.35;
    c.p_geo_known = 0.8;
    return c;
}

ClassSpec three_class_fakefollower(int64_t size) {
    ClassSpec c = three_class_human(size);
    c.name = "fakefollower";
    c.bot = true;
    c.age_days = {500, 0.7};
    c.friends_per_day = {15, 0.7};     // shared axis with spambot
    c.favourites_per_day = {38, 0.7};  // shared axis with astroturf
    c.statuses_per_day = {2.5, 0.8};
    c.p_default_profile = 0.35;
    c.p_geo_known = 0.8;
    return c;
}

ClassSpec three_class_astroturf(int64_t size) {
    ClassSpec c = three_class_human(size);
    c.name = "astroturf";
    c.bot = true;
    c.age_days = {700, 0.6};
    c.favourites_per_day = {42, 0.7};  // shared axis with fakefollower
    c.statuses_per_day = {48, 0.7};    // shared axis with spambot
    c.p_default_profile = 0.32;
    c.p_geo_known = 0.85;
    return c;
}

}  // namespace

SyntheticSpec SyntheticSpec::preset(const std::string& name) {
    SyntheticSpec spec;
    if (name == "separable-2000") {
        spec.seed = 42;
        spec.classes = {baseline_human(1000), baseline_spambot(1000)};
    } else if (name == "twin-2000") {
        spec.seed = 7;
        ClassSpec a;
        a.name = "human";
        a.size = 1000;
        ClassSpec b = a;
        b.name = "doppel";
        b.bot = true;
        spec.classes = {a, b};
    } else if (name == "three-class-900") {
        spec.seed = 11;
        spec.classes = {three_class_human(300), three_class_spambot(200),
                        three_class_fakefollower(200), three_class_astroturf(200)};
    } else if (name == "content-240") {
        spec.seed = 5;
        ClassSpec human = baseline_human(120);
        human.tweets_per_account = {20, 0.3};
        human.words_per_tweet = {12, 0.3};
        human.interevent_seconds = {5400, 0.8};
        human.tweet_retweets = {2, 1.0};
        human.tweet_favorites = {3, 1.0};
        human.p_retweet = 0.15;
        human.vocab_size = 80;
        ClassSpec bot = baseline_spambot(120);
        bot.tweets_per_account = {40, 0.3};
        bot.words_per_tweet = {6, 0.2};
        bot.interevent_seconds = {600, 0.1};
        bot.tweet_retweets = {0.2, 1.0};
        bot.tweet_favorites = {0.1, 1.0};
        bot.p_retweet = 0.55;
        bot.vocab_size = 12;
        spec.classes = {human, bot};
    } else {
        throw config_error("unknown synthetic preset: " + name);
    }
    spec.validate();
    return spec;
}

LabeledDataset generate_synthetic_corpus(const SyntheticSpec& spec,
                                         const std::string& dataset_name) {
    spec.validate();
    LabeledDataset ds;
    ds.name = dataset_name;
    // Seed-derived prefix keeps ids unique across corpora generated from
    // different seeds, so registries can mix synthetic datasets freely.
    std::string id_prefix = hash_hex(derive_seed(spec.seed, "corpus-id")).substr(0, 8);
    for (size_t ci = 0; ci < spec.classes.size(); ++ci) {
        const ClassSpec& cls = spec.classes[ci];
        for (int64_t j = 0; j < cls.size; ++j) {
            Rng rng(derive_seed(spec.seed, "acct/" + cls.name + "/" + std::to_string(j)));
            LabeledAccount acct;
            acct.bot = cls.bot;
            if (cls.bot) acct.bot_class = cls.name;

            UserObject& u = acct.user;
            u.id = id_prefix + "-" + std::to_string(ci + 1) + "-" + std::to_string(j);
            double age_days = std::max(rng.lognormal(cls.age_days.mean, cls.age_days.dispersion),
                                       1.0 / 24);
            u.observed_at = kObservationEpoch;
            u.created_at = kObservationEpoch - std::llround(age_days * 86400.0);
            auto count_from_rate = [&](const Quantity& q) -> int64_t {
                if (q.mean <= 0) return 0;
                return std::llround(rng.lognormal(q.mean, q.dispersion) * age_days);
            };
            u.statuses_count = count_from_rate(cls.statuses_per_day);
            u.followers_count = count_from_rate(cls.followers_per_day);
            u.friends_count = count_from_rate(cls.friends_per_day);
            u.favourites_count = count_from_rate(cls.favourites_per_day);
            u.listed_count = count_from_rate(cls.listed_per_day);

            int64_t letters = std::clamp<int64_t>(draw_count(rng, cls.name_letters), 1, 15);
            int64_t digits = std::clamp<int64_t>(draw_count(rng, cls.name_digits), 0, 8);
            std::string name;
            for (int64_t k = 0; k < letters; ++k)
                name.push_back(static_cast<char>('a' + rng.uniform_int(26)));
            for (int64_t k = 0; k < digits; ++k)
                name.push_back(static_cast<char>('0' + rng.uniform_int(10)));
            u.screen_name = name;
            u.display_name = name;
            u.display_name[0] = static_cast<char>(std::toupper(u.display_name[0]));

            int64_t words = draw_count(rng, cls.description_words);
            std::string desc;
            for (int64_t k = 0; k < std::min<int64_t>(words, 40); ++k) {
                if (!desc.empty()) desc.push_back(' ');
                desc += token_at(static_cast<int64_t>(rng.uniform_int(word_pool().size())));
            }
            u.description = desc;

            u.verified = rng.bernoulli(cls.p_verified);
            u.default_profile = rng.bernoulli(cls.p_default_profile);
            u.default_profile_image = rng.bernoulli(cls.p_default_profile_image);
            u.is_protected = rng.bernoulli(cls.p_protected);
            if (rng.bernoulli(cls.p_geo_known)) u.geo_enabled = rng.bernoulli(cls.p_geo_true);

            int64_t n_tweets = std::min<int64_t>(draw_count(rng, cls.tweets_per_account), 500);
            if (n_tweets > 0) {
                std::vector<int64_t> times(static_cast<size_t>(n_tweets));
                int64_t t = kObservationEpoch;
                for (int64_t k = 0; k < n_tweets; ++k) {
                    t -= std::max<int64_t>(
                        1, std::llround(rng.lognormal(cls.interevent_seconds.mean,
                                                      cls.interevent_seconds.dispersion)));
                    times[static_cast<size_t>(n_tweets - 1 - k)] = t;
                }
                for (int64_t k = 0; k < n_tweets; ++k) {
                    TweetRecord tw;
                    tw.id = u.id + "-" + std::to_string(k);
                    tw.created_at = times[static_cast<size_t>(k)];
                    int64_t wpt = std::clamp<int64_t>(draw_count(rng, cls.words_per_tweet), 1, 60);
                    std::string text;
                    for (int64_t w = 0; w < wpt; ++w) {
                        if (!text.empty()) text.push_back(' ');
                        text += token_at(static_cast<int64_t>(
                            rng.uniform_int(static_cast<uint64_t>(cls.vocab_size))));
                    }
                    tw.text = std::move(text);
                    tw.is_retweet = rng.bernoulli(cls.p_retweet);
                    tw.mention_count = static_cast<int64_t>(rng.uniform_int(3));
                    tw.hashtag_count = static_cast<int64_t>(rng.uniform_int(3));
                    tw.url_count = static_cast<int64_t>(rng.uniform_int(2));
                    tw.retweet_count = draw_count(rng, cls.tweet_retweets);
                    tw.favorite_count = draw_count(rng, cls.tweet_favorites);
                    tw.author = u;
                    // Synthetic tweets are all "collected" at the corpus snapshot time.
                    tw.author.observed_at = kObservationEpoch;
                    acct.tweets.push_back(std::move(tw));
                }
            }
            ds.accounts.push_back(std::move(acct));
        }
    }
    return ds;
}

Registry Registry::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open registry: " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw config_error("registry is not valid JSON: " + path);
    std::filesystem::path base = std::filesystem::path(path).parent_path();
    Registry reg;
    std::set<std::string> names;
    for (const auto& [key, value] : j.items()) {
        if (key != "datasets") throw config_error("unknown key '" + key + "' in registry");
        for (const auto& ej : value) {
            RegistryEntry e;
            e.role = "train";
            for (const auto& [ek, ev] : ej.items()) {
                if (ek == "name")
                    e.name = ev.get<std::string>();
                else if (ek == "data")
                    e.data_path = (base / ev.get<std::string>()).string();
                else if (ek == "labels")
                    e.labels_path = (base / ev.get<std::string>()).string();
                else if (ek == "role")
                    e.role = ev.get<std::string>();
                else
                    throw config_error("unknown key '" + ek + "' in registry entry");
            }
            if (e.name.empty()) throw config_error("registry entry without name");
            if (e.data_path.empty() || e.labels_path.empty())
                throw config_error("registry entry '" + e.name + "' missing data or labels path");
            if (e.role != "train" && e.role != "candidate" && e.role != "holdout")
                throw config_error("registry entry '" + e.name + "': unknown role '" + e.role + "'");
            if (!names.insert(e.name).second)
                throw config_error("duplicate dataset name in registry: " + e.name);
            reg.entries.push_back(std::move(e));
        }
    }
    if (reg.entries.empty()) throw config_error("registry has no datasets");
    return reg;
}

std::vector<RegistryEntry> Registry::with_role(const std::string& role) const {
    std::vector<RegistryEntry> out;
    for (const auto& e : entries)
        if (e.role == role) out.push_back(e);
    return out;
}

}  // namespace botkit::ingest
