#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "botkit/common.hpp"
#include "botkit/ingest.hpp"

namespace botkit::features {

enum class Tier { metadata, content, temporal };

struct FeatureDef {
    std::string name;
    std::string description;
    Tier tier = Tier::metadata;
};

// Ordered, versioned feature list. full-v1 starts with all of lite-v1 in the
// same order, so a full vector restricted to the lite prefix is a lite vector.
struct FeatureSchema {
    std::string schema_id;
    std::vector<FeatureDef> features;
    size_t size() const { return features.size(); }
};

// schema_id in {"lite-v1", "full-v1"}; anything else throws.
const FeatureSchema& feature_schema(const std::string& schema_id);

struct FeatureVector {
    std::string schema_id;
    std::vector<double> values;        // always finite; 0 where missing
    std::vector<uint8_t> missing;      // 1 where the value is a placeholder
};

// token -> (is_adjective, valence, arousal), loaded from a TSV file of
// "token<TAB>adjective(0|1)<TAB>valence<TAB>arousal" lines.
class Lexicon {
public:
    struct Entry {
        bool adjective = false;
        double valence = 0;
        double arousal = 0;
    };

    static Lexicon load_tsv(const std::string& path);
    // Small built-in table so the full schema works out of the box.
    static const Lexicon& builtin();
    static const Lexicon& none();

    bool empty() const { return words_.empty(); }
    const Entry* find(const std::string& token) const;
    void insert(const std::string& token, Entry e) { words_[token] = e; }

private:
    std::unordered_map<std::string, Entry> words_;
};

// Metadata-only features (lite-v1 schema).
FeatureVector extract_lite_features(const ingest::UserObject& u);

// lite-v1 prefix plus content/temporal features (full-v1 schema). tweets must
// all be authored by u; an empty list sets the content features' missing mask.
FeatureVector extract_full_features(const ingest::UserObject& u,
                                    std::span<const ingest::TweetRecord> tweets,
                                    const Lexicon& lexicon = Lexicon::builtin());

// Extracts the schema's vector for one labeled account.
FeatureVector extract_for_schema(const std::string& schema_id, const ingest::LabeledAccount& a,
                                 const Lexicon& lexicon = Lexicon::builtin());

// Dataset flattened into aligned columns for training and evaluation.
struct DataMatrix {
    std::string schema_id;
    std::vector<FeatureVector> rows;
    std::vector<int> labels;              // 1 = bot
    std::vector<std::string> class_tags;  // "human" or the bot class
    std::vector<std::string> ids;
};

DataMatrix extract_matrix(const ingest::LabeledDataset& ds, const std::string& schema_id,
                          const Lexicon& lexicon = Lexicon::builtin());

// Shannon entropy in bits of a discrete count distribution.
double shannon_entropy_bits(std::span<const size_t> counts);

// Lowercased alphanumeric tokens.
std::vector<std::string> tokenize(const std::string& text);

}  // namespace botkit::features
