#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace cohort {

// Text normalization applied to every raw post:
//   - ASCII lowercasing
//   - runs of 4+ identical characters collapsed to exactly 3
//   - URLs (scheme:// or www.-prefixed) replaced by "<url>"
//   - @-mentions replaced by "@user"
//   - whitespace collapsed to single spaces, trimmed
// Idempotent: normalize_text(normalize_text(x)) == normalize_text(x).
std::string normalize_text(const std::string& raw);

// Whitespace split with leading/trailing punctuation runs peeled off as
// separate tokens. "@user", "<url>" and hashtags are kept whole.
// Whitespace-only input yields an empty sequence (callers drop such posts).
std::vector<std::string> tokenize(const std::string& normalized);

class Vocabulary {
public:
    Vocabulary() = default;

    // Retains tokens with frequency >= min_count. Ids are assigned in
    // descending frequency order, ties broken lexicographically, so the id
    // range is exactly [0, size()).
    static Vocabulary build(const std::unordered_map<std::string, long long>& counts,
                            long long min_count);

    int id_of(const std::string& token) const;  // -1 if absent
    const std::string& token_of(int id) const { return tokens_[id]; }
    long long count_of(int id) const { return counts_[id]; }
    const std::vector<long long>& counts() const { return counts_; }
    size_t size() const { return tokens_.size(); }
    bool empty() const { return tokens_.empty(); }

    void save_tsv(const std::string& path) const;  // token<TAB>id<TAB>count
    static Vocabulary load_tsv(const std::string& path);

private:
    std::vector<std::string> tokens_;
    std::vector<long long> counts_;
    std::unordered_map<std::string, int> index_;
};

// Cohort labels are interned per dataset in a fixed order: the canonical
// classes first (control, depression, ptsd), then synthetic classN labels
// in lexicographic order.
struct LabelSet {
    std::vector<std::string> names;

    int index_of(const std::string& name) const;
    size_t size() const { return names.size(); }

    static LabelSet from_names(std::vector<std::string> distinct_names);
};

// Accepted label strings: the canonical three plus "class<N>" for synthetic
// corpora with more than three cohorts.
bool is_valid_label(const std::string& label);

struct TokenizedUser {
    std::string user_id;
    std::string label;
    std::vector<std::vector<std::string>> posts;
};

struct TokenizedDataset {
    std::vector<TokenizedUser> users;
};

struct UserHistory {
    std::string user_id;
    int label = -1;  // index into Dataset::labels
    std::vector<std::vector<int>> posts;  // token ids
};

struct Dataset {
    LabelSet labels;
    std::vector<UserHistory> users;
};

struct HeldOutSplit {
    std::vector<size_t> train_posts;    // sorted post indices
    std::vector<size_t> heldout_posts;  // sorted post indices
    uint64_t seed = 0;
};

// Parses one JSON object per line: {"user_id": str, "label": str,
// "posts": [str, ...]}. Applies normalize_text and tokenize to every post,
// dropping posts that tokenize to nothing. Malformed lines, unknown labels
// and duplicate user ids are hard errors naming the offending line.
TokenizedDataset load_dataset(const std::string& path);

// Keeps users with at least min_history posts, contents untouched.
TokenizedDataset filter_users(const TokenizedDataset& ds, size_t min_history);

// Counts tokens over all posts of all users.
std::unordered_map<std::string, long long> count_tokens(const TokenizedDataset& ds);

// Maps tokens to vocabulary ids. Out-of-vocabulary tokens are dropped (the
// training loss is defined only over V); posts left empty by that are
// dropped as well.
Dataset encode_dataset(const TokenizedDataset& ds, const Vocabulary& vocab);

// Uniformly samples round(fraction*n) post indices (at least 1, at most n-1)
// without replacement. Deterministic per (user_id, seed).
HeldOutSplit split_heldout(const UserHistory& history, double fraction, uint64_t seed);

// Encoded dataset serialization: one JSON object per line with token-id
// arrays in place of post strings.
void save_encoded(const Dataset& ds, const std::string& path);
Dataset load_encoded(const std::string& path, size_t vocab_size);

// labels.csv: header "user_id,label", one row per user in dataset order.
void save_labels_csv(const Dataset& ds, const std::string& path);
std::vector<std::pair<std::string, std::string>> load_labels_csv(const std::string& path);

}  // namespace cohort
