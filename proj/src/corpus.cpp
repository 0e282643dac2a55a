#include "cohort/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "cohort/rng.hpp"
#include "json.hpp"

namespace cohort {

namespace {

bool is_ascii_punct(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    return u < 0x80 && std::ispunct(u);
}

// Length in bytes of the UTF-8 sequence starting at s[i]; invalid lead
// bytes are treated as single characters.
size_t utf8_len(const std::string& s, size_t i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    size_t n = 1;
    if ((c & 0xE0) == 0xC0) n = 2;
    else if ((c & 0xF0) == 0xE0) n = 3;
    else if ((c & 0xF8) == 0xF0) n = 4;
    if (i + n > s.size()) n = 1;
    return n;
}

// Collapse runs of 4 or more identical characters (code points) to exactly 3.
std::string collapse_repeats(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) {
        size_t n = utf8_len(s, i);
        std::string ch = s.substr(i, n);
        size_t run = 1;
        size_t j = i + n;
        while (j + n <= s.size() && s.compare(j, n, ch) == 0 && utf8_len(s, j) == n) {
            ++run;
            j += n;
        }
        size_t keep = std::min<size_t>(run, 3);
        for (size_t k = 0; k < keep; ++k) out += ch;
        i = j;
    }
    return out;
}

const std::regex& url_regex() {
    // scheme:// or www.-prefixed, greedy to the end of the non-space run
    static const std::regex re(R"(([a-z][a-z0-9+.\-]*://[^\s]+)|(www\.[^\s]+))");
    return re;
}

bool is_protected_token(const std::string& w) {
    if (w == "@user" || w == "<url>") return true;
    if (w.size() >= 2 && w[0] == '#') {
        for (size_t i = 1; i < w.size(); ++i) {
            unsigned char c = static_cast<unsigned char>(w[i]);
            if (c < 0x80 && !std::isalnum(c) && c != '_') return false;
        }
        return true;
    }
    return false;
}

}  // namespace

std::string normalize_text(const std::string& raw) {
    std::string s = raw;
    for (char& c : s) {
        unsigned char u = static_cast<unsigned char>(c);
        if (u < 0x80) c = static_cast<char>(std::tolower(u));
    }
    s = collapse_repeats(s);
    s = std::regex_replace(s, url_regex(), "<url>");

    // mention replacement operates on whitespace-delimited tokens; the
    // output is rebuilt with single spaces, which keeps the function
    // idempotent
    std::istringstream iss(s);
    std::string tok, out;
    while (iss >> tok) {
        if (tok.size() >= 2 && tok[0] == '@') tok = "@user";
        if (!out.empty()) out += ' ';
        out += tok;
    }
    return out;
}

std::vector<std::string> tokenize(const std::string& normalized) {
    std::vector<std::string> tokens;
    std::istringstream iss(normalized);
    std::string w;
    while (iss >> w) {
        bool all_punct = std::all_of(w.begin(), w.end(), is_ascii_punct);
        if (all_punct) {
            tokens.push_back(w);
            continue;
        }
        size_t b = 0, e = w.size();
        while (e > b && is_ascii_punct(w[e - 1]) && !is_protected_token(w.substr(b, e - b))) --e;
        while (e > b && is_ascii_punct(w[b]) && !is_protected_token(w.substr(b, e - b))) ++b;
        if (b > 0) tokens.push_back(w.substr(0, b));
        if (e > b) tokens.push_back(w.substr(b, e - b));
        if (e < w.size()) tokens.push_back(w.substr(e));
    }
    return tokens;
}

Vocabulary Vocabulary::build(const std::unordered_map<std::string, long long>& counts,
                             long long min_count) {
    if (min_count < 1) throw std::runtime_error("vocabulary: min_count must be >= 1");
    std::vector<std::pair<std::string, long long>> kept;
    for (const auto& [tok, cnt] : counts)
        if (cnt >= min_count) kept.emplace_back(tok, cnt);
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    Vocabulary v;
    v.tokens_.reserve(kept.size());
    v.counts_.reserve(kept.size());
    for (auto& [tok, cnt] : kept) {
        v.index_.emplace(tok, static_cast<int>(v.tokens_.size()));
        v.tokens_.push_back(tok);
        v.counts_.push_back(cnt);
    }
    if (v.tokens_.empty())
        std::cerr << "warning: vocabulary is empty (no token reached min_count="
                  << min_count << ")\n";
    return v;
}

int Vocabulary::id_of(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? -1 : it->second;
}

void Vocabulary::save_tsv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("vocabulary: cannot write " + path);
    for (size_t i = 0; i < tokens_.size(); ++i)
        os << tokens_[i] << '\t' << i << '\t' << counts_[i] << '\n';
}

Vocabulary Vocabulary::load_tsv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("vocabulary: cannot read " + path);
    Vocabulary v;
    std::string line;
    size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        long long id, cnt;
        if (!(std::getline(ls, tok, '\t') && ls >> id >> cnt))
            throw std::runtime_error("vocabulary: malformed line " + std::to_string(lineno) +
                                     " in " + path);
        if (id != static_cast<long long>(v.tokens_.size()))
            throw std::runtime_error("vocabulary: non-contiguous id at line " +
                                     std::to_string(lineno) + " in " + path);
        v.index_.emplace(tok, static_cast<int>(v.tokens_.size()));
        v.tokens_.push_back(tok);
        v.counts_.push_back(cnt);
    }
    return v;
}

namespace {

int canonical_rank(const std::string& name) {
    if (name == "control") return 0;
    if (name == "depression") return 1;
    if (name == "ptsd") return 2;
    return 3;
}

}  // namespace

LabelSet LabelSet::from_names(std::vector<std::string> distinct_names) {
    std::sort(distinct_names.begin(), distinct_names.end(),
              [](const std::string& a, const std::string& b) {
                  int ra = canonical_rank(a), rb = canonical_rank(b);
                  if (ra != rb) return ra < rb;
                  return a < b;
              });
    distinct_names.erase(std::unique(distinct_names.begin(), distinct_names.end()),
                         distinct_names.end());
    return LabelSet{std::move(distinct_names)};
}

int LabelSet::index_of(const std::string& name) const {
    for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    return -1;
}

bool is_valid_label(const std::string& label) {
    if (canonical_rank(label) < 3) return true;
    if (label.size() > 5 && label.compare(0, 5, "class") == 0) {
        for (size_t i = 5; i < label.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(label[i]))) return false;
        return true;
    }
    return false;
}

TokenizedDataset load_dataset(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_dataset: cannot open " + path);
    TokenizedDataset ds;
    std::unordered_map<std::string, size_t> seen;
    std::string line;
    size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw std::runtime_error("load_dataset: malformed JSON at line " +
                                     std::to_string(lineno) + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("user_id") || !j.contains("label") ||
            !j.contains("posts") || !j["user_id"].is_string() || !j["label"].is_string() ||
            !j["posts"].is_array())
            throw std::runtime_error("load_dataset: line " + std::to_string(lineno) +
                                     ": expected {\"user_id\", \"label\", \"posts\"}");
        TokenizedUser u;
        u.user_id = j["user_id"].get<std::string>();
        u.label = j["label"].get<std::string>();
        if (!is_valid_label(u.label))
            throw std::runtime_error("load_dataset: line " + std::to_string(lineno) +
                                     ": unknown label \"" + u.label + "\"");
        if (seen.count(u.user_id))
            throw std::runtime_error("load_dataset: line " + std::to_string(lineno) +
                                     ": duplicate user_id \"" + u.user_id + "\"");
        for (const auto& p : j["posts"]) {
            if (!p.is_string())
                throw std::runtime_error("load_dataset: line " + std::to_string(lineno) +
                                         ": posts must be strings");
            auto toks = tokenize(normalize_text(p.get<std::string>()));
            if (!toks.empty()) u.posts.push_back(std::move(toks));
        }
        seen.emplace(u.user_id, lineno);
        ds.users.push_back(std::move(u));
    }
    return ds;
}

TokenizedDataset filter_users(const TokenizedDataset& ds, size_t min_history) {
    TokenizedDataset out;
    for (const auto& u : ds.users)
        if (u.posts.size() >= min_history) out.users.push_back(u);
    return out;
}

std::unordered_map<std::string, long long> count_tokens(const TokenizedDataset& ds) {
    std::unordered_map<std::string, long long> counts;
    for (const auto& u : ds.users)
        for (const auto& post : u.posts)
            for (const auto& tok : post) ++counts[tok];
    return counts;
}

Dataset encode_dataset(const TokenizedDataset& ds, const Vocabulary& vocab) {
    std::vector<std::string> names;
    for (const auto& u : ds.users) names.push_back(u.label);
    Dataset out;
    out.labels = LabelSet::from_names(std::move(names));
    for (const auto& u : ds.users) {
        UserHistory h;
        h.user_id = u.user_id;
        h.label = out.labels.index_of(u.label);
        for (const auto& post : u.posts) {
            std::vector<int> ids;
            ids.reserve(post.size());
            for (const auto& tok : post) {
                int id = vocab.id_of(tok);
                if (id >= 0) ids.push_back(id);
            }
            if (!ids.empty()) h.posts.push_back(std::move(ids));
        }
        out.users.push_back(std::move(h));
    }
    return out;
}

HeldOutSplit split_heldout(const UserHistory& history, double fraction, uint64_t seed) {
    if (fraction <= 0.0 || fraction >= 1.0)
        throw std::runtime_error("split_heldout: fraction must be in (0,1)");
    size_t n = history.posts.size();
    if (n < 2)
        throw std::runtime_error("split_heldout: user \"" + history.user_id +
                                 "\" has fewer than 2 posts");
    size_t k = static_cast<size_t>(std::llround(fraction * static_cast<double>(n)));
    if (k < 1) k = 1;
    if (k > n - 1) k = n - 1;

    Rng rng(derive_seed(seed, "heldout/" + history.user_id));
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    for (size_t i = 0; i < k; ++i) {
        size_t j = i + static_cast<size_t>(rng.next_below(n - i));
        std::swap(idx[i], idx[j]);
    }
    HeldOutSplit split;
    split.seed = seed;
    split.heldout_posts.assign(idx.begin(), idx.begin() + static_cast<ptrdiff_t>(k));
    split.train_posts.assign(idx.begin() + static_cast<ptrdiff_t>(k), idx.end());
    std::sort(split.heldout_posts.begin(), split.heldout_posts.end());
    std::sort(split.train_posts.begin(), split.train_posts.end());
    return split;
}

void save_encoded(const Dataset& ds, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_encoded: cannot write " + path);
    for (const auto& u : ds.users) {
        nlohmann::json j;
        j["user_id"] = u.user_id;
        j["label"] = ds.labels.names[u.label];
        j["posts"] = u.posts;
        os << j.dump() << '\n';
    }
}

Dataset load_encoded(const std::string& path, size_t vocab_size) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_encoded: cannot open " + path);
    std::vector<std::string> names;
    struct Row {
        std::string user_id, label;
        std::vector<std::vector<int>> posts;
    };
    std::vector<Row> rows;
    std::string line;
    size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw std::runtime_error("load_encoded: malformed JSON at line " +
                                     std::to_string(lineno) + ": " + e.what());
        }
        Row r;
        r.user_id = j.at("user_id").get<std::string>();
        r.label = j.at("label").get<std::string>();
        r.posts = j.at("posts").get<std::vector<std::vector<int>>>();
        for (const auto& post : r.posts)
            for (int id : post)
                if (id < 0 || static_cast<size_t>(id) >= vocab_size)
                    throw std::runtime_error("load_encoded: token id " + std::to_string(id) +
                                             " out of range at line " + std::to_string(lineno));
        names.push_back(r.label);
        rows.push_back(std::move(r));
    }
    Dataset ds;
    ds.labels = LabelSet::from_names(std::move(names));
    for (auto& r : rows) {
        UserHistory h;
        h.user_id = std::move(r.user_id);
        h.label = ds.labels.index_of(r.label);
        h.posts = std::move(r.posts);
        ds.users.push_back(std::move(h));
    }
    return ds;
}

void save_labels_csv(const Dataset& ds, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_labels_csv: cannot write " + path);
    os << "user_id,label\n";
    for (const auto& u : ds.users)
        os << u.user_id << ',' << ds.labels.names[u.label] << '\n';
}

std::vector<std::pair<std::string, std::string>> load_labels_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_labels_csv: cannot open " + path);
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    if (!std::getline(is, line) || line != "user_id,label")
        throw std::runtime_error("load_labels_csv: bad header in " + path);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error("load_labels_csv: malformed row in " + path);
        out.emplace_back(line.substr(0, comma), line.substr(comma + 1));
    }
    return out;
}

}  // namespace cohort
