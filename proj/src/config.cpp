#include "cohort/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace cohort {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

long long to_int(const std::string& key, const std::string& value) {
    size_t pos = 0;
    long long v;
    try {
        v = std::stoll(value, &pos);
    } catch (const std::exception&) {
        throw std::runtime_error("config: key \"" + key + "\" expects an integer, got \"" +
                                 value + "\"");
    }
    if (pos != value.size())
        throw std::runtime_error("config: key \"" + key + "\" expects an integer, got \"" +
                                 value + "\"");
    return v;
}

uint64_t to_u64(const std::string& key, const std::string& value) {
    size_t pos = 0;
    uint64_t v;
    try {
        v = std::stoull(value, &pos);
    } catch (const std::exception&) {
        throw std::runtime_error("config: key \"" + key + "\" expects an unsigned integer, got \"" +
                                 value + "\"");
    }
    if (pos != value.size())
        throw std::runtime_error("config: key \"" + key + "\" expects an unsigned integer, got \"" +
                                 value + "\"");
    return v;
}

double to_double(const std::string& key, const std::string& value) {
    size_t pos = 0;
    double v;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw std::runtime_error("config: key \"" + key + "\" expects a number, got \"" + value +
                                 "\"");
    }
    if (pos != value.size())
        throw std::runtime_error("config: key \"" + key + "\" expects a number, got \"" + value +
                                 "\"");
    return v;
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw std::runtime_error("config: key \"" + key + "\" expects true/false, got \"" + value +
                             "\"");
}

std::vector<double> to_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
    if (out.empty())
        throw std::runtime_error("config: key \"" + key + "\" expects a nonempty list");
    return out;
}

std::vector<int> to_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(static_cast<int>(to_int(key, trim(item))));
    if (out.empty())
        throw std::runtime_error("config: key \"" + key + "\" expects a nonempty list");
    return out;
}

// %g when it round-trips, full precision otherwise
std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    if (std::strtod(buf, nullptr) == v) return buf;
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

template <typename T, typename Fmt>
std::string join(const std::vector<T>& values, Fmt fmt) {
    std::string out;
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) out += ",";
        out += fmt(values[i]);
    }
    return out;
}

}  // namespace

void apply_config_value(RunConfig& c, const std::string& key, const std::string& value) {
    if (key == "dataset") c.dataset = value;
    else if (key == "words") c.words = value;
    else if (key == "users") c.users = value;
    else if (key == "out_dir") c.out_dir = value;
    else if (key == "seed") c.seed = to_u64(key, value);
    else if (key == "min_history") c.min_history = static_cast<int>(to_int(key, value));
    else if (key == "min_count") c.min_count = static_cast<int>(to_int(key, value));
    else if (key == "heldout_fraction") c.heldout_fraction = to_double(key, value);
    else if (key == "word_dim") c.word_dim = static_cast<int>(to_int(key, value));
    else if (key == "word_window") c.word_window = static_cast<int>(to_int(key, value));
    else if (key == "word_epochs") c.word_epochs = static_cast<int>(to_int(key, value));
    else if (key == "word_lr") c.word_lr = to_double(key, value);
    else if (key == "neg_power") c.neg_power = to_double(key, value);
    else if (key == "neg_count") c.neg_count = static_cast<int>(to_int(key, value));
    else if (key == "dynamic_window") c.dynamic_window = to_bool(key, value);
    else if (key == "user_mode") c.user_mode = value;
    else if (key == "user_lr") c.user_lr = to_double(key, value);
    else if (key == "user_max_epochs") c.user_max_epochs = static_cast<int>(to_int(key, value));
    else if (key == "user_patience") c.user_patience = static_cast<int>(to_int(key, value));
    else if (key == "threads") c.threads = static_cast<int>(to_int(key, value));
    else if (key == "lr_c") c.lr_c = to_double(key, value);
    else if (key == "lr_tol") c.lr_tol = to_double(key, value);
    else if (key == "lr_c_grid") c.lr_c_grid = to_double_list(key, value);
    else if (key == "nlse_s_dim") c.nlse_s_dim = static_cast<int>(to_int(key, value));
    else if (key == "nlse_alpha") c.nlse_alpha = to_double(key, value);
    else if (key == "nlse_batch") c.nlse_batch = static_cast<int>(to_int(key, value));
    else if (key == "nlse_max_epochs") c.nlse_max_epochs = static_cast<int>(to_int(key, value));
    else if (key == "nlse_patience") c.nlse_patience = static_cast<int>(to_int(key, value));
    else if (key == "nlse_s_dim_grid") c.nlse_s_dim_grid = to_int_list(key, value);
    else if (key == "nlse_alpha_grid") c.nlse_alpha_grid = to_double_list(key, value);
    else if (key == "cv_folds") c.cv_folds = static_cast<int>(to_int(key, value));
    else if (key == "homophily_k") c.homophily_k = static_cast<int>(to_int(key, value));
    else if (key == "boe_mean") c.boe_mean = to_bool(key, value);
    else if (key == "synth_classes") c.synth_classes = static_cast<int>(to_int(key, value));
    else if (key == "synth_users") c.synth_users = static_cast<int>(to_int(key, value));
    else if (key == "synth_posts") c.synth_posts = static_cast<int>(to_int(key, value));
    else if (key == "synth_tokens") c.synth_tokens = static_cast<int>(to_int(key, value));
    else if (key == "synth_shared_vocab")
        c.synth_shared_vocab = static_cast<int>(to_int(key, value));
    else if (key == "synth_class_vocab")
        c.synth_class_vocab = static_cast<int>(to_int(key, value));
    else if (key == "synth_lambda") c.synth_lambda = to_double(key, value);
    else if (key == "synth_zipf") c.synth_zipf = to_bool(key, value);
    else throw std::runtime_error("config: unknown key \"" + key + "\"");
}

RunConfig parse_config(const std::string& path) {
    RunConfig config;
    if (path.empty()) return config;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: " + path + ":" + std::to_string(lineno) +
                                     ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        apply_config_value(config, key, value);
    }
    return config;
}

void apply_overrides(RunConfig& config,
                     const std::vector<std::pair<std::string, std::string>>& overrides) {
    for (const auto& [key, value] : overrides) apply_config_value(config, key, value);
}

void echo_config(const RunConfig& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("config: cannot write " + path);
    auto kv = [&](const std::string& key, const std::string& value) {
        out << key << " = " << value << "\n";
    };
    kv("dataset", c.dataset);
    kv("words", c.words);
    kv("users", c.users);
    kv("out_dir", c.out_dir);
    kv("seed", std::to_string(c.seed));
    kv("min_history", std::to_string(c.min_history));
    kv("min_count", std::to_string(c.min_count));
    kv("heldout_fraction", fmt_double(c.heldout_fraction));
    kv("word_dim", std::to_string(c.word_dim));
    kv("word_window", std::to_string(c.word_window));
    kv("word_epochs", std::to_string(c.word_epochs));
    kv("word_lr", fmt_double(c.word_lr));
    kv("neg_power", fmt_double(c.neg_power));
    kv("neg_count", std::to_string(c.neg_count));
    kv("dynamic_window", c.dynamic_window ? "true" : "false");
    kv("user_mode", c.user_mode);
    kv("user_lr", fmt_double(c.user_lr));
    kv("user_max_epochs", std::to_string(c.user_max_epochs));
    kv("user_patience", std::to_string(c.user_patience));
    kv("threads", std::to_string(c.threads));
    kv("lr_c", fmt_double(c.lr_c));
    kv("lr_tol", fmt_double(c.lr_tol));
    kv("lr_c_grid", join(c.lr_c_grid, fmt_double));
    kv("nlse_s_dim", std::to_string(c.nlse_s_dim));
    kv("nlse_alpha", fmt_double(c.nlse_alpha));
    kv("nlse_batch", std::to_string(c.nlse_batch));
    kv("nlse_max_epochs", std::to_string(c.nlse_max_epochs));
    kv("nlse_patience", std::to_string(c.nlse_patience));
    kv("nlse_s_dim_grid",
       join(c.nlse_s_dim_grid, [](int v) { return std::to_string(v); }));
    kv("nlse_alpha_grid", join(c.nlse_alpha_grid, fmt_double));
    kv("cv_folds", std::to_string(c.cv_folds));
    kv("homophily_k", std::to_string(c.homophily_k));
    kv("boe_mean", c.boe_mean ? "true" : "false");
    kv("synth_classes", std::to_string(c.synth_classes));
    kv("synth_users", std::to_string(c.synth_users));
    kv("synth_posts", std::to_string(c.synth_posts));
    kv("synth_tokens", std::to_string(c.synth_tokens));
    kv("synth_shared_vocab", std::to_string(c.synth_shared_vocab));
    kv("synth_class_vocab", std::to_string(c.synth_class_vocab));
    kv("synth_lambda", fmt_double(c.synth_lambda));
    kv("synth_zipf", c.synth_zipf ? "true" : "false");
    if (!out) throw std::runtime_error("config: write failed: " + path);
}

}  // namespace cohort
