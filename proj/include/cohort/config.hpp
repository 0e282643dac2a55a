#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace cohort {

struct RunConfig {
    std::string dataset;
    std::string words;
    std::string users;
    std::string out_dir = "out";

    uint64_t seed = 1;

    int min_history = 100;
    int min_count = 5;
    double heldout_fraction = 0.1;

    int word_dim = 400;
    int word_window = 5;
    int word_epochs = 5;
    double word_lr = 0.025;
    double neg_power = 0.75;
    int neg_count = 20;
    bool dynamic_window = false;

    std::string user_mode = "user2vec";
    double user_lr = 0.025;
    int user_max_epochs = 20;
    int user_patience = 3;
    int threads = 1;

    double lr_c = 1.0;
    double lr_tol = 1e-6;
    std::vector<double> lr_c_grid = {0.001, 0.01, 0.5, 1.0, 10.0, 100.0};

    int nlse_s_dim = 20;
    double nlse_alpha = 0.1;
    int nlse_batch = 16;
    int nlse_max_epochs = 200;
    int nlse_patience = 10;
    std::vector<int> nlse_s_dim_grid = {10, 15, 20, 25};
    std::vector<double> nlse_alpha_grid = {0.01, 0.1, 0.5, 1.0};

    int cv_folds = 10;
    int homophily_k = 100;
    bool boe_mean = false;

    int synth_classes = 3;
    int synth_users = 50;
    int synth_posts = 200;
    int synth_tokens = 20;
    int synth_shared_vocab = 1500;
    int synth_class_vocab = 167;
    double synth_lambda = 0.3;
    bool synth_zipf = false;
};

// errors on unknown key or unparseable value
void apply_config_value(RunConfig& config, const std::string& key, const std::string& value);

// key = value lines; '#' starts a comment; empty path gives all defaults
RunConfig parse_config(const std::string& path);
void apply_overrides(RunConfig& config,
                     const std::vector<std::pair<std::string, std::string>>& overrides);

void echo_config(const RunConfig& config, const std::string& path);

}  // namespace cohort
