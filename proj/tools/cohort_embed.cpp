#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "cohort/config.hpp"
#include "cohort/pipeline.hpp"

namespace {

using Overrides = std::vector<std::pair<std::string, std::string>>;

// every flag funnels into the config key it mirrors; values are validated by
// apply_config_value after the file (if any) is read, so flags override it
void bind_option(CLI::App* cmd, Overrides& overrides, const std::string& flag,
          const std::string& key, const std::string& desc) {
    cmd->add_option_function<std::string>(
        flag, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); },
        desc);
}

void bind_flag(CLI::App* cmd, Overrides& overrides, const std::string& flag,
               const std::string& key, const std::string& desc) {
    cmd->add_flag_callback(
        flag, [&overrides, key] { overrides.emplace_back(key, "true"); }, desc);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cohort-embed: user embeddings, subspace adaptation, and cohort evaluation"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides overrides;
    std::string in_dir, out_file, kind, model_kind, labels_file, model_file, features_file;

    auto add_config = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "key = value config file");
    };

    CLI::App* synth = app.add_subcommand("synth", "generate a planted-cohort corpus");
    add_config(synth);
    bind_option(synth, overrides, "--classes", "synth_classes", "number of classes");
    bind_option(synth, overrides, "--users", "synth_users", "users per class");
    bind_option(synth, overrides, "--posts", "synth_posts", "posts per user");
    bind_option(synth, overrides, "--tokens", "synth_tokens", "tokens per post");
    bind_option(synth, overrides, "--shared-vocab", "synth_shared_vocab", "shared pool size");
    bind_option(synth, overrides, "--class-vocab", "synth_class_vocab", "per-class pool size");
    bind_option(synth, overrides, "--lambda", "synth_lambda", "class-pool mixture weight");
    bind_flag(synth, overrides, "--zipf", "synth_zipf", "zipf within-pool distribution");
    bind_option(synth, overrides, "--seed", "seed", "root seed");
    synth->add_option("--out", out_file, "output JSONL file")->required();

    CLI::App* ingest = app.add_subcommand("ingest", "normalize, tokenize, and encode a corpus");
    add_config(ingest);
    bind_option(ingest, overrides, "--input", "dataset", "JSONL dataset");
    bind_option(ingest, overrides, "--min-count", "min_count", "vocabulary frequency threshold");
    bind_option(ingest, overrides, "--min-history", "min_history", "minimum posts per user");
    bind_option(ingest, overrides, "--seed", "seed", "root seed");
    bind_option(ingest, overrides, "--out", "out_dir", "output directory");

    CLI::App* train_words = app.add_subcommand("train-words", "skip-gram word embeddings");
    add_config(train_words);
    train_words->add_option("--input", in_dir, "ingest output directory")->required();
    bind_option(train_words, overrides, "--dim", "word_dim", "embedding dimension");
    bind_option(train_words, overrides, "--window", "word_window", "context window");
    bind_option(train_words, overrides, "--neg", "neg_count", "negative samples per pair");
    bind_option(train_words, overrides, "--epochs", "word_epochs", "training epochs");
    bind_option(train_words, overrides, "--lr", "word_lr", "learning rate");
    bind_option(train_words, overrides, "--seed", "seed", "root seed");
    train_words->add_option("--out", out_file, "output embedding file")->required();

    CLI::App* train_users = app.add_subcommand("train-users", "user embeddings");
    add_config(train_users);
    bind_option(train_users, overrides, "--mode", "user_mode", "user2vec|pvdbow|pvdm");
    bind_option(train_users, overrides, "--words", "words", "pre-trained word embedding file");
    train_users->add_option("--input", in_dir, "ingest output directory")->required();
    bind_option(train_users, overrides, "--neg", "neg_count", "negative samples per token");
    bind_option(train_users, overrides, "--lr", "user_lr", "learning rate");
    bind_option(train_users, overrides, "--heldout", "heldout_fraction", "held-out post fraction");
    bind_option(train_users, overrides, "--epochs", "user_max_epochs", "maximum epochs");
    bind_option(train_users, overrides, "--patience", "user_patience", "early-stopping patience");
    bind_option(train_users, overrides, "--threads", "threads", "user2vec worker threads");
    bind_option(train_users, overrides, "--window", "word_window", "pv window size");
    bind_option(train_users, overrides, "--dim", "word_dim", "pv embedding dimension");
    bind_option(train_users, overrides, "--seed", "seed", "root seed");
    train_users->add_option("--out", out_file, "output embedding file")->required();

    CLI::App* features = app.add_subcommand("features", "baseline feature extraction");
    add_config(features);
    features->add_option("--kind", kind, "bow|boe|u2v|pvdm|pvdbow|u2v+bow|u2v+boe")->required();
    features->add_option("--input", in_dir, "ingest output directory")->required();
    bind_option(features, overrides, "--words", "words", "word embedding file (boe)");
    bind_option(features, overrides, "--users", "users", "user embedding file (u2v kinds)");
    bind_flag(features, overrides, "--mean", "boe_mean", "mean instead of sum for boe");
    features->add_option("--out", out_file, "output CSV")->required();

    CLI::App* homophily = app.add_subcommand("homophily", "similarity rankings and ROC/AUC");
    add_config(homophily);
    bind_option(homophily, overrides, "--users", "users", "user embedding file");
    homophily->add_option("--labels", labels_file, "labels CSV")->required();
    bind_option(homophily, overrides, "--k", "homophily_k", "neighbors per query");
    bind_option(homophily, overrides, "--mode", "user_mode", "mode tag for output names");
    bind_option(homophily, overrides, "--out", "out_dir", "output directory");

    CLI::App* train_nlse = app.add_subcommand("train-nlse", "subspace classifier over embeddings");
    add_config(train_nlse);
    bind_option(train_nlse, overrides, "--users", "users", "user embedding file");
    train_nlse->add_option("--labels", labels_file, "labels CSV")->required();
    bind_option(train_nlse, overrides, "--sdim-grid", "nlse_s_dim_grid", "subspace size grid");
    bind_option(train_nlse, overrides, "--lr-grid", "nlse_alpha_grid", "learning rate grid");
    bind_option(train_nlse, overrides, "--batch", "nlse_batch", "minibatch size");
    bind_option(train_nlse, overrides, "--max-epochs", "nlse_max_epochs", "maximum epochs");
    bind_option(train_nlse, overrides, "--patience", "nlse_patience", "early-stopping patience");
    bind_option(train_nlse, overrides, "--seed", "seed", "root seed");
    bind_option(train_nlse, overrides, "--mode", "user_mode", "mode tag for output names");
    bind_option(train_nlse, overrides, "--out", "out_dir", "output directory");

    CLI::App* cv = app.add_subcommand("cv", "stratified k-fold cross-validation");
    add_config(cv);
    cv->add_option("--features", features_file, "feature CSV")->required();
    cv->add_option("--model", model_kind, "lr|nlse")->required();
    bind_option(cv, overrides, "--k", "cv_folds", "fold count");
    bind_option(cv, overrides, "--seed", "seed", "root seed");
    bind_option(cv, overrides, "--tol", "lr_tol", "lr gradient tolerance");
    bind_option(cv, overrides, "--c-grid", "lr_c_grid", "lr regularization grid");
    bind_option(cv, overrides, "--sdim-grid", "nlse_s_dim_grid", "subspace size grid");
    bind_option(cv, overrides, "--lr-grid", "nlse_alpha_grid", "learning rate grid");
    bind_option(cv, overrides, "--out", "out_dir", "output directory");

    CLI::App* run_all = app.add_subcommand("run-all", "full experiment pipeline");
    add_config(run_all);
    bind_option(run_all, overrides, "--dataset", "dataset", "JSONL dataset");
    bind_option(run_all, overrides, "--out", "out_dir", "output directory");
    bind_option(run_all, overrides, "--seed", "seed", "root seed");
    bind_option(run_all, overrides, "--threads", "threads", "user2vec worker threads");
    std::vector<std::string> set_kvs;
    run_all->add_option("--set", set_kvs, "override any config key (key=value, repeatable)");

    CLI::App* export_sub = app.add_subcommand("export-subspace", "per-user subspace features");
    add_config(export_sub);
    export_sub->add_option("--model", model_file, "nlse model CSV")->required();
    bind_option(export_sub, overrides, "--users", "users", "user embedding file");
    export_sub->add_option("--labels", labels_file, "labels CSV")->required();
    export_sub->add_option("--out", out_file, "output CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        for (const std::string& kv : set_kvs) {
            size_t eq = kv.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("--set expects key=value, got \"" + kv + "\"");
            overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
        }
        cohort::RunConfig config = cohort::parse_config(config_path);
        cohort::apply_overrides(config, overrides);

        if (synth->parsed()) cohort::cmd_synth(config, out_file);
        else if (ingest->parsed()) cohort::cmd_ingest(config);
        else if (train_words->parsed()) cohort::cmd_train_words(config, in_dir, out_file);
        else if (train_users->parsed()) cohort::cmd_train_users(config, in_dir, out_file);
        else if (features->parsed()) cohort::cmd_features(config, kind, in_dir, out_file);
        else if (homophily->parsed()) cohort::cmd_homophily(config, config.users, labels_file);
        else if (train_nlse->parsed()) cohort::cmd_train_nlse(config, config.users, labels_file);
        else if (cv->parsed()) cohort::cmd_cv(config, features_file, model_kind);
        else if (run_all->parsed()) cohort::run_experiment(config);
        else if (export_sub->parsed())
            cohort::cmd_export_subspace(config, model_file, config.users, labels_file, out_file);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
