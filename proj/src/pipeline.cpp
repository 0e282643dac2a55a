#include "cohort/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <unordered_map>
#include <utility>

#include "cohort/classify_lr.hpp"
#include "cohort/corpus.hpp"
#include "cohort/embedding_io.hpp"
#include "cohort/eval.hpp"
#include "cohort/features.hpp"
#include "cohort/nlse.hpp"
#include "cohort/synth.hpp"
#include "cohort/uservec.hpp"
#include "cohort/wordvec.hpp"

namespace cohort {

namespace artifact {

std::string users_vec(const std::string& mode) { return "users_" + mode + ".vec"; }
std::string features_csv(const std::string& kind) { return "features_" + kind + ".csv"; }
std::string homophily_auc(const std::string& mode) { return "homophily_auc_" + mode + ".csv"; }
std::string homophily_roc(const std::string& mode) { return "homophily_roc_" + mode + ".csv"; }
std::string neighbors(const std::string& mode) { return "neighbors_" + mode + ".csv"; }
std::string cv_csv(const std::string& model, const std::string& kind) {
    return "cv_" + model + "_" + kind + ".csv";
}
std::string subspace(const std::string& mode) { return "subspace_" + mode + ".csv"; }

}  // namespace artifact

namespace {

template <typename Fn>
auto run_stage(const std::string& name, Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        throw std::runtime_error("[stage " + name + "] " + e.what());
    }
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) { std::filesystem::create_directories(dir); }

struct IngestResult {
    Vocabulary vocab;
    Dataset dataset;
};

IngestResult ingest_in_memory(const RunConfig& config) {
    TokenizedDataset raw = load_dataset(config.dataset);
    TokenizedDataset kept = filter_users(raw, static_cast<size_t>(config.min_history));
    if (kept.users.empty())
        throw std::runtime_error("no user meets the minimum history of " +
                                 std::to_string(config.min_history) + " posts");
    Vocabulary vocab = Vocabulary::build(count_tokens(kept),
                                         static_cast<long long>(config.min_count));
    if (vocab.empty())
        throw std::runtime_error("vocabulary is empty at min_count " +
                                 std::to_string(config.min_count));
    Dataset ds = encode_dataset(kept, vocab);
    return {std::move(vocab), std::move(ds)};
}

IngestResult load_ingest_dir(const std::string& dir) {
    Vocabulary vocab = Vocabulary::load_tsv(join_path(dir, artifact::vocab));
    Dataset ds = load_encoded(join_path(dir, artifact::corpus), vocab.size());
    return {std::move(vocab), std::move(ds)};
}

SgnsConfig sgns_config(const RunConfig& c) {
    SgnsConfig cfg;
    cfg.window = c.word_window;
    cfg.neg_count = c.neg_count;
    cfg.dim = c.word_dim;
    cfg.learning_rate = c.word_lr;
    cfg.epochs = c.word_epochs;
    cfg.seed = c.seed;
    cfg.neg_power = c.neg_power;
    cfg.dynamic_window = c.dynamic_window;
    return cfg;
}

UserTrainConfig user_config(const RunConfig& c, UserMode mode) {
    UserTrainConfig cfg;
    cfg.neg_count = c.neg_count;
    cfg.learning_rate = c.user_lr;
    cfg.max_epochs = c.user_max_epochs;
    cfg.patience = c.user_patience;
    cfg.heldout_fraction = c.heldout_fraction;
    cfg.mode = mode;
    cfg.window = c.word_window;
    cfg.dim = c.word_dim;
    cfg.neg_power = c.neg_power;
    cfg.seed = c.seed;
    cfg.threads = c.threads;
    return cfg;
}

NlseTrainConfig nlse_config(const RunConfig& c) {
    NlseTrainConfig cfg;
    cfg.s_dim = c.nlse_s_dim;
    cfg.learning_rate = c.nlse_alpha;
    cfg.batch_size = c.nlse_batch;
    cfg.max_epochs = c.nlse_max_epochs;
    cfg.patience = c.nlse_patience;
    cfg.seed = c.seed;
    return cfg;
}

std::vector<std::string> vocab_tokens(const Vocabulary& vocab) {
    std::vector<std::string> tokens;
    tokens.reserve(vocab.size());
    for (size_t i = 0; i < vocab.size(); ++i) tokens.push_back(vocab.token_of(static_cast<int>(i)));
    return tokens;
}

Matrix load_word_matrix(const std::string& path, const Vocabulary& vocab) {
    return align_embeddings(load_embeddings(path), vocab_tokens(vocab));
}

UserEmbeddingMatrix load_user_matrix(const std::string& path) {
    EmbeddingFile file = load_embeddings(path);
    UserEmbeddingMatrix users;
    users.vectors = std::move(file.vectors);
    users.user_ids = std::move(file.keys);
    return users;
}

// labels aligned to the embedding row order
std::pair<std::vector<int>, LabelSet>
align_labels(const std::vector<std::string>& user_ids, const std::string& labels_file) {
    auto pairs = load_labels_csv(labels_file);
    std::unordered_map<std::string, std::string> by_id;
    for (auto& [id, name] : pairs) by_id[id] = name;
    std::vector<std::string> names;
    for (auto& [id, name] : pairs) names.push_back(name);
    LabelSet label_set = LabelSet::from_names(std::move(names));
    std::vector<int> labels;
    labels.reserve(user_ids.size());
    for (const auto& id : user_ids) {
        auto it = by_id.find(id);
        if (it == by_id.end())
            throw std::runtime_error("user \"" + id + "\" missing from " + labels_file);
        labels.push_back(label_set.index_of(it->second));
    }
    return {std::move(labels), std::move(label_set)};
}

FeatureTable embedding_table(const UserEmbeddingMatrix& users, const std::vector<int>& labels,
                             const std::string& kind) {
    FeatureTable t;
    t.kind = kind;
    t.values = users.vectors;
    t.user_ids = users.user_ids;
    t.labels = labels;
    return t;
}

void write_homophily(const RunConfig& config, const UserEmbeddingMatrix& users,
                     const std::vector<int>& labels, const LabelSet& label_set,
                     const std::string& mode) {
    HomophilyReport report = homophily_report(users, labels, label_set);
    save_homophily_csv(report, label_set, join_path(config.out_dir, artifact::homophily_auc(mode)),
                       join_path(config.out_dir, artifact::homophily_roc(mode)));
    size_t k = static_cast<size_t>(config.homophily_k);
    if (k + 1 > users.user_count()) k = users.user_count() - 1;
    NeighborGrid grid = neighbor_matrix(users, labels, k);
    save_neighbor_csv(grid, label_set, join_path(config.out_dir, artifact::neighbors(mode)));
}

// grid-searched NLSE on a stratified 80/20 split of all users
NlseModel fit_nlse_grid(const RunConfig& config, const Matrix& U,
                        const std::vector<int>& labels, const LabelSet& label_set,
                        std::string* chosen_tag) {
    std::vector<size_t> all(U.rows);
    for (size_t i = 0; i < U.rows; ++i) all[i] = i;
    auto [train, val] = stratified_split(labels, all, 0.8, -1, config.seed);
    std::vector<int> y_val;
    for (size_t i : val) y_val.push_back(labels[i]);

    NlseModel best;
    double best_f1 = -1.0;
    for (int s_dim : config.nlse_s_dim_grid) {
        for (double alpha : config.nlse_alpha_grid) {
            NlseTrainConfig cfg = nlse_config(config);
            cfg.s_dim = s_dim;
            cfg.learning_rate = alpha;
            NlseModel model = nlse_train(U, labels, label_set, train, val, cfg);
            std::vector<int> pred;
            for (size_t i : val) pred.push_back(nlse_predict(model, U.row(i)));
            double f1 = macro_f1(confusion_matrix(y_val, pred, label_set.names.size()));
            if (f1 > best_f1) {
                best_f1 = f1;
                best = std::move(model);
                if (chosen_tag)
                    *chosen_tag = "s_dim=" + std::to_string(s_dim) +
                                  ";alpha=" + std::to_string(alpha);
            }
        }
    }
    return best;
}

void write_prototypes(const NlseModel& model, const UserEmbeddingMatrix& users,
                      const std::vector<int>& labels, const LabelSet& label_set,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "label";
    for (size_t i = 0; i < model.s_dim(); ++i) out << ",g" << i;
    out << "\n";
    for (size_t cls = 0; cls < label_set.names.size(); ++cls) {
        std::vector<double> proto = class_prototype(model, users, labels, static_cast<int>(cls));
        out << label_set.names[cls];
        for (double v : proto) out << "," << fmt_g17(v);
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace

void cmd_synth(const RunConfig& config, const std::string& out_file) {
    run_stage("synth", [&] {
        SynthConfig cfg;
        cfg.num_classes = config.synth_classes;
        cfg.users_per_class = config.synth_users;
        cfg.posts_per_user = config.synth_posts;
        cfg.tokens_per_post = config.synth_tokens;
        cfg.shared_vocab_size = config.synth_shared_vocab;
        cfg.class_vocab_size = config.synth_class_vocab;
        cfg.class_weight = config.synth_lambda;
        cfg.zipf = config.synth_zipf;
        cfg.seed = config.seed;
        save_jsonl(make_cohort_corpus(cfg), out_file);
    });
}

void cmd_ingest(const RunConfig& config) {
    run_stage("ingest", [&] {
        ensure_dir(config.out_dir);
        IngestResult r = ingest_in_memory(config);
        r.vocab.save_tsv(join_path(config.out_dir, artifact::vocab));
        save_encoded(r.dataset, join_path(config.out_dir, artifact::corpus));
        save_labels_csv(r.dataset, join_path(config.out_dir, artifact::labels));
    });
}

void cmd_train_words(const RunConfig& config, const std::string& ingest_dir,
                     const std::string& out_file) {
    run_stage("train-words", [&] {
        IngestResult r = load_ingest_dir(ingest_dir);
        WordEmbeddingMatrix emb = train_skipgram(r.dataset, r.vocab, sgns_config(config));
        save_embeddings(emb.input, vocab_tokens(r.vocab), out_file);
    });
}

void cmd_train_users(const RunConfig& config, const std::string& ingest_dir,
                     const std::string& out_file) {
    run_stage("train-users", [&] {
        IngestResult r = load_ingest_dir(ingest_dir);
        UserMode mode = parse_user_mode(config.user_mode);
        if (mode == UserMode::user2vec) {
            Matrix words = load_word_matrix(config.words, r.vocab);
            UserEmbeddingMatrix users =
                train_all_users(r.dataset, r.vocab, words, user_config(config, mode));
            save_embeddings(users.vectors, users.user_ids, out_file);
        } else {
            auto [users, words] =
                mode == UserMode::pvdbow
                    ? train_pvdbow(r.dataset, r.vocab, user_config(config, mode))
                    : train_pvdm(r.dataset, r.vocab, user_config(config, mode));
            save_embeddings(users.vectors, users.user_ids, out_file);
        }
    });
}

void cmd_features(const RunConfig& config, const std::string& kind,
                  const std::string& ingest_dir, const std::string& out_file) {
    run_stage("features", [&] {
        IngestResult r = load_ingest_dir(ingest_dir);
        std::vector<int> labels;
        for (const auto& u : r.dataset.users) labels.push_back(u.label);

        auto user_part = [&](const std::string& name) {
            UserEmbeddingMatrix users = load_user_matrix(config.users);
            std::vector<std::string> ids;
            for (const auto& u : r.dataset.users) ids.push_back(u.user_id);
            Matrix aligned(ids.size(), users.dim());
            for (size_t i = 0; i < ids.size(); ++i) {
                int j = users.index_of(ids[i]);
                if (j < 0)
                    throw std::runtime_error("user \"" + ids[i] + "\" missing from " +
                                             config.users);
                std::copy(users.vectors.row(static_cast<size_t>(j)),
                          users.vectors.row(static_cast<size_t>(j)) + users.dim(),
                          aligned.row(i));
            }
            UserEmbeddingMatrix out;
            out.vectors = std::move(aligned);
            out.user_ids = std::move(ids);
            return embedding_table(out, labels, name);
        };

        FeatureTable table;
        if (kind == "bow") {
            table = bow_table(r.dataset, r.vocab);
        } else if (kind == "boe") {
            table = boe_table(r.dataset, load_word_matrix(config.words, r.vocab),
                              config.boe_mean);
        } else if (kind == "u2v" || kind == "pvdm" || kind == "pvdbow") {
            table = user_part(kind);
        } else if (kind == "u2v+bow") {
            table = concat_tables(user_part("u2v"), bow_table(r.dataset, r.vocab));
        } else if (kind == "u2v+boe") {
            table = concat_tables(user_part("u2v"),
                                  boe_table(r.dataset, load_word_matrix(config.words, r.vocab),
                                            config.boe_mean));
        } else {
            throw std::runtime_error("unknown feature kind \"" + kind + "\"");
        }
        save_feature_csv(table, r.dataset.labels, out_file);
    });
}

void cmd_homophily(const RunConfig& config, const std::string& users_file,
                   const std::string& labels_file) {
    run_stage("homophily", [&] {
        ensure_dir(config.out_dir);
        UserEmbeddingMatrix users = load_user_matrix(users_file);
        auto [labels, label_set] = align_labels(users.user_ids, labels_file);
        std::string mode = config.user_mode;
        write_homophily(config, users, labels, label_set, mode);
    });
}

void cmd_train_nlse(const RunConfig& config, const std::string& users_file,
                    const std::string& labels_file) {
    run_stage("train-nlse", [&] {
        ensure_dir(config.out_dir);
        UserEmbeddingMatrix users = load_user_matrix(users_file);
        auto [labels, label_set] = align_labels(users.user_ids, labels_file);
        std::string chosen;
        NlseModel model = fit_nlse_grid(config, users.vectors, labels, label_set, &chosen);
        save_nlse_csv(model, join_path(config.out_dir, artifact::nlse_model));
        save_subspace_csv(model, users, labels, label_set,
                          join_path(config.out_dir, artifact::subspace(config.user_mode)));
        write_prototypes(model, users, labels, label_set,
                         join_path(config.out_dir, artifact::prototypes));
    });
}

void cmd_cv(const RunConfig& config, const std::string& features_file,
            const std::string& model_kind) {
    run_stage("cv", [&] {
        ensure_dir(config.out_dir);
        std::vector<std::string> names;
        // first pass recovers the label set from the raw CSV rows
        {
            std::ifstream in(features_file);
            if (!in) throw std::runtime_error("cannot read " + features_file);
            std::string line;
            std::getline(in, line);
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                size_t a = line.find(',');
                size_t b = line.find(',', a + 1);
                if (a == std::string::npos || b == std::string::npos)
                    throw std::runtime_error(features_file + ": malformed row");
                names.push_back(line.substr(a + 1, b - a - 1));
            }
        }
        LabelSet label_set = LabelSet::from_names(std::move(names));
        FeatureTable table = load_feature_csv(features_file, label_set);

        std::ofstream log(join_path(config.out_dir, artifact::cv_log), std::ios::app);
        CvReport report;
        if (model_kind == "lr") {
            report = cross_validate_lr(table.values, table.labels, label_set, config.lr_c_grid,
                                       config.cv_folds, config.seed, config.lr_tol, &log);
        } else if (model_kind == "nlse") {
            report = cross_validate_nlse(table.values, table.labels, label_set,
                                         config.nlse_s_dim_grid, config.nlse_alpha_grid,
                                         nlse_config(config), config.cv_folds, config.seed, &log);
        } else {
            throw std::runtime_error("unknown model kind \"" + model_kind + "\"");
        }
        save_cv_csv(report, join_path(config.out_dir,
                                      artifact::cv_csv(model_kind, table.kind.empty()
                                                                       ? std::string("features")
                                                                       : table.kind)));
    });
}

void cmd_export_subspace(const RunConfig& config, const std::string& model_file,
                         const std::string& users_file, const std::string& labels_file,
                         const std::string& out_file) {
    run_stage("export-subspace", [&] {
        NlseModel model = load_nlse_csv(model_file);
        UserEmbeddingMatrix users = load_user_matrix(users_file);
        auto [labels, label_set] = align_labels(users.user_ids, labels_file);
        save_subspace_csv(model, users, labels, label_set, out_file);
    });
}

void run_experiment(const RunConfig& config) {
    ensure_dir(config.out_dir);
    echo_config(config, join_path(config.out_dir, artifact::config_echo));

    IngestResult ingest = run_stage("ingest", [&] {
        IngestResult r = ingest_in_memory(config);
        r.vocab.save_tsv(join_path(config.out_dir, artifact::vocab));
        save_encoded(r.dataset, join_path(config.out_dir, artifact::corpus));
        save_labels_csv(r.dataset, join_path(config.out_dir, artifact::labels));
        return r;
    });
    const Vocabulary& vocab = ingest.vocab;
    const Dataset& dataset = ingest.dataset;
    const LabelSet& label_set = dataset.labels;
    std::vector<int> labels;
    for (const auto& u : dataset.users) labels.push_back(u.label);

    WordEmbeddingMatrix words = run_stage("train-words", [&] {
        WordEmbeddingMatrix emb = train_skipgram(dataset, vocab, sgns_config(config));
        save_embeddings(emb.input, vocab_tokens(vocab), join_path(config.out_dir, artifact::words));
        return emb;
    });

    const std::vector<std::string> modes = {"user2vec", "pvdbow", "pvdm"};
    std::unordered_map<std::string, UserEmbeddingMatrix> user_embs;
    run_stage("train-users", [&] {
        user_embs["user2vec"] = train_all_users(dataset, vocab, words.input,
                                                user_config(config, UserMode::user2vec));
        user_embs["pvdbow"] =
            train_pvdbow(dataset, vocab, user_config(config, UserMode::pvdbow)).first;
        user_embs["pvdm"] =
            train_pvdm(dataset, vocab, user_config(config, UserMode::pvdm)).first;
        for (const auto& mode : modes)
            save_embeddings(user_embs[mode].vectors, user_embs[mode].user_ids,
                            join_path(config.out_dir, artifact::users_vec(mode)));
    });

    FeatureTable bow, boe;
    run_stage("features", [&] {
        bow = bow_table(dataset, vocab);
        boe = boe_table(dataset, words.input, config.boe_mean);
        save_feature_csv(bow, label_set, join_path(config.out_dir, artifact::features_csv("bow")));
        save_feature_csv(boe, label_set, join_path(config.out_dir, artifact::features_csv("boe")));
    });

    run_stage("homophily", [&] {
        for (const auto& mode : modes)
            write_homophily(config, user_embs[mode], labels, label_set, mode);
    });

    std::vector<std::pair<std::string, CvReport>> summary;
    run_stage("cv", [&] {
        std::ofstream log(join_path(config.out_dir, artifact::cv_log));
        if (!log) throw std::runtime_error("cannot write cv log");

        FeatureTable u2v = embedding_table(user_embs["user2vec"], labels, "u2v");
        FeatureTable pvdm = embedding_table(user_embs["pvdm"], labels, "pvdm");
        FeatureTable pvdbow = embedding_table(user_embs["pvdbow"], labels, "pvdbow");
        std::vector<std::pair<std::string, const FeatureTable*>> lr_sets = {
            {"bow", &bow},       {"boe", &boe},   {"u2v", &u2v},
            {"pvdm", &pvdm},     {"pvdbow", &pvdbow}};
        FeatureTable u2v_bow = concat_tables(u2v, bow);
        FeatureTable u2v_boe = concat_tables(u2v, boe);
        lr_sets.emplace_back("u2v+bow", &u2v_bow);
        lr_sets.emplace_back("u2v+boe", &u2v_boe);

        for (const auto& [kind, table] : lr_sets) {
            log << "# features=" << kind << "\n";
            CvReport report =
                cross_validate_lr(table->values, table->labels, label_set, config.lr_c_grid,
                                  config.cv_folds, config.seed, config.lr_tol, &log);
            save_cv_csv(report, join_path(config.out_dir, artifact::cv_csv("lr", kind)));
            summary.emplace_back("lr_" + kind, std::move(report));
        }
        for (const auto& mode : modes) {
            std::string kind = mode == "user2vec" ? "u2v" : mode;
            log << "# features=" << kind << "\n";
            CvReport report = cross_validate_nlse(
                user_embs[mode].vectors, labels, label_set, config.nlse_s_dim_grid,
                config.nlse_alpha_grid, nlse_config(config), config.cv_folds, config.seed, &log);
            save_cv_csv(report, join_path(config.out_dir, artifact::cv_csv("nlse", kind)));
            summary.emplace_back("nlse_" + kind, std::move(report));
        }
    });

    run_stage("train-nlse", [&] {
        std::string chosen;
        NlseModel model =
            fit_nlse_grid(config, user_embs["user2vec"].vectors, labels, label_set, &chosen);
        save_nlse_csv(model, join_path(config.out_dir, artifact::nlse_model));
        save_subspace_csv(model, user_embs["user2vec"], labels, label_set,
                          join_path(config.out_dir, artifact::subspace("user2vec")));
        write_prototypes(model, user_embs["user2vec"], labels, label_set,
                         join_path(config.out_dir, artifact::prototypes));
    });

    run_stage("summary", [&] {
        std::ofstream out(join_path(config.out_dir, artifact::summary));
        if (!out) throw std::runtime_error("cannot write summary");
        out << "model,macro_f1,binary_f1\n";
        const std::vector<std::string> order = {"lr_bow",     "lr_boe",    "lr_u2v",
                                                "lr_pvdm",    "lr_pvdbow", "lr_u2v+bow",
                                                "lr_u2v+boe", "nlse_u2v",  "nlse_pvdm",
                                                "nlse_pvdbow"};
        for (const auto& name : order) {
            for (const auto& [model, report] : summary) {
                if (model != name) continue;
                out << name << "," << fmt_g17(report.mean_macro_f1) << ","
                    << fmt_g17(report.mean_binary_f1) << "\n";
            }
        }
        if (!out) throw std::runtime_error("write failed: summary");
    });
}

}  // namespace cohort
