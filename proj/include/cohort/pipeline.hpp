#pragma once

#include <string>

#include "cohort/config.hpp"

namespace cohort {

// artifact names under the output directory
namespace artifact {
inline constexpr const char* config_echo = "config.txt";
inline constexpr const char* vocab = "vocab.tsv";
inline constexpr const char* corpus = "corpus.enc";
inline constexpr const char* labels = "labels.csv";
inline constexpr const char* words = "words.vec";
inline constexpr const char* cv_log = "cv_log.txt";
inline constexpr const char* nlse_model = "nlse_model.csv";
inline constexpr const char* prototypes = "prototypes.csv";
inline constexpr const char* summary = "summary.csv";
std::string users_vec(const std::string& mode);
std::string features_csv(const std::string& kind);
std::string homophily_auc(const std::string& mode);
std::string homophily_roc(const std::string& mode);
std::string neighbors(const std::string& mode);
std::string cv_csv(const std::string& model, const std::string& kind);
std::string subspace(const std::string& mode);
}  // namespace artifact

void cmd_synth(const RunConfig& config, const std::string& out_file);
void cmd_ingest(const RunConfig& config);
void cmd_train_words(const RunConfig& config, const std::string& ingest_dir,
                     const std::string& out_file);
void cmd_train_users(const RunConfig& config, const std::string& ingest_dir,
                     const std::string& out_file);
void cmd_features(const RunConfig& config, const std::string& kind,
                  const std::string& ingest_dir, const std::string& out_file);
void cmd_homophily(const RunConfig& config, const std::string& users_file,
                   const std::string& labels_file);
void cmd_train_nlse(const RunConfig& config, const std::string& users_file,
                    const std::string& labels_file);
void cmd_cv(const RunConfig& config, const std::string& features_file,
            const std::string& model_kind);
void cmd_export_subspace(const RunConfig& config, const std::string& model_file,
                         const std::string& users_file, const std::string& labels_file,
                         const std::string& out_file);

// ingest -> train-words -> train-users (all modes) -> features -> homophily
// -> cv (7 LR feature sets, 3 NLSE embeddings) -> nlse export -> summary
void run_experiment(const RunConfig& config);

}  // namespace cohort
