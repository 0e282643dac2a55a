#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cohort/corpus.hpp"
#include "cohort/matrix.hpp"
#include "cohort/uservec.hpp"

namespace cohort {

struct NlseModel {
    Matrix S;                  // s_dim x d
    Matrix beta;               // |Y| x s_dim
    std::vector<double> bias;  // |Y|
    LabelSet labels;

    size_t s_dim() const { return S.rows; }
    size_t input_dim() const { return S.cols; }
    size_t n_classes() const { return beta.rows; }
};

struct NlseTrainConfig {
    int s_dim = 20;
    double learning_rate = 0.1;
    int batch_size = 16;
    int max_epochs = 200;
    int patience = 10;
    uint64_t seed = 1;
};

struct NlseGradients {
    Matrix S;
    Matrix beta;
    std::vector<double> bias;
};

struct NlseForward {
    std::vector<double> g;      // sigmoid(S u), entries in (0,1)
    std::vector<double> probs;  // softmax(beta g + bias)
};

NlseForward nlse_forward(const NlseModel& model, const double* u);

// mean cross-entropy over the batch rows; grads overwritten when non-null;
// the input embeddings are never touched
double nlse_loss(const NlseModel& model, const Matrix& U,
                 const std::vector<size_t>& batch_rows, const std::vector<int>& labels,
                 NlseGradients* grads);

NlseModel nlse_init(size_t d, size_t s_dim, const LabelSet& labels, uint64_t seed);

NlseModel nlse_train(const Matrix& U, const std::vector<int>& labels,
                     const LabelSet& label_set, const std::vector<size_t>& train_idx,
                     const std::vector<size_t>& val_idx, const NlseTrainConfig& config);

int nlse_predict(const NlseModel& model, const double* u);

Matrix subspace_features(const NlseModel& model, const UserEmbeddingMatrix& users,
                         const std::vector<std::string>& user_ids);

std::vector<double> class_prototype(const NlseModel& model, const UserEmbeddingMatrix& users,
                                    const std::vector<int>& labels, int cls);

void save_nlse_csv(const NlseModel& model, const std::string& path);
NlseModel load_nlse_csv(const std::string& path);

void save_subspace_csv(const NlseModel& model, const UserEmbeddingMatrix& users,
                       const std::vector<int>& labels, const LabelSet& label_set,
                       const std::string& path);

}  // namespace cohort
