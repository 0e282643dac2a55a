#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "cohort/corpus.hpp"
#include "cohort/matrix.hpp"
#include "cohort/wordvec.hpp"

namespace cohort {

enum class UserMode { user2vec, pvdbow, pvdm };

UserMode parse_user_mode(const std::string& name);
std::string user_mode_name(UserMode mode);

struct UserTrainConfig {
    int neg_count = 20;
    double learning_rate = 0.025;
    int max_epochs = 20;
    int patience = 3;
    double heldout_fraction = 0.1;
    UserMode mode = UserMode::user2vec;
    int window = 5;           // pvdbow/pvdm
    int dim = 400;            // pvdbow/pvdm; user2vec takes dim from the word matrix
    double neg_power = 0.75;
    uint64_t seed = 1;
    int threads = 1;          // user2vec only; parallel result equals serial
};

struct UserEmbeddingMatrix {
    Matrix vectors;  // row j = u_j for user_ids[j]
    std::vector<std::string> user_ids;

    size_t dim() const { return vectors.cols; }
    size_t user_count() const { return vectors.rows; }
    int index_of(const std::string& user_id) const;
};

// hinge loss over sampled negatives; if grad_u is non-null the gradient is
// accumulated into it (margin exactly at the kink contributes nothing)
double user2vec_loss(const double* u, const double* w_pos,
                     const std::vector<const double*>& negatives, size_t dim,
                     double* grad_u = nullptr);

// mean hinge loss per held-out token; negatives are redrawn from `seed` on
// every call so repeated evaluations see the same samples
double heldout_score(const std::vector<double>& u,
                     const std::vector<std::vector<int>>& heldout_posts,
                     const Matrix& word_embs, const SamplingDist& dist,
                     int neg_count, uint64_t seed);

std::vector<double> train_user_vector(const UserHistory& history, const Matrix& word_embs,
                                      const SamplingDist& dist, const UserTrainConfig& config);

UserEmbeddingMatrix train_all_users(const Dataset& dataset, const Vocabulary& vocab,
                                    const Matrix& word_embs, const UserTrainConfig& config);

std::pair<UserEmbeddingMatrix, WordEmbeddingMatrix>
train_pvdbow(const Dataset& dataset, const Vocabulary& vocab, const UserTrainConfig& config);

std::pair<UserEmbeddingMatrix, WordEmbeddingMatrix>
train_pvdm(const Dataset& dataset, const Vocabulary& vocab, const UserTrainConfig& config);

}  // namespace cohort
