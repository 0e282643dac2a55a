#pragma once

#include <cstdint>
#include <string>

#include "cohort/corpus.hpp"

namespace cohort {

struct SynthConfig {
    int num_classes = 3;
    int users_per_class = 50;
    int posts_per_user = 200;
    int tokens_per_post = 20;
    int shared_vocab_size = 1500;
    int class_vocab_size = 167;
    double class_weight = 0.3;  // lambda: probability a token comes from the class pool
    bool zipf = false;
    uint64_t seed = 1;
};

TokenizedDataset make_cohort_corpus(const SynthConfig& config);

// leave-one-out nearest-centroid accuracy on L2-normalized BOW count vectors
double separability_oracle(const Dataset& dataset);
double separability_oracle(const TokenizedDataset& dataset);

void save_jsonl(const TokenizedDataset& dataset, const std::string& path);

}  // namespace cohort
