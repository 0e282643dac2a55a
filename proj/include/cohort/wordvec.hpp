#pragma once

#include <cstdint>
#include <vector>

#include "cohort/corpus.hpp"
#include "cohort/matrix.hpp"
#include "cohort/rng.hpp"

namespace cohort {

// Normalized count^power distribution over token ids. power=0 is uniform.
// Immutable; callers supply their own Rng stream so that independent
// training problems (per user, per module) draw independent sequences.
class SamplingDist {
public:
    static SamplingDist from_counts(const std::vector<long long>& counts, double power);

    int draw(Rng& rng) const;
    const std::vector<double>& probs() const { return probs_; }
    size_t support() const { return probs_.size(); }

private:
    std::vector<double> probs_;
    std::vector<double> cdf_;
};

// The shared negative sampler: a sampling distribution plus its own seeded
// stream. Draws are iid from weight(w) = count(w)^power.
class NegativeSampler {
public:
    NegativeSampler(const Vocabulary& vocab, double power, uint64_t seed);

    std::vector<int> sample(int count);
    const SamplingDist& dist() const { return dist_; }

private:
    SamplingDist dist_;
    Rng rng_;
};

struct SgnsConfig {
    int window = 5;
    int neg_count = 20;
    int dim = 400;
    double learning_rate = 0.025;
    int epochs = 5;
    uint64_t seed = 1;
    double neg_power = 0.75;
    // samples the effective window uniformly in [1, window] per position;
    // off by default
    bool dynamic_window = false;
};

// Input vectors E (used downstream) and output/context vectors E'
// (training-internal). One row per token.
struct WordEmbeddingMatrix {
    Matrix input;
    Matrix output;

    size_t dim() const { return input.cols; }
    size_t vocab_size() const { return input.rows; }
};

// Negative-sampling logistic loss for one (center, context, negatives)
// triple:  -log s(c.x) - sum_k log s(-n_k.x)  with x the center vector.
// Gradient buffers may be null; gradients are accumulated into them.
double sgns_loss(const double* center, const double* context,
                 const std::vector<const double*>& negatives, size_t dim,
                 double* grad_center, double* grad_context,
                 const std::vector<double*>* grad_negatives);

// One SGD step on the loss above; center uses the input matrix, context and
// negatives the output matrix. Returns the pre-update loss.
double sgns_step(WordEmbeddingMatrix& emb, int center_id, int context_id,
                 const std::vector<int>& negative_ids, double lr);

// Uniform[-0.5/dim, 0.5/dim) input vectors, zero output vectors.
WordEmbeddingMatrix init_word_embeddings(size_t vocab_size, int dim, uint64_t seed);

// Skip-gram over every post: each context word within a symmetric window
// gets one sgns_step with neg_count fresh negatives. The learning rate
// decays linearly to 1e-4 of its initial value over the run. Deterministic
// per seed.
WordEmbeddingMatrix train_skipgram(const Dataset& dataset, const Vocabulary& vocab,
                                   const SgnsConfig& config);

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace cohort
