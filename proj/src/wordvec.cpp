#include "cohort/wordvec.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cohort {

namespace {

// log(1 + e^x), stable for large |x|; -log s(x) == softplus(-x)
double softplus(double x) {
    return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace

SamplingDist SamplingDist::from_counts(const std::vector<long long>& counts, double power) {
    if (counts.empty()) throw std::runtime_error("sampler: empty vocabulary");
    SamplingDist d;
    d.probs_.resize(counts.size());
    double total = 0.0;
    for (size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] < 0) throw std::runtime_error("sampler: negative count");
        d.probs_[i] = std::pow(static_cast<double>(counts[i]), power);
        total += d.probs_[i];
    }
    if (total <= 0.0) throw std::runtime_error("sampler: all counts are zero");
    double acc = 0.0;
    d.cdf_.resize(counts.size());
    for (size_t i = 0; i < counts.size(); ++i) {
        d.probs_[i] /= total;
        acc += d.probs_[i];
        d.cdf_[i] = acc;
    }
    d.cdf_.back() = 1.0;
    return d;
}

int SamplingDist::draw(Rng& rng) const {
    double u = rng.next_double();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<int>(it - cdf_.begin());
}

NegativeSampler::NegativeSampler(const Vocabulary& vocab, double power, uint64_t seed)
    : dist_(SamplingDist::from_counts(vocab.counts(), power)),
      rng_(derive_seed(seed, "negative-sampler")) {}

std::vector<int> NegativeSampler::sample(int count) {
    std::vector<int> ids(static_cast<size_t>(count));
    for (auto& id : ids) id = dist_.draw(rng_);
    return ids;
}

double sgns_loss(const double* center, const double* context,
                 const std::vector<const double*>& negatives, size_t dim,
                 double* grad_center, double* grad_context,
                 const std::vector<double*>* grad_negatives) {
    double pos_dot = dot(center, context, dim);
    double loss = softplus(-pos_dot);
    if (grad_context) axpy(sigmoid(pos_dot) - 1.0, center, grad_context, dim);
    if (grad_center) axpy(sigmoid(pos_dot) - 1.0, context, grad_center, dim);

    for (size_t k = 0; k < negatives.size(); ++k) {
        double neg_dot = dot(center, negatives[k], dim);
        loss += softplus(neg_dot);
        if (grad_negatives) axpy(sigmoid(neg_dot), center, (*grad_negatives)[k], dim);
        if (grad_center) axpy(sigmoid(neg_dot), negatives[k], grad_center, dim);
    }
    return loss;
}

double sgns_step(WordEmbeddingMatrix& emb, int center_id, int context_id,
                 const std::vector<int>& negative_ids, double lr) {
    size_t dim = emb.dim();
    const double* center = emb.input.row(center_id);

    // compute every coefficient at the pre-update point, then apply all
    // updates; repeated ids therefore see correctly accumulated gradients
    std::vector<double> grad_center(dim, 0.0);
    std::vector<std::pair<int, double>> out_coeff;  // (output row id, dloss/d dot)
    out_coeff.reserve(negative_ids.size() + 1);

    double pos_dot = dot(center, emb.output.row(context_id), dim);
    double loss = softplus(-pos_dot);
    axpy(sigmoid(pos_dot) - 1.0, emb.output.row(context_id), grad_center.data(), dim);
    out_coeff.emplace_back(context_id, sigmoid(pos_dot) - 1.0);

    for (int neg_id : negative_ids) {
        double neg_dot = dot(center, emb.output.row(neg_id), dim);
        loss += softplus(neg_dot);
        axpy(sigmoid(neg_dot), emb.output.row(neg_id), grad_center.data(), dim);
        out_coeff.emplace_back(neg_id, sigmoid(neg_dot));
    }

    for (auto& [id, g] : out_coeff) axpy(-lr * g, center, emb.output.row(id), dim);
    axpy(-lr, grad_center.data(), emb.input.row(center_id), dim);
    return loss;
}

WordEmbeddingMatrix init_word_embeddings(size_t vocab_size, int dim, uint64_t seed) {
    WordEmbeddingMatrix emb;
    emb.input = Matrix(vocab_size, static_cast<size_t>(dim));
    emb.output = Matrix(vocab_size, static_cast<size_t>(dim));
    Rng rng(derive_seed(seed, "wordvec/init"));
    double half = 0.5 / dim;
    for (double& v : emb.input.data) v = rng.next_uniform(-half, half);
    return emb;
}

WordEmbeddingMatrix train_skipgram(const Dataset& dataset, const Vocabulary& vocab,
                                   const SgnsConfig& config) {
    if (vocab.empty()) throw std::runtime_error("train_skipgram: empty vocabulary");
    WordEmbeddingMatrix emb = init_word_embeddings(vocab.size(), config.dim, config.seed);
    if (config.epochs <= 0) return emb;

    SamplingDist dist = SamplingDist::from_counts(vocab.counts(), config.neg_power);
    Rng rng(derive_seed(config.seed, "wordvec/train"));

    long long total_tokens = 0;
    for (const auto& u : dataset.users)
        for (const auto& post : u.posts) total_tokens += static_cast<long long>(post.size());
    long long total_steps = total_tokens * config.epochs;
    if (total_steps == 0) return emb;

    double lr0 = config.learning_rate;
    long long step = 0;
    std::vector<int> negs(static_cast<size_t>(config.neg_count));
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (const auto& u : dataset.users) {
            for (const auto& post : u.posts) {
                int n = static_cast<int>(post.size());
                for (int i = 0; i < n; ++i, ++step) {
                    double frac = static_cast<double>(step) / static_cast<double>(total_steps);
                    double lr = lr0 * std::max(1.0 - frac, 1e-4);
                    int w = config.window;
                    if (config.dynamic_window)
                        w = 1 + static_cast<int>(rng.next_below(static_cast<uint64_t>(config.window)));
                    int lo = std::max(0, i - w);
                    int hi = std::min(n - 1, i + w);
                    for (int j = lo; j <= hi; ++j) {
                        if (j == i) continue;
                        for (auto& id : negs) id = dist.draw(rng);
                        sgns_step(emb, post[i], post[j], negs, lr);
                    }
                }
            }
        }
    }
    return emb;
}

}  // namespace cohort
