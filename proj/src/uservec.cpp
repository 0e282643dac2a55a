#include "cohort/uservec.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace cohort {

namespace {

double softplus(double x) {
    return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

std::vector<double> init_user_vector(const std::string& user_id, size_t dim, uint64_t seed) {
    Rng rng(derive_seed(seed, "uservec/init/" + user_id));
    std::vector<double> u(dim);
    double half = 0.5 / static_cast<double>(dim);
    for (double& v : u) v = rng.next_uniform(-half, half);
    return u;
}

void require_posts(const UserHistory& history) {
    if (history.posts.empty())
        throw std::runtime_error("train_users: user \"" + history.user_id +
                                 "\" has no in-vocabulary tokens");
}

// one negative-sampling logistic step scoring `target` (and negatives) against
// `center`; coefficients computed before any update is applied
double logistic_step(double* center, size_t dim, Matrix& output, int target_id,
                     const std::vector<int>& negative_ids, double lr) {
    std::vector<double> grad_center(dim, 0.0);
    std::vector<std::pair<int, double>> out_coeff;
    out_coeff.reserve(negative_ids.size() + 1);

    double pos_dot = dot(center, output.row(target_id), dim);
    double loss = softplus(-pos_dot);
    axpy(sigmoid(pos_dot) - 1.0, output.row(target_id), grad_center.data(), dim);
    out_coeff.emplace_back(target_id, sigmoid(pos_dot) - 1.0);

    for (int neg_id : negative_ids) {
        double neg_dot = dot(center, output.row(neg_id), dim);
        loss += softplus(neg_dot);
        axpy(sigmoid(neg_dot), output.row(neg_id), grad_center.data(), dim);
        out_coeff.emplace_back(neg_id, sigmoid(neg_dot));
    }

    for (auto& [id, g] : out_coeff) axpy(-lr * g, center, output.row(id), dim);
    axpy(-lr, grad_center.data(), center, dim);
    return loss;
}

}  // namespace

UserMode parse_user_mode(const std::string& name) {
    if (name == "user2vec") return UserMode::user2vec;
    if (name == "pvdbow") return UserMode::pvdbow;
    if (name == "pvdm") return UserMode::pvdm;
    throw std::runtime_error("unknown user embedding mode \"" + name + "\"");
}

std::string user_mode_name(UserMode mode) {
    switch (mode) {
        case UserMode::user2vec: return "user2vec";
        case UserMode::pvdbow: return "pvdbow";
        case UserMode::pvdm: return "pvdm";
    }
    return "user2vec";
}

int UserEmbeddingMatrix::index_of(const std::string& user_id) const {
    for (size_t i = 0; i < user_ids.size(); ++i)
        if (user_ids[i] == user_id) return static_cast<int>(i);
    return -1;
}

double user2vec_loss(const double* u, const double* w_pos,
                     const std::vector<const double*>& negatives, size_t dim,
                     double* grad_u) {
    double pos_dot = dot(w_pos, u, dim);
    double loss = 0.0;
    for (const double* w_neg : negatives) {
        double term = 1.0 - pos_dot + dot(w_neg, u, dim);
        if (term > 0.0) {
            loss += term;
            if (grad_u)
                for (size_t i = 0; i < dim; ++i) grad_u[i] += w_neg[i] - w_pos[i];
        }
    }
    return loss;
}

double heldout_score(const std::vector<double>& u,
                     const std::vector<std::vector<int>>& heldout_posts,
                     const Matrix& word_embs, const SamplingDist& dist,
                     int neg_count, uint64_t seed) {
    size_t dim = word_embs.cols;
    Rng rng(seed);
    std::vector<const double*> negs(static_cast<size_t>(neg_count));
    double total = 0.0;
    long long tokens = 0;
    for (const auto& post : heldout_posts) {
        for (int token : post) {
            for (auto& w : negs) w = word_embs.row(dist.draw(rng));
            total += user2vec_loss(u.data(), word_embs.row(token), negs, dim);
            ++tokens;
        }
    }
    if (tokens == 0) throw std::runtime_error("heldout_score: empty held-out set");
    return total / static_cast<double>(tokens);
}

std::vector<double> train_user_vector(const UserHistory& history, const Matrix& word_embs,
                                      const SamplingDist& dist, const UserTrainConfig& config) {
    require_posts(history);
    size_t dim = word_embs.cols;
    std::vector<double> u = init_user_vector(history.user_id, dim, config.seed);
    if (config.max_epochs <= 0) return u;

    HeldOutSplit split = split_heldout(history, config.heldout_fraction, config.seed);
    std::vector<std::vector<int>> heldout;
    for (size_t idx : split.heldout_posts) heldout.push_back(history.posts[idx]);

    Rng train_rng(derive_seed(config.seed, "uservec/train/" + history.user_id));
    uint64_t heldout_seed = derive_seed(config.seed, "uservec/heldout/" + history.user_id);

    std::vector<int> neg_ids(static_cast<size_t>(config.neg_count));
    std::vector<const double*> negs(static_cast<size_t>(config.neg_count));
    std::vector<double> grad(dim);

    std::vector<double> best_u = u;
    double best_score = std::numeric_limits<double>::infinity();
    int stale = 0;
    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        for (size_t idx : split.train_posts) {
            for (int token : history.posts[idx]) {
                for (size_t k = 0; k < neg_ids.size(); ++k) {
                    neg_ids[k] = dist.draw(train_rng);
                    negs[k] = word_embs.row(neg_ids[k]);
                }
                std::fill(grad.begin(), grad.end(), 0.0);
                user2vec_loss(u.data(), word_embs.row(token), negs, dim, grad.data());
                axpy(-config.learning_rate, grad.data(), u.data(), dim);
            }
        }
        double score = heldout_score(u, heldout, word_embs, dist, config.neg_count, heldout_seed);
        if (score < best_score) {
            best_score = score;
            best_u = u;
            stale = 0;
        } else if (++stale >= config.patience) {
            break;
        }
    }
    return best_u;
}

UserEmbeddingMatrix train_all_users(const Dataset& dataset, const Vocabulary& vocab,
                                    const Matrix& word_embs, const UserTrainConfig& config) {
    if (word_embs.rows != vocab.size())
        throw std::runtime_error("train_all_users: word matrix does not match vocabulary");
    SamplingDist dist = SamplingDist::from_counts(vocab.counts(), config.neg_power);

    UserEmbeddingMatrix result;
    result.vectors = Matrix(dataset.users.size(), word_embs.cols);
    result.user_ids.reserve(dataset.users.size());
    for (const auto& u : dataset.users) result.user_ids.push_back(u.user_id);

    auto train_one = [&](size_t j) {
        std::vector<double> u = train_user_vector(dataset.users[j], word_embs, dist, config);
        std::copy(u.begin(), u.end(), result.vectors.row(j));
    };

    if (config.threads <= 1) {
        for (size_t j = 0; j < dataset.users.size(); ++j) train_one(j);
        return result;
    }

    std::atomic<size_t> next{0};
    std::vector<std::string> errors(dataset.users.size());
    auto worker = [&] {
        for (;;) {
            size_t j = next.fetch_add(1);
            if (j >= dataset.users.size()) break;
            try {
                train_one(j);
            } catch (const std::exception& e) {
                errors[j] = e.what();
            }
        }
    };
    size_t n_threads = std::min<size_t>(static_cast<size_t>(config.threads), dataset.users.size());
    std::vector<std::thread> pool;
    for (size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (const auto& err : errors)
        if (!err.empty()) throw std::runtime_error(err);
    return result;
}

std::pair<UserEmbeddingMatrix, WordEmbeddingMatrix>
train_pvdbow(const Dataset& dataset, const Vocabulary& vocab, const UserTrainConfig& config) {
    if (vocab.empty()) throw std::runtime_error("train_pvdbow: empty vocabulary");
    WordEmbeddingMatrix words = init_word_embeddings(vocab.size(), config.dim, config.seed);

    UserEmbeddingMatrix users;
    users.vectors = Matrix(dataset.users.size(), static_cast<size_t>(config.dim));
    for (size_t j = 0; j < dataset.users.size(); ++j) {
        require_posts(dataset.users[j]);
        users.user_ids.push_back(dataset.users[j].user_id);
        std::vector<double> u =
            init_user_vector(dataset.users[j].user_id, static_cast<size_t>(config.dim), config.seed);
        std::copy(u.begin(), u.end(), users.vectors.row(j));
    }
    if (config.max_epochs <= 0) return {std::move(users), std::move(words)};

    SamplingDist dist = SamplingDist::from_counts(vocab.counts(), config.neg_power);
    Rng rng(derive_seed(config.seed, "pv/train"));
    std::vector<int> negs(static_cast<size_t>(config.neg_count));
    size_t dim = static_cast<size_t>(config.dim);

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        for (size_t j = 0; j < dataset.users.size(); ++j) {
            double* u = users.vectors.row(j);
            for (const auto& post : dataset.users[j].posts) {
                size_t n = post.size();
                for (size_t i = 0; i < n; ++i) {
                    size_t end = std::min(n, i + static_cast<size_t>(config.window));
                    size_t pick = i + static_cast<size_t>(rng.next_below(end - i));
                    for (auto& id : negs) id = dist.draw(rng);
                    logistic_step(u, dim, words.output, post[pick], negs, config.learning_rate);
                }
            }
        }
    }
    return {std::move(users), std::move(words)};
}

std::pair<UserEmbeddingMatrix, WordEmbeddingMatrix>
train_pvdm(const Dataset& dataset, const Vocabulary& vocab, const UserTrainConfig& config) {
    if (vocab.empty()) throw std::runtime_error("train_pvdm: empty vocabulary");
    WordEmbeddingMatrix words = init_word_embeddings(vocab.size(), config.dim, config.seed);

    UserEmbeddingMatrix users;
    users.vectors = Matrix(dataset.users.size(), static_cast<size_t>(config.dim));
    for (size_t j = 0; j < dataset.users.size(); ++j) {
        require_posts(dataset.users[j]);
        users.user_ids.push_back(dataset.users[j].user_id);
        std::vector<double> u =
            init_user_vector(dataset.users[j].user_id, static_cast<size_t>(config.dim), config.seed);
        std::copy(u.begin(), u.end(), users.vectors.row(j));
    }
    if (config.max_epochs <= 0) return {std::move(users), std::move(words)};

    SamplingDist dist = SamplingDist::from_counts(vocab.counts(), config.neg_power);
    Rng rng(derive_seed(config.seed, "pv/train"));
    std::vector<int> negs(static_cast<size_t>(config.neg_count));
    size_t dim = static_cast<size_t>(config.dim);
    std::vector<double> h(dim), grad_h(dim);

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        for (size_t j = 0; j < dataset.users.size(); ++j) {
            double* u = users.vectors.row(j);
            for (const auto& post : dataset.users[j].posts) {
                int n = static_cast<int>(post.size());
                for (int i = 0; i < n; ++i) {
                    int lo = std::max(0, i - config.window);
                    int hi = std::min(n - 1, i + config.window);
                    std::vector<int> context;
                    for (int k = lo; k <= hi; ++k)
                        if (k != i) context.push_back(post[k]);
                    if (context.empty()) continue;

                    double scale = 1.0 / static_cast<double>(context.size() + 1);
                    std::copy(u, u + dim, h.begin());
                    for (int c : context) axpy(1.0, words.input.row(c), h.data(), dim);
                    for (double& v : h) v *= scale;

                    for (auto& id : negs) id = dist.draw(rng);

                    std::fill(grad_h.begin(), grad_h.end(), 0.0);
                    std::vector<std::pair<int, double>> out_coeff;
                    out_coeff.reserve(negs.size() + 1);
                    double pos_dot = dot(h.data(), words.output.row(post[i]), dim);
                    axpy(sigmoid(pos_dot) - 1.0, words.output.row(post[i]), grad_h.data(), dim);
                    out_coeff.emplace_back(post[i], sigmoid(pos_dot) - 1.0);
                    for (int neg_id : negs) {
                        double neg_dot = dot(h.data(), words.output.row(neg_id), dim);
                        axpy(sigmoid(neg_dot), words.output.row(neg_id), grad_h.data(), dim);
                        out_coeff.emplace_back(neg_id, sigmoid(neg_dot));
                    }

                    double lr = config.learning_rate;
                    for (auto& [id, g] : out_coeff) axpy(-lr * g, h.data(), words.output.row(id), dim);
                    axpy(-lr * scale, grad_h.data(), u, dim);
                    for (int c : context) axpy(-lr * scale, grad_h.data(), words.input.row(c), dim);
                }
            }
        }
    }
    return {std::move(users), std::move(words)};
}

}  // namespace cohort
