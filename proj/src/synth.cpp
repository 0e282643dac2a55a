#include "cohort/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "cohort/matrix.hpp"
#include "cohort/rng.hpp"

#include "json.hpp"

namespace cohort {

namespace {

std::string class_label(int cls) {
    static const char* canonical[] = {"control", "depression", "ptsd"};
    if (cls < 3) return canonical[cls];
    return "class" + std::to_string(cls);
}

// uniform by default; zipf weights entry i by 1/(i+1)
struct PoolSampler {
    std::vector<double> cdf;

    PoolSampler(size_t size, bool zipf) {
        cdf.resize(size);
        double total = 0.0;
        for (size_t i = 0; i < size; ++i) {
            double w = zipf ? 1.0 / static_cast<double>(i + 1) : 1.0;
            total += w;
            cdf[i] = total;
        }
        for (double& v : cdf) v /= total;
        cdf.back() = 1.0;
    }

    size_t draw(Rng& rng) const {
        double u = rng.next_double();
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        if (it == cdf.end()) --it;
        return static_cast<size_t>(it - cdf.begin());
    }
};

}  // namespace

TokenizedDataset make_cohort_corpus(const SynthConfig& config) {
    if (config.num_classes < 1 || config.users_per_class < 1 || config.posts_per_user < 1 ||
        config.tokens_per_post < 1 || config.shared_vocab_size < 1 ||
        config.class_vocab_size < 1)
        throw std::runtime_error("make_cohort_corpus: all sizes must be positive");
    if (config.class_weight < 0.0 || config.class_weight > 1.0)
        throw std::runtime_error("make_cohort_corpus: lambda must be in [0,1]");

    std::vector<std::string> shared;
    shared.reserve(static_cast<size_t>(config.shared_vocab_size));
    for (int i = 0; i < config.shared_vocab_size; ++i)
        shared.push_back("s" + std::to_string(i));
    std::vector<std::vector<std::string>> class_pools(static_cast<size_t>(config.num_classes));
    for (int cls = 0; cls < config.num_classes; ++cls)
        for (int i = 0; i < config.class_vocab_size; ++i)
            class_pools[static_cast<size_t>(cls)].push_back("c" + std::to_string(cls) + "w" +
                                                            std::to_string(i));

    PoolSampler shared_sampler(shared.size(), config.zipf);
    PoolSampler class_sampler(class_pools[0].size(), config.zipf);

    TokenizedDataset ds;
    for (int cls = 0; cls < config.num_classes; ++cls) {
        std::string label = class_label(cls);
        for (int u = 0; u < config.users_per_class; ++u) {
            TokenizedUser user;
            user.label = label;
            user.user_id = label + "_u" + std::to_string(u);
            Rng rng(derive_seed(config.seed, "synth/user/" + user.user_id));
            for (int p = 0; p < config.posts_per_user; ++p) {
                std::vector<std::string> post;
                post.reserve(static_cast<size_t>(config.tokens_per_post));
                for (int t = 0; t < config.tokens_per_post; ++t) {
                    if (rng.next_double() < config.class_weight)
                        post.push_back(
                            class_pools[static_cast<size_t>(cls)][class_sampler.draw(rng)]);
                    else
                        post.push_back(shared[shared_sampler.draw(rng)]);
                }
                user.posts.push_back(std::move(post));
            }
            ds.users.push_back(std::move(user));
        }
    }
    return ds;
}

double separability_oracle(const Dataset& dataset) {
    size_t n = dataset.users.size();
    if (n < 2) throw std::runtime_error("separability_oracle: need at least 2 users");
    size_t vocab = 0;
    for (const auto& u : dataset.users)
        for (const auto& post : u.posts)
            for (int id : post) vocab = std::max(vocab, static_cast<size_t>(id) + 1);

    size_t n_classes = 0;
    for (const auto& u : dataset.users)
        n_classes = std::max(n_classes, static_cast<size_t>(u.label) + 1);

    Matrix X(n, vocab);
    for (size_t i = 0; i < n; ++i) {
        double* row = X.row(i);
        for (const auto& post : dataset.users[i].posts)
            for (int id : post) row[static_cast<size_t>(id)] += 1.0;
        double norm = l2_norm(row, vocab);
        if (norm > 0.0)
            for (size_t j = 0; j < vocab; ++j) row[j] /= norm;
    }

    Matrix sums(n_classes, vocab);
    std::vector<size_t> counts(n_classes, 0);
    for (size_t i = 0; i < n; ++i) {
        size_t cls = static_cast<size_t>(dataset.users[i].label);
        axpy(1.0, X.row(i), sums.row(cls), vocab);
        ++counts[cls];
    }

    size_t correct = 0;
    std::vector<double> centroid(vocab);
    for (size_t i = 0; i < n; ++i) {
        size_t own = static_cast<size_t>(dataset.users[i].label);
        double best_dist = 0.0;
        size_t best_cls = n_classes;
        for (size_t cls = 0; cls < n_classes; ++cls) {
            size_t m = counts[cls] - (cls == own ? 1 : 0);
            if (m == 0) continue;
            for (size_t j = 0; j < vocab; ++j) {
                double s = sums(cls, j) - (cls == own ? X(i, j) : 0.0);
                centroid[j] = s / static_cast<double>(m);
            }
            double dist = 0.0;
            for (size_t j = 0; j < vocab; ++j) {
                double diff = X(i, j) - centroid[j];
                dist += diff * diff;
            }
            if (best_cls == n_classes || dist < best_dist) {
                best_dist = dist;
                best_cls = cls;
            }
        }
        if (best_cls == own) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(n);
}

double separability_oracle(const TokenizedDataset& dataset) {
    Vocabulary vocab = Vocabulary::build(count_tokens(dataset), 1);
    return separability_oracle(encode_dataset(dataset, vocab));
}

void save_jsonl(const TokenizedDataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& user : dataset.users) {
        nlohmann::json j;
        j["user_id"] = user.user_id;
        j["label"] = user.label;
        std::vector<std::string> posts;
        posts.reserve(user.posts.size());
        for (const auto& post : user.posts) {
            std::string text;
            for (size_t t = 0; t < post.size(); ++t) {
                if (t) text += ' ';
                text += post[t];
            }
            posts.push_back(std::move(text));
        }
        j["posts"] = posts;
        out << j.dump() << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace cohort
