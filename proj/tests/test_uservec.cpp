#include <stdexcept>
#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"

#include "cohort/corpus.hpp"
#include "cohort/matrix.hpp"
#include "cohort/rng.hpp"
#include "cohort/uservec.hpp"
#include "cohort/wordvec.hpp"

using namespace cohort;

namespace {

// builds vectors whose dots with u are prescribed: u = e0, word = dot * e0
std::vector<double> vec_with_dot(double d, size_t dim) {
    std::vector<double> v(dim, 0.0);
    v[0] = d;
    return v;
}

Dataset two_token_dataset(int posts_per_user) {
    TokenizedDataset raw;
    std::vector<std::vector<std::string>> pa(posts_per_user, {"a", "a", "a"});
    std::vector<std::vector<std::string>> pb(posts_per_user, {"b", "b", "b"});
    raw.users.push_back({"ua", "control", pa});
    raw.users.push_back({"ub", "depression", pb});
    Vocabulary vocab = Vocabulary::build(count_tokens(raw), 1);
    return encode_dataset(raw, vocab);
}

Vocabulary two_token_vocab() {
    TokenizedDataset raw;
    raw.users.push_back({"ua", "control", {{"a", "b"}}});
    return Vocabulary::build(count_tokens(raw), 1);
}

}  // namespace

TEST_CASE("user2vec hinge loss worked cases") {
    const size_t dim = 4;
    std::vector<double> u = vec_with_dot(1.0, dim);

    SUBCASE("satisfied margin gives zero loss") {
        std::vector<double> wp = vec_with_dot(2.0, dim), wn = vec_with_dot(0.0, dim);
        std::vector<const double*> negs{wn.data()};
        CHECK(user2vec_loss(u.data(), wp.data(), negs, dim) == 0.0);
    }
    SUBCASE("equal dots give loss 1") {
        std::vector<double> wp = vec_with_dot(0.7, dim), wn = vec_with_dot(0.7, dim);
        std::vector<const double*> negs{wn.data()};
        CHECK(user2vec_loss(u.data(), wp.data(), negs, dim) == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("mixed negatives") {
        std::vector<double> wp = vec_with_dot(0.5, dim);
        std::vector<double> n1 = vec_with_dot(0.5, dim), n2 = vec_with_dot(-1.0, dim);
        std::vector<const double*> negs{n1.data(), n2.data()};
        CHECK(user2vec_loss(u.data(), wp.data(), negs, dim) == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("loss nonnegative, zero iff all margins at least 1") {
        Rng rng(3);
        for (int t = 0; t < 200; ++t) {
            std::vector<double> uu(dim), wp(dim), n1(dim), n2(dim);
            for (auto* v : {&uu, &wp, &n1, &n2})
                for (double& e : *v) e = rng.next_uniform(-1.0, 1.0);
            std::vector<const double*> negs{n1.data(), n2.data()};
            double loss = user2vec_loss(uu.data(), wp.data(), negs, dim);
            CHECK(loss >= 0.0);
            bool all_satisfied =
                dot(wp.data(), uu.data(), dim) - dot(n1.data(), uu.data(), dim) >= 1.0 &&
                dot(wp.data(), uu.data(), dim) - dot(n2.data(), uu.data(), dim) >= 1.0;
            CHECK((loss == 0.0) == all_satisfied);
        }
    }
}

TEST_CASE("user2vec gradient matches central differences away from kinks") {
    Rng rng(7);
    const size_t dim = 5;
    const double h = 1e-6;
    int checked = 0;
    while (checked < 50) {
        std::vector<double> u(dim), wp(dim), n1(dim), n2(dim);
        for (auto* v : {&u, &wp, &n1, &n2})
            for (double& e : *v) e = rng.next_uniform(-1.0, 1.0);
        // skip points with any margin within 1e-3 of the kink
        double m1 = 1.0 - dot(wp.data(), u.data(), dim) + dot(n1.data(), u.data(), dim);
        double m2 = 1.0 - dot(wp.data(), u.data(), dim) + dot(n2.data(), u.data(), dim);
        if (std::fabs(m1) < 1e-3 || std::fabs(m2) < 1e-3) continue;
        ++checked;

        std::vector<const double*> negs{n1.data(), n2.data()};
        std::vector<double> grad(dim, 0.0);
        user2vec_loss(u.data(), wp.data(), negs, dim, grad.data());

        for (size_t i = 0; i < dim; ++i) {
            std::vector<double> up = u, um = u;
            up[i] += h;
            um[i] -= h;
            double num = (user2vec_loss(up.data(), wp.data(), negs, dim) -
                          user2vec_loss(um.data(), wp.data(), negs, dim)) /
                         (2.0 * h);
            double denom = std::max({std::fabs(grad[i]), std::fabs(num), 1e-8});
            CHECK(std::fabs(grad[i] - num) / denom < 1e-4);
        }
    }
}

TEST_CASE("heldout_score") {
    const size_t dim = 6;
    Matrix words(3, dim);
    Rng rng(9);
    for (double& v : words.data) v = rng.next_uniform(-0.5, 0.5);
    SamplingDist dist = SamplingDist::from_counts({4, 2, 1}, 0.75);
    std::vector<std::vector<int>> heldout{{0, 1}, {2}};

    SUBCASE("zero vector scores neg_count") {
        std::vector<double> u(dim, 0.0);
        CHECK(heldout_score(u, heldout, words, dist, 20, 5) == doctest::Approx(20.0).epsilon(1e-15));
    }
    SUBCASE("frozen negatives give identical repeat scores") {
        std::vector<double> u(dim);
        for (double& v : u) v = rng.next_uniform(-1.0, 1.0);
        double a = heldout_score(u, heldout, words, dist, 5, 77);
        double b = heldout_score(u, heldout, words, dist, 5, 77);
        CHECK(a == b);
    }
    SUBCASE("gradient step does not increase the frozen score") {
        // aggregate grad over held-out tokens with the same frozen negatives
        // is not exposed; use the per-token loss descent property instead:
        // moving u against grad_u of the total hinge loss on fixed samples
        std::vector<double> u(dim);
        for (double& v : u) v = rng.next_uniform(-1.0, 1.0);
        double before = heldout_score(u, heldout, words, dist, 5, 123);

        // numeric descent direction for f(u) = heldout_score(u) on frozen seed
        const double h = 1e-6;
        std::vector<double> g(dim);
        for (size_t i = 0; i < dim; ++i) {
            std::vector<double> up = u, um = u;
            up[i] += h;
            um[i] -= h;
            g[i] = (heldout_score(up, heldout, words, dist, 5, 123) -
                    heldout_score(um, heldout, words, dist, 5, 123)) /
                   (2.0 * h);
        }
        std::vector<double> moved = u;
        axpy(-1e-3, g.data(), moved.data(), dim);
        CHECK(heldout_score(moved, heldout, words, dist, 5, 123) <= before + 1e-12);
    }
}

TEST_CASE("train_user_vector") {
    Dataset ds = two_token_dataset(10);
    Vocabulary vocab = two_token_vocab();
    const size_t dim = 8;
    Matrix words(2, dim);
    words(0, 0) = 1.0;  // E_a = e0
    words(1, 1) = 1.0;  // E_b = e1
    SamplingDist dist = SamplingDist::from_counts({1, 1}, 0.75);

    UserTrainConfig cfg;
    cfg.neg_count = 4;
    cfg.learning_rate = 0.05;
    cfg.seed = 13;

    SUBCASE("sign structure follows authored tokens") {
        int a = vocab.id_of("a"), b = vocab.id_of("b");
        std::vector<double> ua = train_user_vector(ds.users[0], words, dist, cfg);
        std::vector<double> ub = train_user_vector(ds.users[1], words, dist, cfg);
        CHECK(dot(ua.data(), words.row(a), dim) > dot(ua.data(), words.row(b), dim));
        CHECK(dot(ub.data(), words.row(b), dim) > dot(ub.data(), words.row(a), dim));
    }
    SUBCASE("max_epochs=0 returns initialization") {
        UserTrainConfig zero = cfg;
        zero.max_epochs = 0;
        std::vector<double> u = train_user_vector(ds.users[0], words, dist, zero);
        Rng init(derive_seed(cfg.seed, "uservec/init/" + ds.users[0].user_id));
        double half = 0.5 / static_cast<double>(dim);
        for (size_t i = 0; i < dim; ++i) CHECK(u[i] == init.next_uniform(-half, half));
    }
    SUBCASE("same seed twice is identical") {
        std::vector<double> a = train_user_vector(ds.users[0], words, dist, cfg);
        std::vector<double> b = train_user_vector(ds.users[0], words, dist, cfg);
        CHECK(a == b);
    }
    SUBCASE("word matrix is untouched") {
        Matrix before = words;
        train_user_vector(ds.users[0], words, dist, cfg);
        CHECK(words == before);
    }
}

TEST_CASE("train_all_users") {
    Dataset ds = two_token_dataset(10);
    Vocabulary vocab = two_token_vocab();
    const size_t dim = 8;
    Matrix words(2, dim);
    Rng rng(19);
    for (double& v : words.data) v = rng.next_uniform(-0.5, 0.5);

    UserTrainConfig cfg;
    cfg.neg_count = 4;
    cfg.seed = 13;

    SUBCASE("row order matches dataset order") {
        UserEmbeddingMatrix users = train_all_users(ds, vocab, words, cfg);
        REQUIRE(users.user_count() == 2);
        CHECK(users.user_ids == std::vector<std::string>{"ua", "ub"});
        CHECK(users.index_of("ub") == 1);
        CHECK(users.index_of("nope") == -1);
    }
    SUBCASE("word matrix bitwise unchanged") {
        Matrix before = words;
        train_all_users(ds, vocab, words, cfg);
        CHECK(words == before);
    }
    SUBCASE("parallel equals serial bitwise") {
        UserTrainConfig par = cfg;
        par.threads = 4;
        UserEmbeddingMatrix serial = train_all_users(ds, vocab, words, cfg);
        UserEmbeddingMatrix parallel = train_all_users(ds, vocab, words, par);
        CHECK(serial.vectors == parallel.vectors);
        CHECK(serial.user_ids == parallel.user_ids);
    }
    SUBCASE("result independent of user order") {
        Dataset swapped = ds;
        std::swap(swapped.users[0], swapped.users[1]);
        UserEmbeddingMatrix a = train_all_users(ds, vocab, words, cfg);
        UserEmbeddingMatrix b = train_all_users(swapped, vocab, words, cfg);
        int ua_a = a.index_of("ua"), ua_b = b.index_of("ua");
        for (size_t j = 0; j < dim; ++j)
            CHECK(a.vectors(static_cast<size_t>(ua_a), j) ==
                  b.vectors(static_cast<size_t>(ua_b), j));
    }
    SUBCASE("user with no in-vocabulary tokens is an error naming the user") {
        Dataset bad = ds;
        bad.users[1].posts.clear();
        CHECK_THROWS_WITH_AS(train_all_users(bad, vocab, words, cfg), doctest::Contains("ub"),
                             std::runtime_error);
    }
}

TEST_CASE("pv modes") {
    Dataset ds = two_token_dataset(12);
    Vocabulary vocab = two_token_vocab();

    UserTrainConfig cfg;
    cfg.neg_count = 3;
    cfg.window = 2;
    cfg.dim = 6;
    cfg.max_epochs = 8;
    cfg.seed = 21;

    SUBCASE("pvdbow epochs=0 returns initializations") {
        UserTrainConfig zero = cfg;
        zero.mode = UserMode::pvdbow;
        zero.max_epochs = 0;
        auto [users, words] = train_pvdbow(ds, vocab, zero);
        Rng winit(derive_seed(cfg.seed, "wordvec/init"));
        double half = 0.5 / static_cast<double>(cfg.dim);
        for (double v : words.input.data) CHECK(v == winit.next_uniform(-half, half));
        for (double v : words.output.data) CHECK(v == 0.0);
        REQUIRE(users.user_count() == 2);
    }
    SUBCASE("pvdbow deterministic per seed") {
        UserTrainConfig c = cfg;
        c.mode = UserMode::pvdbow;
        auto [u1, w1] = train_pvdbow(ds, vocab, c);
        auto [u2, w2] = train_pvdbow(ds, vocab, c);
        CHECK(u1.vectors == u2.vectors);
        CHECK(w1.output == w2.output);
    }
    SUBCASE("pvdm deterministic per seed") {
        UserTrainConfig c = cfg;
        c.mode = UserMode::pvdm;
        auto [u1, w1] = train_pvdm(ds, vocab, c);
        auto [u2, w2] = train_pvdm(ds, vocab, c);
        CHECK(u1.vectors == u2.vectors);
        CHECK(w1.input == w2.input);
    }
    SUBCASE("pvdm trains on single-token posts without context") {
        // center with empty context is skipped, so training still succeeds
        TokenizedDataset raw;
        raw.users.push_back({"u1", "control",
                             std::vector<std::vector<std::string>>(5, {"a"})});
        raw.users.push_back({"u2", "ptsd",
                             std::vector<std::vector<std::string>>(5, {"a", "b"})});
        Vocabulary v = Vocabulary::build(count_tokens(raw), 1);
        Dataset d = encode_dataset(raw, v);
        UserTrainConfig c = cfg;
        c.mode = UserMode::pvdm;
        auto [users, words] = train_pvdm(d, v, c);
        CHECK(users.user_count() == 2);
        for (double x : users.vectors.data) CHECK(std::isfinite(x));
    }
}

TEST_CASE("parse_user_mode") {
    CHECK(parse_user_mode("user2vec") == UserMode::user2vec);
    CHECK(parse_user_mode("pvdbow") == UserMode::pvdbow);
    CHECK(parse_user_mode("pvdm") == UserMode::pvdm);
    CHECK_THROWS(parse_user_mode("doc2vec"));
    CHECK(user_mode_name(UserMode::pvdm) == "pvdm");
}
