#include <stdexcept>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "cohort/pipeline.hpp"

using namespace cohort;

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig tiny_config(const fs::path& dir) {
    RunConfig c;
    c.out_dir = (dir / "out").string();
    c.seed = 9;
    c.synth_classes = 3;
    c.synth_users = 8;
    c.synth_posts = 12;
    c.synth_tokens = 8;
    c.synth_shared_vocab = 60;
    c.synth_class_vocab = 20;
    c.synth_lambda = 0.6;
    c.min_history = 5;
    c.min_count = 2;
    c.heldout_fraction = 0.2;
    c.word_dim = 8;
    c.word_window = 3;
    c.word_epochs = 2;
    c.neg_count = 3;
    c.user_max_epochs = 3;
    c.user_patience = 2;
    c.lr_c_grid = {1.0};
    c.nlse_s_dim = 4;
    c.nlse_s_dim_grid = {4};
    c.nlse_alpha_grid = {0.1};
    c.nlse_max_epochs = 10;
    c.nlse_patience = 3;
    c.cv_folds = 2;
    c.homophily_k = 5;
    return c;
}

}  // namespace

TEST_CASE("run_experiment produces the full artifact set") {
    fs::path dir = fs::temp_directory_path() / "cohort_test_pipeline";
    fs::remove_all(dir);
    fs::create_directories(dir);
    RunConfig c = tiny_config(dir);
    std::string corpus = (dir / "corpus.jsonl").string();
    cmd_synth(c, corpus);
    c.dataset = corpus;
    run_experiment(c);

    fs::path out(c.out_dir);
    for (const char* name :
         {"config.txt", "vocab.tsv", "corpus.enc", "labels.csv", "words.vec",
          "users_user2vec.vec", "users_pvdbow.vec", "users_pvdm.vec", "features_bow.csv",
          "features_boe.csv", "homophily_auc_user2vec.csv", "homophily_roc_user2vec.csv",
          "neighbors_user2vec.csv", "homophily_auc_pvdm.csv", "homophily_auc_pvdbow.csv",
          "cv_log.txt", "cv_lr_bow.csv", "cv_lr_boe.csv", "cv_lr_u2v.csv", "cv_lr_pvdm.csv",
          "cv_lr_pvdbow.csv", "cv_lr_u2v+bow.csv", "cv_lr_u2v+boe.csv", "cv_nlse_u2v.csv",
          "cv_nlse_pvdm.csv", "cv_nlse_pvdbow.csv", "nlse_model.csv", "subspace_user2vec.csv",
          "prototypes.csv", "summary.csv"})
        CHECK_MESSAGE(fs::exists(out / name), name);

    std::ifstream summary(out / "summary.csv");
    std::string line;
    std::getline(summary, line);
    CHECK(line == "model,macro_f1,binary_f1");
    const std::vector<std::string> order = {"lr_bow",     "lr_boe",    "lr_u2v",
                                            "lr_pvdm",    "lr_pvdbow", "lr_u2v+bow",
                                            "lr_u2v+boe", "nlse_u2v",  "nlse_pvdm",
                                            "nlse_pvdbow"};
    for (const auto& model : order) {
        REQUIRE(std::getline(summary, line));
        CHECK(line.rfind(model + ",", 0) == 0);
        // two comma-separated metric fields follow the model name
        size_t first = line.find(','), second = line.find(',', first + 1);
        CHECK(second != std::string::npos);
        CHECK(line.find(',', second + 1) == std::string::npos);
    }
    CHECK(!std::getline(summary, line));

    SUBCASE("rerun is bitwise identical") {
        RunConfig c2 = tiny_config(dir);
        c2.dataset = corpus;
        c2.out_dir = (dir / "out2").string();
        run_experiment(c2);
        CHECK(slurp(out / "summary.csv") == slurp(fs::path(c2.out_dir) / "summary.csv"));
        CHECK(slurp(out / "words.vec") == slurp(fs::path(c2.out_dir) / "words.vec"));
        CHECK(slurp(out / "users_user2vec.vec") ==
              slurp(fs::path(c2.out_dir) / "users_user2vec.vec"));
        CHECK(slurp(out / "cv_log.txt") == slurp(fs::path(c2.out_dir) / "cv_log.txt"));
    }

    fs::remove_all(dir);
}

TEST_CASE("stage errors name the failing stage") {
    fs::path dir = fs::temp_directory_path() / "cohort_test_pipeline_err";
    fs::remove_all(dir);
    fs::create_directories(dir);
    RunConfig c = tiny_config(dir);
    c.dataset = (dir / "missing.jsonl").string();
    CHECK_THROWS_WITH_AS(run_experiment(c), doctest::Contains("[stage ingest]"),
                         std::runtime_error);
    CHECK_THROWS_WITH_AS(
        cmd_train_words(c, (dir / "not_ingested").string(), (dir / "w.vec").string()),
        doctest::Contains("[stage train-words]"), std::runtime_error);
    fs::remove_all(dir);
}
