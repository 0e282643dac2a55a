#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "cohort/embedding_io.hpp"
#include "cohort/rng.hpp"

using namespace cohort;

namespace {

std::string temp_file(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("save then load is bitwise exact") {
    Matrix m(3, 4);
    Rng rng(31);
    for (double& v : m.data) v = rng.next_uniform(-10.0, 10.0);
    m(1, 2) = 1.0 / 3.0;
    m(2, 0) = -1e-17;
    m(2, 3) = 12345678.987654321;

    std::string path = temp_file("emb_rt.vec");
    save_embeddings(m, {"alpha", "beta", "gamma"}, path);
    EmbeddingFile f = load_embeddings(path);
    REQUIRE(f.keys == std::vector<std::string>{"alpha", "beta", "gamma"});
    REQUIRE(f.vectors.rows == 3);
    REQUIRE(f.vectors.cols == 4);
    CHECK(f.vectors == m);
    std::remove(path.c_str());
}

TEST_CASE("malformed files are rejected") {
    std::string path = temp_file("emb_bad.vec");
    SUBCASE("row with extra value") {
        std::ofstream(path) << "2 3\n"
                               "a 1 2 3 4\n"
                               "b 1 2 3\n";
        CHECK_THROWS(load_embeddings(path));
    }
    SUBCASE("row with missing value") {
        std::ofstream(path) << "1 3\n"
                               "a 1 2\n";
        CHECK_THROWS(load_embeddings(path));
    }
    SUBCASE("empty file") {
        std::ofstream(path) << "";
        CHECK_THROWS(load_embeddings(path));
    }
    SUBCASE("count mismatch") {
        std::ofstream(path) << "3 2\n"
                               "a 1 2\n";
        CHECK_THROWS(load_embeddings(path));
    }
    SUBCASE("missing file") { CHECK_THROWS(load_embeddings(temp_file("emb_nonexistent.vec"))); }
    std::remove(path.c_str());
}

TEST_CASE("align_embeddings reorders and validates") {
    Matrix m(2, 2);
    m(0, 0) = 1.0;
    m(0, 1) = 2.0;
    m(1, 0) = 3.0;
    m(1, 1) = 4.0;
    std::string path = temp_file("emb_align.vec");
    save_embeddings(m, {"a", "b"}, path);
    EmbeddingFile f = load_embeddings(path);

    Matrix r = align_embeddings(f, {"b", "a"});
    CHECK(r(0, 0) == 3.0);
    CHECK(r(1, 0) == 1.0);

    CHECK_THROWS(align_embeddings(f, {"a"}));            // file key not requested
    CHECK_THROWS(align_embeddings(f, {"a", "b", "c"}));  // requested key missing
    std::remove(path.c_str());
}

TEST_CASE("fmt_g17 round-trips doubles") {
    Rng rng(41);
    for (int i = 0; i < 1000; ++i) {
        double v = rng.next_uniform(-1e6, 1e6) * std::pow(10.0, rng.next_below(20) * 1.0 - 10.0);
        double back = std::strtod(fmt_g17(v).c_str(), nullptr);
        CHECK(back == v);
    }
    CHECK(std::strtod(fmt_g17(0.1).c_str(), nullptr) == 0.1);
    CHECK(std::strtod(fmt_g17(-0.0).c_str(), nullptr) == 0.0);
}
