#pragma once

#include <string>
#include <vector>

#include "cohort/matrix.hpp"

namespace cohort {

// Embeddings on disk use the word2vec text format: a "<count> <dim>" header
// followed by one "key v1 ... vd" line per vector. Values are written with
// 17 significant digits so that save/load round-trips are bitwise exact.
struct EmbeddingFile {
    std::vector<std::string> keys;
    Matrix vectors;  // one row per key
};

void save_embeddings(const Matrix& vectors, const std::vector<std::string>& keys,
                     const std::string& path);

EmbeddingFile load_embeddings(const std::string& path);

// Reorders file rows to match the given key order. Errors on keys present
// in the file but not requested, and on requested keys missing from the
// file, so embedding files and vocabularies cannot silently drift apart.
Matrix align_embeddings(const EmbeddingFile& file, const std::vector<std::string>& keys);

// 17-significant-digit decimal rendering; parses back to the same double.
std::string fmt_g17(double v);

}  // namespace cohort
