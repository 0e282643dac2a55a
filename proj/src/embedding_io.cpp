#include "cohort/embedding_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace cohort {

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void save_embeddings(const Matrix& vectors, const std::vector<std::string>& keys,
                     const std::string& path) {
    if (keys.size() != vectors.rows)
        throw std::runtime_error("save_embeddings: key count does not match row count");
    for (const auto& k : keys)
        if (k.empty() || k.find_first_of(" \t\n") != std::string::npos)
            throw std::runtime_error("save_embeddings: key \"" + k +
                                     "\" is empty or contains whitespace");
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_embeddings: cannot write " + path);
    os << vectors.rows << ' ' << vectors.cols << '\n';
    for (size_t i = 0; i < vectors.rows; ++i) {
        os << keys[i];
        const double* row = vectors.row(i);
        for (size_t j = 0; j < vectors.cols; ++j) os << ' ' << fmt_g17(row[j]);
        os << '\n';
    }
}

EmbeddingFile load_embeddings(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_embeddings: cannot open " + path);
    std::string line;
    if (!std::getline(is, line) || line.empty())
        throw std::runtime_error("load_embeddings: " + path + " is empty");
    std::istringstream header(line);
    long long count = -1, dim = -1;
    std::string extra;
    if (!(header >> count >> dim) || (header >> extra) || count < 0 || dim < 1)
        throw std::runtime_error("load_embeddings: bad header in " + path);

    EmbeddingFile file;
    file.keys.reserve(static_cast<size_t>(count));
    file.vectors = Matrix(static_cast<size_t>(count), static_cast<size_t>(dim));
    std::unordered_map<std::string, size_t> seen;

    size_t row = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (row >= static_cast<size_t>(count))
            throw std::runtime_error("load_embeddings: more rows than header count in " + path);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key))
            throw std::runtime_error("load_embeddings: malformed row " + std::to_string(row + 2) +
                                     " in " + path);
        if (!seen.emplace(key, row).second)
            throw std::runtime_error("load_embeddings: duplicate key \"" + key + "\" in " + path);
        double* dst = file.vectors.row(row);
        for (long long j = 0; j < dim; ++j) {
            if (!(ls >> dst[j]))
                throw std::runtime_error("load_embeddings: row for \"" + key + "\" has fewer than " +
                                         std::to_string(dim) + " values in " + path);
        }
        double trailing;
        if (ls >> trailing)
            throw std::runtime_error("load_embeddings: row for \"" + key + "\" has more than " +
                                     std::to_string(dim) + " values in " + path);
        file.keys.push_back(key);
        ++row;
    }
    if (row != static_cast<size_t>(count))
        throw std::runtime_error("load_embeddings: header promises " + std::to_string(count) +
                                 " rows but file has " + std::to_string(row));
    return file;
}

Matrix align_embeddings(const EmbeddingFile& file, const std::vector<std::string>& keys) {
    std::unordered_map<std::string, size_t> pos;
    for (size_t i = 0; i < file.keys.size(); ++i) pos.emplace(file.keys[i], i);

    std::unordered_map<std::string, size_t> wanted;
    for (const auto& k : keys) wanted.emplace(k, 0);
    for (const auto& k : file.keys)
        if (!wanted.count(k))
            throw std::runtime_error("align_embeddings: unknown key \"" + k +
                                     "\" in embedding file");

    Matrix out(keys.size(), file.vectors.cols);
    for (size_t i = 0; i < keys.size(); ++i) {
        auto it = pos.find(keys[i]);
        if (it == pos.end())
            throw std::runtime_error("align_embeddings: key \"" + keys[i] +
                                     "\" missing from embedding file");
        const double* src = file.vectors.row(it->second);
        std::copy(src, src + file.vectors.cols, out.row(i));
    }
    return out;
}

}  // namespace cohort
