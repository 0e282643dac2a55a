#include "cohort/features.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "cohort/embedding_io.hpp"

namespace cohort {

FeatureVector bow_features(const UserHistory& history, const Vocabulary& vocab) {
    FeatureVector f;
    f.kind = "bow";
    f.values.assign(vocab.size(), 0.0);
    for (const auto& post : history.posts)
        for (int token : post) f.values[static_cast<size_t>(token)] = 1.0;
    return f;
}

FeatureVector boe_features(const UserHistory& history, const Matrix& word_embs, bool mean) {
    FeatureVector f;
    f.kind = "boe";
    f.values.assign(word_embs.cols, 0.0);
    long long tokens = 0;
    for (const auto& post : history.posts) {
        for (int token : post) {
            axpy(1.0, word_embs.row(token), f.values.data(), word_embs.cols);
            ++tokens;
        }
    }
    if (tokens == 0) {
        std::cerr << "warning: user \"" << history.user_id
                  << "\" has no in-vocabulary tokens; boe features are zero\n";
        return f;
    }
    if (mean)
        for (double& v : f.values) v /= static_cast<double>(tokens);
    return f;
}

FeatureVector concat_features(const FeatureVector& a, const FeatureVector& b) {
    FeatureVector f;
    f.kind = a.kind + "+" + b.kind;
    f.values = a.values;
    f.values.insert(f.values.end(), b.values.begin(), b.values.end());
    return f;
}

namespace {

FeatureTable table_from(const Dataset& dataset, const std::string& kind, size_t dim) {
    FeatureTable t;
    t.kind = kind;
    t.values = Matrix(dataset.users.size(), dim);
    t.user_ids.reserve(dataset.users.size());
    t.labels.reserve(dataset.users.size());
    for (const auto& u : dataset.users) {
        t.user_ids.push_back(u.user_id);
        t.labels.push_back(u.label);
    }
    return t;
}

}  // namespace

FeatureTable bow_table(const Dataset& dataset, const Vocabulary& vocab) {
    FeatureTable t = table_from(dataset, "bow", vocab.size());
    for (size_t j = 0; j < dataset.users.size(); ++j) {
        FeatureVector f = bow_features(dataset.users[j], vocab);
        std::copy(f.values.begin(), f.values.end(), t.values.row(j));
    }
    return t;
}

FeatureTable boe_table(const Dataset& dataset, const Matrix& word_embs, bool mean) {
    FeatureTable t = table_from(dataset, "boe", word_embs.cols);
    for (size_t j = 0; j < dataset.users.size(); ++j) {
        FeatureVector f = boe_features(dataset.users[j], word_embs, mean);
        std::copy(f.values.begin(), f.values.end(), t.values.row(j));
    }
    return t;
}

FeatureTable concat_tables(const FeatureTable& a, const FeatureTable& b) {
    if (a.user_ids != b.user_ids || a.labels != b.labels)
        throw std::runtime_error("concat_tables: user rows do not match");
    FeatureTable t;
    t.kind = a.kind + "+" + b.kind;
    t.user_ids = a.user_ids;
    t.labels = a.labels;
    t.values = Matrix(a.values.rows, a.values.cols + b.values.cols);
    for (size_t j = 0; j < t.values.rows; ++j) {
        std::copy(a.values.row(j), a.values.row(j) + a.values.cols, t.values.row(j));
        std::copy(b.values.row(j), b.values.row(j) + b.values.cols,
                  t.values.row(j) + a.values.cols);
    }
    return t;
}

void save_feature_csv(const FeatureTable& table, const LabelSet& labels,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "user_id,label";
    for (size_t i = 0; i < table.values.cols; ++i) out << ",f" << i;
    out << "\n";
    for (size_t j = 0; j < table.values.rows; ++j) {
        out << table.user_ids[j] << "," << labels.names[static_cast<size_t>(table.labels[j])];
        const double* row = table.values.row(j);
        for (size_t i = 0; i < table.values.cols; ++i) out << "," << fmt_g17(row[i]);
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

FeatureTable load_feature_csv(const std::string& path, const LabelSet& labels) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");

    size_t dim = 0;
    {
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cols;
        while (std::getline(ss, cell, ',')) cols.push_back(cell);
        if (cols.size() < 2 || cols[0] != "user_id" || cols[1] != "label")
            throw std::runtime_error(path + ": bad feature header");
        dim = cols.size() - 2;
    }

    FeatureTable t;
    std::vector<double> buf;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        if (!std::getline(ss, cell, ','))
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad row");
        t.user_ids.push_back(cell);
        if (!std::getline(ss, cell, ','))
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": missing label");
        int label = labels.index_of(cell);
        if (label < 0)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown label \"" +
                                     cell + "\"");
        t.labels.push_back(label);
        size_t count = 0;
        while (std::getline(ss, cell, ',')) {
            buf.push_back(std::stod(cell));
            ++count;
        }
        if (count != dim)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected " + std::to_string(dim) + " values, got " +
                                     std::to_string(count));
    }
    t.values = Matrix(t.user_ids.size(), dim);
    std::copy(buf.begin(), buf.end(), t.values.data.begin());
    return t;
}

}  // namespace cohort
