#pragma once

#include <string>
#include <vector>

#include "cohort/corpus.hpp"
#include "cohort/matrix.hpp"

namespace cohort {

struct FeatureVector {
    std::vector<double> values;
    std::string kind;  // bow, boe, u2v, pvdm, pvdbow, concat(a+b)

    size_t dim() const { return values.size(); }
};

// one row per user, dataset order
struct FeatureTable {
    Matrix values;
    std::vector<std::string> user_ids;
    std::vector<int> labels;
    std::string kind;
};

FeatureVector bow_features(const UserHistory& history, const Vocabulary& vocab);
FeatureVector boe_features(const UserHistory& history, const Matrix& word_embs,
                           bool mean = false);
FeatureVector concat_features(const FeatureVector& a, const FeatureVector& b);

FeatureTable bow_table(const Dataset& dataset, const Vocabulary& vocab);
FeatureTable boe_table(const Dataset& dataset, const Matrix& word_embs, bool mean = false);
FeatureTable concat_tables(const FeatureTable& a, const FeatureTable& b);

void save_feature_csv(const FeatureTable& table, const LabelSet& labels,
                      const std::string& path);
FeatureTable load_feature_csv(const std::string& path, const LabelSet& labels);

}  // namespace cohort
