#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cohort/corpus.hpp"
#include "cohort/matrix.hpp"
#include "cohort/nlse.hpp"
#include "cohort/uservec.hpp"

namespace cohort {

struct NeighborRanking {
    std::string query_id;
    int query_class = -1;
    std::vector<std::pair<std::string, double>> entries;  // (user_id, cosine) descending
};

struct RocCurve {
    std::vector<std::pair<double, double>> points;  // (fpr, tpr)
    double auc = 0.0;
};

struct NeighborGrid {
    std::vector<std::string> query_ids;  // grouped by class
    std::vector<int> query_labels;
    std::vector<std::vector<int>> neighbor_labels;  // top-k classes per query
};

struct HomophilyReport {
    std::vector<RocCurve> per_class;         // pooled pairs, index = class
    std::vector<double> per_query_mean_auc;  // mean of per-query AUCs, index = class
    double macro_auc = 0.0;
};

struct FoldResult {
    int fold = 0;
    Matrix confusion;  // rows = true class, cols = predicted
    double macro_f1 = 0.0;
    double binary_f1 = 0.0;
    std::string chosen;
    size_t train_n = 0, val_n = 0, test_n = 0;
};

struct CvReport {
    std::string model_kind;  // lr | nlse
    std::vector<FoldResult> folds;
    double mean_macro_f1 = 0.0;
    double mean_binary_f1 = 0.0;
};

double cosine_similarity(const double* a, const double* b, size_t dim);

NeighborRanking rank_neighbors(const UserEmbeddingMatrix& users,
                               const std::vector<int>& labels, const std::string& query_id);

NeighborGrid neighbor_matrix(const UserEmbeddingMatrix& users, const std::vector<int>& labels,
                             size_t k);
void save_neighbor_csv(const NeighborGrid& grid, const LabelSet& label_set,
                       const std::string& path);

double auc(const std::vector<double>& scores, const std::vector<int>& positives);
RocCurve roc_curve(const std::vector<double>& scores, const std::vector<int>& positives);

RocCurve homophily_roc(const UserEmbeddingMatrix& users, const std::vector<int>& labels,
                       int cls);
HomophilyReport homophily_report(const UserEmbeddingMatrix& users,
                                 const std::vector<int>& labels, const LabelSet& label_set);
void save_homophily_csv(const HomophilyReport& report, const LabelSet& label_set,
                        const std::string& auc_path, const std::string& roc_path);

Matrix confusion_matrix(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                        size_t n_classes);
double macro_f1(const Matrix& confusion);
double binary_f1(const Matrix& confusion, const std::vector<size_t>& afflicted_classes);
std::vector<size_t> afflicted_classes(const LabelSet& labels);

std::vector<int> stratified_kfold(const std::vector<int>& labels, int k, uint64_t seed);
// stratified 80/20 split of `pool`; deterministic per (fold, seed)
std::pair<std::vector<size_t>, std::vector<size_t>>
stratified_split(const std::vector<int>& labels, const std::vector<size_t>& pool,
                 double train_fraction, int fold, uint64_t seed);

CvReport cross_validate_lr(const Matrix& X, const std::vector<int>& labels,
                           const LabelSet& label_set, const std::vector<double>& c_grid,
                           int k, uint64_t seed, double tol, std::ostream* log);

CvReport cross_validate_nlse(const Matrix& U, const std::vector<int>& labels,
                             const LabelSet& label_set, const std::vector<int>& s_dim_grid,
                             const std::vector<double>& alpha_grid,
                             const NlseTrainConfig& base, int k, uint64_t seed,
                             std::ostream* log);

void save_cv_csv(const CvReport& report, const std::string& path);

}  // namespace cohort
