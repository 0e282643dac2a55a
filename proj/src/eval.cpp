#include "cohort/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include "cohort/classify_lr.hpp"
#include "cohort/embedding_io.hpp"
#include "cohort/rng.hpp"

namespace cohort {

double cosine_similarity(const double* a, const double* b, size_t dim) {
    double na = l2_norm(a, dim), nb = l2_norm(b, dim);
    if (na == 0.0 || nb == 0.0)
        throw std::runtime_error("cosine_similarity: zero vector");
    return dot(a, b, dim) / (na * nb);
}

NeighborRanking rank_neighbors(const UserEmbeddingMatrix& users,
                               const std::vector<int>& labels, const std::string& query_id) {
    int q = users.index_of(query_id);
    if (q < 0) throw std::runtime_error("rank_neighbors: unknown user \"" + query_id + "\"");
    NeighborRanking r;
    r.query_id = query_id;
    r.query_class = labels.empty() ? -1 : labels[static_cast<size_t>(q)];
    const double* qv = users.vectors.row(static_cast<size_t>(q));
    for (size_t j = 0; j < users.user_count(); ++j) {
        if (static_cast<int>(j) == q) continue;
        r.entries.emplace_back(users.user_ids[j],
                               cosine_similarity(qv, users.vectors.row(j), users.dim()));
    }
    std::sort(r.entries.begin(), r.entries.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return r;
}

NeighborGrid neighbor_matrix(const UserEmbeddingMatrix& users, const std::vector<int>& labels,
                             size_t k) {
    if (k + 1 > users.user_count())
        throw std::runtime_error("neighbor_matrix: k must be smaller than the user count");
    std::unordered_map<std::string, size_t> index;
    for (size_t j = 0; j < users.user_count(); ++j) index[users.user_ids[j]] = j;

    int n_classes = 0;
    for (int label : labels) n_classes = std::max(n_classes, label + 1);

    NeighborGrid grid;
    for (int cls = 0; cls < n_classes; ++cls) {
        for (size_t j = 0; j < users.user_count(); ++j) {
            if (labels[j] != cls) continue;
            NeighborRanking r = rank_neighbors(users, labels, users.user_ids[j]);
            grid.query_ids.push_back(users.user_ids[j]);
            grid.query_labels.push_back(cls);
            std::vector<int> row;
            row.reserve(k);
            for (size_t t = 0; t < k; ++t)
                row.push_back(labels[index.at(r.entries[t].first)]);
            grid.neighbor_labels.push_back(std::move(row));
        }
    }
    return grid;
}

void save_neighbor_csv(const NeighborGrid& grid, const LabelSet& label_set,
                       const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    size_t k = grid.neighbor_labels.empty() ? 0 : grid.neighbor_labels[0].size();
    out << "query_id,query_class";
    for (size_t t = 0; t < k; ++t) out << ",n" << t;
    out << "\n";
    for (size_t r = 0; r < grid.query_ids.size(); ++r) {
        out << grid.query_ids[r] << ","
            << label_set.names[static_cast<size_t>(grid.query_labels[r])];
        for (int cls : grid.neighbor_labels[r])
            out << "," << label_set.names[static_cast<size_t>(cls)];
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

double auc(const std::vector<double>& scores, const std::vector<int>& positives) {
    if (scores.size() != positives.size())
        throw std::runtime_error("auc: scores and positives differ in length");
    size_t n = scores.size();
    size_t p_count = 0;
    for (int p : positives) p_count += (p != 0);
    size_t n_count = n - p_count;
    if (p_count == 0 || n_count == 0)
        throw std::runtime_error("auc: need at least one positive and one negative");

    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](size_t a, size_t b) { return scores[a] < scores[b]; });

    // rank-sum with midranks for ties: numerator is an exact multiple of 1/2
    double rank_sum = 0.0;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
        double midrank = static_cast<double>(i + 1 + j) / 2.0;
        for (size_t t = i; t < j; ++t)
            if (positives[idx[t]]) rank_sum += midrank;
        i = j;
    }
    double numer = rank_sum - static_cast<double>(p_count) *
                                  static_cast<double>(p_count + 1) / 2.0;
    return numer / (static_cast<double>(p_count) * static_cast<double>(n_count));
}

RocCurve roc_curve(const std::vector<double>& scores, const std::vector<int>& positives) {
    RocCurve curve;
    curve.auc = auc(scores, positives);
    size_t n = scores.size();
    size_t p_count = 0;
    for (int p : positives) p_count += (p != 0);
    size_t n_count = n - p_count;

    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](size_t a, size_t b) { return scores[a] > scores[b]; });

    curve.points.emplace_back(0.0, 0.0);
    size_t tp = 0, fp = 0, i = 0;
    while (i < n) {
        size_t j = i;
        while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
        for (size_t t = i; t < j; ++t) {
            if (positives[idx[t]]) ++tp;
            else ++fp;
        }
        curve.points.emplace_back(static_cast<double>(fp) / static_cast<double>(n_count),
                                  static_cast<double>(tp) / static_cast<double>(p_count));
        i = j;
    }
    return curve;
}

namespace {

void pooled_pairs(const UserEmbeddingMatrix& users, const std::vector<int>& labels, int cls,
                  std::vector<double>& scores, std::vector<int>& positives) {
    for (size_t q = 0; q < users.user_count(); ++q) {
        if (labels[q] != cls) continue;
        const double* qv = users.vectors.row(q);
        for (size_t c = 0; c < users.user_count(); ++c) {
            if (c == q) continue;
            scores.push_back(cosine_similarity(qv, users.vectors.row(c), users.dim()));
            positives.push_back(labels[c] == cls ? 1 : 0);
        }
    }
}

}  // namespace

RocCurve homophily_roc(const UserEmbeddingMatrix& users, const std::vector<int>& labels,
                       int cls) {
    size_t members = 0;
    for (int label : labels) members += (label == cls);
    if (members < 2)
        throw std::runtime_error("homophily_roc: class needs at least 2 members");
    if (members == labels.size())
        throw std::runtime_error("homophily_roc: no users outside the class");
    std::vector<double> scores;
    std::vector<int> positives;
    pooled_pairs(users, labels, cls, scores, positives);
    return roc_curve(scores, positives);
}

HomophilyReport homophily_report(const UserEmbeddingMatrix& users,
                                 const std::vector<int>& labels, const LabelSet& label_set) {
    HomophilyReport report;
    size_t n_classes = label_set.names.size();
    report.per_class.resize(n_classes);
    report.per_query_mean_auc.assign(n_classes, 0.0);
    double macro = 0.0;
    for (size_t cls = 0; cls < n_classes; ++cls) {
        report.per_class[cls] = homophily_roc(users, labels, static_cast<int>(cls));
        macro += report.per_class[cls].auc;

        double mean = 0.0;
        size_t queries = 0;
        for (size_t q = 0; q < users.user_count(); ++q) {
            if (labels[q] != static_cast<int>(cls)) continue;
            std::vector<double> scores;
            std::vector<int> positives;
            const double* qv = users.vectors.row(q);
            for (size_t c = 0; c < users.user_count(); ++c) {
                if (c == q) continue;
                scores.push_back(cosine_similarity(qv, users.vectors.row(c), users.dim()));
                positives.push_back(labels[c] == static_cast<int>(cls) ? 1 : 0);
            }
            mean += auc(scores, positives);
            ++queries;
        }
        report.per_query_mean_auc[cls] = mean / static_cast<double>(queries);
    }
    report.macro_auc = macro / static_cast<double>(n_classes);
    return report;
}

void save_homophily_csv(const HomophilyReport& report, const LabelSet& label_set,
                        const std::string& auc_path, const std::string& roc_path) {
    {
        std::ofstream out(auc_path);
        if (!out) throw std::runtime_error("cannot write " + auc_path);
        out << "class,pooled_auc,per_query_mean_auc\n";
        for (size_t cls = 0; cls < report.per_class.size(); ++cls)
            out << label_set.names[cls] << "," << fmt_g17(report.per_class[cls].auc) << ","
                << fmt_g17(report.per_query_mean_auc[cls]) << "\n";
        out << "macro," << fmt_g17(report.macro_auc) << ",\n";
        if (!out) throw std::runtime_error("write failed: " + auc_path);
    }
    {
        std::ofstream out(roc_path);
        if (!out) throw std::runtime_error("cannot write " + roc_path);
        out << "class,fpr,tpr\n";
        for (size_t cls = 0; cls < report.per_class.size(); ++cls)
            for (const auto& [fpr, tpr] : report.per_class[cls].points)
                out << label_set.names[cls] << "," << fmt_g17(fpr) << "," << fmt_g17(tpr)
                    << "\n";
        if (!out) throw std::runtime_error("write failed: " + roc_path);
    }
}

Matrix confusion_matrix(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                        size_t n_classes) {
    if (y_true.size() != y_pred.size())
        throw std::runtime_error("confusion_matrix: length mismatch");
    Matrix c(n_classes, n_classes);
    for (size_t i = 0; i < y_true.size(); ++i)
        c(static_cast<size_t>(y_true[i]), static_cast<size_t>(y_pred[i])) += 1.0;
    return c;
}

namespace {

double class_f1(const Matrix& c, size_t k, bool warn) {
    double tp = c(k, k), row = 0.0, col = 0.0;
    for (size_t j = 0; j < c.cols; ++j) row += c(k, j);
    for (size_t i = 0; i < c.rows; ++i) col += c(i, k);
    if (row == 0.0 && col == 0.0) {
        if (warn)
            std::cerr << "warning: class " << k
                      << " never true and never predicted; f1 set to 0\n";
        return 0.0;
    }
    double prec = col > 0.0 ? tp / col : 0.0;
    double rec = row > 0.0 ? tp / row : 0.0;
    if (prec + rec == 0.0) return 0.0;
    return 2.0 * prec * rec / (prec + rec);
}

}  // namespace

double macro_f1(const Matrix& confusion) {
    if (confusion.rows != confusion.cols)
        throw std::runtime_error("macro_f1: confusion matrix must be square");
    double sum = 0.0;
    for (size_t k = 0; k < confusion.rows; ++k) sum += class_f1(confusion, k, true);
    return sum / static_cast<double>(confusion.rows);
}

double binary_f1(const Matrix& confusion, const std::vector<size_t>& afflicted) {
    if (confusion.rows != confusion.cols)
        throw std::runtime_error("binary_f1: confusion matrix must be square");
    if (afflicted.empty()) throw std::runtime_error("binary_f1: empty afflicted set");
    double sum = 0.0;
    for (size_t k : afflicted) {
        if (k >= confusion.rows) throw std::runtime_error("binary_f1: class out of range");
        sum += class_f1(confusion, k, true);
    }
    return sum / static_cast<double>(afflicted.size());
}

std::vector<size_t> afflicted_classes(const LabelSet& labels) {
    std::vector<size_t> out;
    for (size_t k = 0; k < labels.names.size(); ++k)
        if (labels.names[k] == "depression" || labels.names[k] == "ptsd") out.push_back(k);
    if (!out.empty()) return out;
    for (size_t k = 0; k < labels.names.size(); ++k)
        if (labels.names[k] != "control") out.push_back(k);
    if (out.empty())
        for (size_t k = 0; k < labels.names.size(); ++k) out.push_back(k);
    return out;
}

std::vector<int> stratified_kfold(const std::vector<int>& labels, int k, uint64_t seed) {
    if (k < 2) throw std::runtime_error("stratified_kfold: k must be at least 2");
    int n_classes = 0;
    for (int label : labels) n_classes = std::max(n_classes, label + 1);
    std::vector<int> folds(labels.size(), -1);
    for (int cls = 0; cls < n_classes; ++cls) {
        std::vector<size_t> members;
        for (size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == cls) members.push_back(i);
        if (members.size() < static_cast<size_t>(k))
            throw std::runtime_error("stratified_kfold: class " + std::to_string(cls) +
                                     " has fewer than k members");
        Rng rng(derive_seed(seed, "cv/folds/class" + std::to_string(cls)));
        rng.shuffle(members);
        for (size_t i = 0; i < members.size(); ++i)
            folds[members[i]] = static_cast<int>(i % static_cast<size_t>(k));
    }
    return folds;
}

std::pair<std::vector<size_t>, std::vector<size_t>>
stratified_split(const std::vector<int>& labels, const std::vector<size_t>& pool,
                 double train_fraction, int fold, uint64_t seed) {
    if (train_fraction <= 0.0 || train_fraction >= 1.0)
        throw std::runtime_error("stratified_split: fraction must be in (0,1)");
    int n_classes = 0;
    for (size_t i : pool) n_classes = std::max(n_classes, labels[i] + 1);
    std::vector<size_t> train, val;
    for (int cls = 0; cls < n_classes; ++cls) {
        std::vector<size_t> members;
        for (size_t i : pool)
            if (labels[i] == cls) members.push_back(i);
        if (members.empty()) continue;
        Rng rng(derive_seed(seed, "cv/inner/" + std::to_string(fold) + "/class" +
                                      std::to_string(cls)));
        rng.shuffle(members);
        size_t n = members.size();
        size_t n_train = static_cast<size_t>(
            std::llround(train_fraction * static_cast<double>(n)));
        if (n_train < 1) n_train = 1;
        if (n_train > n - 1 && n > 1) n_train = n - 1;
        if (n == 1) n_train = 1;
        train.insert(train.end(), members.begin(),
                     members.begin() + static_cast<ptrdiff_t>(n_train));
        val.insert(val.end(), members.begin() + static_cast<ptrdiff_t>(n_train),
                   members.end());
    }
    std::sort(train.begin(), train.end());
    std::sort(val.begin(), val.end());
    return {std::move(train), std::move(val)};
}

namespace {

std::string fmt_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

void log_inner_sizes(std::ostream* log, int fold, const std::vector<int>& labels,
                     const LabelSet& label_set, const std::vector<size_t>& train,
                     const std::vector<size_t>& val) {
    if (!log) return;
    for (size_t cls = 0; cls < label_set.names.size(); ++cls) {
        size_t t = 0, v = 0;
        for (size_t i : train) t += (labels[i] == static_cast<int>(cls));
        for (size_t i : val) v += (labels[i] == static_cast<int>(cls));
        *log << "fold=" << fold << " inner class=" << label_set.names[cls] << " train=" << t
             << " val=" << v << "\n";
    }
}

struct FoldIndices {
    std::vector<size_t> test, train, val;
};

std::vector<FoldIndices> make_folds(const std::vector<int>& labels, int k, uint64_t seed) {
    std::vector<int> assignment = stratified_kfold(labels, k, seed);
    std::vector<FoldIndices> folds(static_cast<size_t>(k));
    for (int f = 0; f < k; ++f) {
        std::vector<size_t> pool;
        for (size_t i = 0; i < labels.size(); ++i) {
            if (assignment[i] == f) folds[static_cast<size_t>(f)].test.push_back(i);
            else pool.push_back(i);
        }
        auto [train, val] = stratified_split(labels, pool, 0.8, f, seed);
        folds[static_cast<size_t>(f)].train = std::move(train);
        folds[static_cast<size_t>(f)].val = std::move(val);
    }
    return folds;
}

void finish_report(CvReport& report) {
    double macro = 0.0, binary = 0.0;
    for (const auto& f : report.folds) {
        macro += f.macro_f1;
        binary += f.binary_f1;
    }
    report.mean_macro_f1 = macro / static_cast<double>(report.folds.size());
    report.mean_binary_f1 = binary / static_cast<double>(report.folds.size());
}

}  // namespace

CvReport cross_validate_lr(const Matrix& X, const std::vector<int>& labels,
                           const LabelSet& label_set, const std::vector<double>& c_grid,
                           int k, uint64_t seed, double tol, std::ostream* log) {
    if (c_grid.empty()) throw std::runtime_error("cross_validate_lr: empty grid");
    if (log) {
        *log << "cv model=lr k=" << k << " seed=" << seed << " n=" << X.rows << " grid_c=";
        for (size_t i = 0; i < c_grid.size(); ++i) *log << (i ? "," : "") << fmt_num(c_grid[i]);
        *log << "\n";
    }
    std::vector<size_t> afflicted = afflicted_classes(label_set);
    CvReport report;
    report.model_kind = "lr";
    auto folds = make_folds(labels, k, seed);
    for (int f = 0; f < k; ++f) {
        const auto& fi = folds[static_cast<size_t>(f)];
        if (log)
            *log << "fold=" << f << " train_n=" << fi.train.size() << " val_n=" << fi.val.size()
                 << " test_n=" << fi.test.size() << "\n";
        log_inner_sizes(log, f, labels, label_set, fi.train, fi.val);

        Matrix x_train(fi.train.size(), X.cols);
        std::vector<int> y_train;
        for (size_t r = 0; r < fi.train.size(); ++r) {
            std::copy(X.row(fi.train[r]), X.row(fi.train[r]) + X.cols, x_train.row(r));
            y_train.push_back(labels[fi.train[r]]);
        }
        std::vector<int> y_val;
        for (size_t i : fi.val) y_val.push_back(labels[i]);

        LrModel best;
        double best_f1 = -1.0;
        double best_c = c_grid.front();
        for (double c : c_grid) {
            LrModel model = lr_train(x_train, y_train, label_set, c, tol);
            std::vector<int> pred;
            for (size_t i : fi.val) pred.push_back(lr_predict(model, X.row(i)).first);
            double f1 = macro_f1(confusion_matrix(y_val, pred, label_set.names.size()));
            if (log)
                *log << "fold=" << f << " grid c=" << fmt_num(c)
                     << " val_macro_f1=" << fmt_g17(f1) << "\n";
            if (f1 > best_f1) {
                best_f1 = f1;
                best = model;
                best_c = c;
            }
        }

        FoldResult result;
        result.fold = f;
        result.chosen = "c=" + fmt_num(best_c);
        result.train_n = fi.train.size();
        result.val_n = fi.val.size();
        result.test_n = fi.test.size();
        std::vector<int> y_test, pred;
        for (size_t i : fi.test) {
            y_test.push_back(labels[i]);
            pred.push_back(lr_predict(best, X.row(i)).first);
        }
        result.confusion = confusion_matrix(y_test, pred, label_set.names.size());
        result.macro_f1 = macro_f1(result.confusion);
        result.binary_f1 = binary_f1(result.confusion, afflicted);
        if (log)
            *log << "fold=" << f << " chosen " << result.chosen
                 << " val_macro_f1=" << fmt_g17(best_f1) << "\n"
                 << "fold=" << f << " test macro_f1=" << fmt_g17(result.macro_f1)
                 << " binary_f1=" << fmt_g17(result.binary_f1) << "\n";
        report.folds.push_back(std::move(result));
    }
    finish_report(report);
    return report;
}

CvReport cross_validate_nlse(const Matrix& U, const std::vector<int>& labels,
                             const LabelSet& label_set, const std::vector<int>& s_dim_grid,
                             const std::vector<double>& alpha_grid,
                             const NlseTrainConfig& base, int k, uint64_t seed,
                             std::ostream* log) {
    if (s_dim_grid.empty() || alpha_grid.empty())
        throw std::runtime_error("cross_validate_nlse: empty grid");
    if (log) {
        *log << "cv model=nlse k=" << k << " seed=" << seed << " n=" << U.rows
             << " grid_s_dim=";
        for (size_t i = 0; i < s_dim_grid.size(); ++i)
            *log << (i ? "," : "") << s_dim_grid[i];
        *log << " grid_alpha=";
        for (size_t i = 0; i < alpha_grid.size(); ++i)
            *log << (i ? "," : "") << fmt_num(alpha_grid[i]);
        *log << "\n";
    }
    std::vector<size_t> afflicted = afflicted_classes(label_set);
    CvReport report;
    report.model_kind = "nlse";
    auto folds = make_folds(labels, k, seed);
    for (int f = 0; f < k; ++f) {
        const auto& fi = folds[static_cast<size_t>(f)];
        if (log)
            *log << "fold=" << f << " train_n=" << fi.train.size() << " val_n=" << fi.val.size()
                 << " test_n=" << fi.test.size() << "\n";
        log_inner_sizes(log, f, labels, label_set, fi.train, fi.val);

        std::vector<int> y_val;
        for (size_t i : fi.val) y_val.push_back(labels[i]);

        NlseModel best;
        double best_f1 = -1.0;
        std::string best_tag;
        for (int s_dim : s_dim_grid) {
            for (double alpha : alpha_grid) {
                NlseTrainConfig cfg = base;
                cfg.s_dim = s_dim;
                cfg.learning_rate = alpha;
                cfg.seed = derive_seed(seed, "cv/nlse/fold" + std::to_string(f));
                NlseModel model = nlse_train(U, labels, label_set, fi.train, fi.val, cfg);
                std::vector<int> pred;
                for (size_t i : fi.val) pred.push_back(nlse_predict(model, U.row(i)));
                double f1 = macro_f1(confusion_matrix(y_val, pred, label_set.names.size()));
                if (log)
                    *log << "fold=" << f << " grid s_dim=" << s_dim
                         << " alpha=" << fmt_num(alpha) << " val_macro_f1=" << fmt_g17(f1)
                         << "\n";
                if (f1 > best_f1) {
                    best_f1 = f1;
                    best = std::move(model);
                    best_tag = "s_dim=" + std::to_string(s_dim) + ";alpha=" + fmt_num(alpha);
                }
            }
        }

        FoldResult result;
        result.fold = f;
        result.chosen = best_tag;
        result.train_n = fi.train.size();
        result.val_n = fi.val.size();
        result.test_n = fi.test.size();
        std::vector<int> y_test, pred;
        for (size_t i : fi.test) {
            y_test.push_back(labels[i]);
            pred.push_back(nlse_predict(best, U.row(i)));
        }
        result.confusion = confusion_matrix(y_test, pred, label_set.names.size());
        result.macro_f1 = macro_f1(result.confusion);
        result.binary_f1 = binary_f1(result.confusion, afflicted);
        if (log)
            *log << "fold=" << f << " chosen " << result.chosen
                 << " val_macro_f1=" << fmt_g17(best_f1) << "\n"
                 << "fold=" << f << " test macro_f1=" << fmt_g17(result.macro_f1)
                 << " binary_f1=" << fmt_g17(result.binary_f1) << "\n";
        report.folds.push_back(std::move(result));
    }
    finish_report(report);
    return report;
}

void save_cv_csv(const CvReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "model,fold,chosen,train_n,val_n,test_n,macro_f1,binary_f1\n";
    for (const auto& f : report.folds)
        out << report.model_kind << "," << f.fold << "," << f.chosen << "," << f.train_n << ","
            << f.val_n << "," << f.test_n << "," << fmt_g17(f.macro_f1) << ","
            << fmt_g17(f.binary_f1) << "\n";
    out << report.model_kind << ",mean,,,,," << fmt_g17(report.mean_macro_f1) << ","
        << fmt_g17(report.mean_binary_f1) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace cohort
