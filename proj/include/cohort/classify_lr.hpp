#pragma once

#include <string>
#include <vector>

#include "cohort/corpus.hpp"
#include "cohort/matrix.hpp"

namespace cohort {

struct LrModel {
    Matrix W;                  // |Y| x dim
    std::vector<double> bias;  // |Y|
    double c = 1.0;
    LabelSet labels;

    size_t dim() const { return W.cols; }
    size_t n_classes() const { return W.rows; }
};

// mean softmax cross-entropy + (1/c) * 0.5 * ||W||^2, bias unregularized;
// params = [W row-major, bias]; grad (same layout) overwritten when non-null
double lr_objective(const Matrix& X, const std::vector<int>& y, size_t n_classes, double c,
                    const std::vector<double>& params, std::vector<double>* grad);

LrModel lr_train(const Matrix& X, const std::vector<int>& y, const LabelSet& labels,
                 double c, double tol = 1e-6, const std::vector<double>* init = nullptr);

std::pair<int, std::vector<double>> lr_predict(const LrModel& model, const double* x);
std::vector<int> lr_predict_all(const LrModel& model, const Matrix& X);

void save_lr_csv(const LrModel& model, const std::string& path);
LrModel load_lr_csv(const std::string& path);

}  // namespace cohort
