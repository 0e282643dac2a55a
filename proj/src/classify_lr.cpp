#include "cohort/classify_lr.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "cohort/embedding_io.hpp"

namespace cohort {

double lr_objective(const Matrix& X, const std::vector<int>& y, size_t n_classes, double c,
                    const std::vector<double>& params, std::vector<double>* grad) {
    size_t n = X.rows, dim = X.cols;
    if (params.size() != n_classes * dim + n_classes)
        throw std::runtime_error("lr_objective: parameter size mismatch");
    const double* W = params.data();
    const double* b = params.data() + n_classes * dim;
    if (grad) grad->assign(params.size(), 0.0);
    double* gW = grad ? grad->data() : nullptr;
    double* gb = grad ? grad->data() + n_classes * dim : nullptr;

    double inv_n = 1.0 / static_cast<double>(n);
    double loss = 0.0;
    std::vector<double> z(n_classes);
    for (size_t i = 0; i < n; ++i) {
        const double* x = X.row(i);
        for (size_t k = 0; k < n_classes; ++k) z[k] = dot(W + k * dim, x, dim) + b[k];
        double zmax = *std::max_element(z.begin(), z.end());
        double sum = 0.0;
        for (size_t k = 0; k < n_classes; ++k) sum += std::exp(z[k] - zmax);
        double lse = zmax + std::log(sum);
        loss += (lse - z[static_cast<size_t>(y[i])]) * inv_n;
        if (grad) {
            for (size_t k = 0; k < n_classes; ++k) {
                double p = std::exp(z[k] - lse);
                double coeff = (p - (static_cast<size_t>(y[i]) == k ? 1.0 : 0.0)) * inv_n;
                axpy(coeff, x, gW + k * dim, dim);
                gb[k] += coeff;
            }
        }
    }

    double reg = 0.0;
    for (size_t j = 0; j < n_classes * dim; ++j) {
        reg += W[j] * W[j];
        if (grad) gW[j] += W[j] / c;
    }
    return loss + 0.5 * reg / c;
}

namespace {

double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

// L-BFGS with Armijo backtracking; curvature-violating pairs are skipped
void lbfgs_minimize(const std::function<double(const std::vector<double>&,
                                               std::vector<double>*)>& objective,
                    std::vector<double>& params, double tol, int max_iters) {
    const size_t memory = 10;
    std::vector<double> g;
    double f = objective(params, &g);

    std::deque<std::vector<double>> s_hist, y_hist;
    std::deque<double> rho_hist;
    std::vector<double> dir(params.size()), p_new(params.size()), g_new;

    for (int iter = 0; iter < max_iters; ++iter) {
        if (inf_norm(g) < tol) return;

        dir.assign(g.begin(), g.end());
        for (double& v : dir) v = -v;
        std::vector<double> alpha(s_hist.size());
        for (size_t i = s_hist.size(); i-- > 0;) {
            alpha[i] = rho_hist[i] * dot(s_hist[i].data(), dir.data(), dir.size());
            axpy(-alpha[i], y_hist[i].data(), dir.data(), dir.size());
        }
        if (!s_hist.empty()) {
            const auto& s = s_hist.back();
            const auto& yv = y_hist.back();
            double gamma = dot(s.data(), yv.data(), s.size()) /
                           dot(yv.data(), yv.data(), yv.size());
            for (double& v : dir) v *= gamma;
        }
        for (size_t i = 0; i < s_hist.size(); ++i) {
            double beta = rho_hist[i] * dot(y_hist[i].data(), dir.data(), dir.size());
            axpy(alpha[i] - beta, s_hist[i].data(), dir.data(), dir.size());
        }

        double dg = dot(dir.data(), g.data(), g.size());
        if (dg >= 0.0) {
            dir.assign(g.begin(), g.end());
            for (double& v : dir) v = -v;
            dg = -dot(g.data(), g.data(), g.size());
        }

        double step = 1.0;
        if (iter == 0) step = std::min(1.0, 1.0 / std::max(1e-12, inf_norm(g)));
        double f_new = f;
        bool ok = false;
        for (int ls = 0; ls < 60; ++ls) {
            for (size_t j = 0; j < params.size(); ++j) p_new[j] = params[j] + step * dir[j];
            f_new = objective(p_new, &g_new);
            if (f_new <= f + 1e-4 * step * dg) {
                ok = true;
                break;
            }
            step *= 0.5;
        }
        if (!ok) return;

        std::vector<double> s(params.size()), yv(params.size());
        for (size_t j = 0; j < params.size(); ++j) {
            s[j] = p_new[j] - params[j];
            yv[j] = g_new[j] - g[j];
        }
        double sy = dot(s.data(), yv.data(), s.size());
        if (sy > 1e-12 * l2_norm(s.data(), s.size()) * l2_norm(yv.data(), yv.size())) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(yv));
            rho_hist.push_back(1.0 / sy);
            if (s_hist.size() > memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        params.swap(p_new);
        g.swap(g_new);
        f = f_new;
    }
}

}  // namespace

LrModel lr_train(const Matrix& X, const std::vector<int>& y, const LabelSet& labels,
                 double c, double tol, const std::vector<double>* init) {
    if (X.rows != y.size()) throw std::runtime_error("lr_train: X rows != labels");
    if (c <= 0.0) throw std::runtime_error("lr_train: c must be positive");
    size_t n_classes = labels.names.size();
    if (X.rows < n_classes) throw std::runtime_error("lr_train: fewer rows than classes");
    std::vector<int> seen;
    for (int label : y) {
        if (label < 0 || static_cast<size_t>(label) >= n_classes)
            throw std::runtime_error("lr_train: label out of range");
        if (std::find(seen.begin(), seen.end(), label) == seen.end()) seen.push_back(label);
    }
    if (seen.size() < 2) throw std::runtime_error("lr_train: single-class input");

    std::vector<double> params(n_classes * X.cols + n_classes, 0.0);
    if (init) {
        if (init->size() != params.size())
            throw std::runtime_error("lr_train: init size mismatch");
        params = *init;
    }
    auto objective = [&](const std::vector<double>& p, std::vector<double>* g) {
        return lr_objective(X, y, n_classes, c, p, g);
    };
    lbfgs_minimize(objective, params, tol, 1000);

    LrModel model;
    model.labels = labels;
    model.c = c;
    model.W = Matrix(n_classes, X.cols);
    std::copy(params.begin(), params.begin() + static_cast<ptrdiff_t>(n_classes * X.cols),
              model.W.data.begin());
    model.bias.assign(params.begin() + static_cast<ptrdiff_t>(n_classes * X.cols), params.end());
    return model;
}

std::pair<int, std::vector<double>> lr_predict(const LrModel& model, const double* x) {
    size_t n_classes = model.n_classes();
    std::vector<double> z(n_classes);
    for (size_t k = 0; k < n_classes; ++k)
        z[k] = dot(model.W.row(k), x, model.W.cols) + model.bias[k];
    double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double& v : z) {
        v = std::exp(v - zmax);
        sum += v;
    }
    for (double& v : z) v /= sum;
    int best = 0;
    for (size_t k = 1; k < n_classes; ++k)
        if (z[k] > z[static_cast<size_t>(best)]) best = static_cast<int>(k);
    return {best, std::move(z)};
}

std::vector<int> lr_predict_all(const LrModel& model, const Matrix& X) {
    std::vector<int> out(X.rows);
    for (size_t i = 0; i < X.rows; ++i) out[i] = lr_predict(model, X.row(i)).first;
    return out;
}

void save_lr_csv(const LrModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "c," << fmt_g17(model.c) << "\n";
    out << "label,bias";
    for (size_t j = 0; j < model.W.cols; ++j) out << ",w" << j;
    out << "\n";
    for (size_t k = 0; k < model.n_classes(); ++k) {
        out << model.labels.names[k] << "," << fmt_g17(model.bias[k]);
        for (size_t j = 0; j < model.W.cols; ++j) out << "," << fmt_g17(model.W(k, j));
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

LrModel load_lr_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("c,", 0) != 0)
        throw std::runtime_error(path + ": missing c line");
    LrModel model;
    model.c = std::stod(line.substr(2));
    if (!std::getline(in, line) || line.rfind("label,bias", 0) != 0)
        throw std::runtime_error(path + ": bad model header");
    size_t dim = 0;
    for (char ch : line)
        if (ch == ',') ++dim;
    dim -= 1;  // label and bias columns

    std::vector<double> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');
        model.labels.names.push_back(cell);
        std::getline(ss, cell, ',');
        model.bias.push_back(std::stod(cell));
        size_t count = 0;
        while (std::getline(ss, cell, ',')) {
            rows.push_back(std::stod(cell));
            ++count;
        }
        if (count != dim) throw std::runtime_error(path + ": ragged model row");
    }
    model.W = Matrix(model.labels.names.size(), dim);
    std::copy(rows.begin(), rows.end(), model.W.data.begin());
    return model;
}

}  // namespace cohort
