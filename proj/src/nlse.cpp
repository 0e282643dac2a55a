#include "cohort/nlse.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cohort/embedding_io.hpp"
#include "cohort/eval.hpp"
#include "cohort/rng.hpp"

namespace cohort {

NlseForward nlse_forward(const NlseModel& model, const double* u) {
    NlseForward f;
    size_t s = model.s_dim(), d = model.input_dim(), n_y = model.n_classes();
    f.g.resize(s);
    for (size_t i = 0; i < s; ++i) f.g[i] = sigmoid(dot(model.S.row(i), u, d));
    f.probs.resize(n_y);
    for (size_t k = 0; k < n_y; ++k)
        f.probs[k] = dot(model.beta.row(k), f.g.data(), s) + model.bias[k];
    double zmax = *std::max_element(f.probs.begin(), f.probs.end());
    double sum = 0.0;
    for (double& v : f.probs) {
        v = std::exp(v - zmax);
        sum += v;
    }
    for (double& v : f.probs) v /= sum;
    return f;
}

double nlse_loss(const NlseModel& model, const Matrix& U,
                 const std::vector<size_t>& batch_rows, const std::vector<int>& labels,
                 NlseGradients* grads) {
    if (batch_rows.empty()) throw std::runtime_error("nlse_loss: empty batch");
    size_t s = model.s_dim(), d = model.input_dim(), n_y = model.n_classes();
    if (grads) {
        grads->S = Matrix(s, d);
        grads->beta = Matrix(n_y, s);
        grads->bias.assign(n_y, 0.0);
    }
    double inv_n = 1.0 / static_cast<double>(batch_rows.size());
    double loss = 0.0;
    std::vector<double> z(n_y), dg(s);
    for (size_t row : batch_rows) {
        const double* u = U.row(row);
        NlseForward f = nlse_forward(model, u);
        int y = labels[row];
        loss -= std::log(std::max(f.probs[static_cast<size_t>(y)], 1e-300)) * inv_n;
        if (!grads) continue;
        for (size_t k = 0; k < n_y; ++k)
            z[k] = (f.probs[k] - (static_cast<size_t>(y) == k ? 1.0 : 0.0)) * inv_n;
        std::fill(dg.begin(), dg.end(), 0.0);
        for (size_t k = 0; k < n_y; ++k) {
            axpy(z[k], f.g.data(), grads->beta.row(k), s);
            grads->bias[k] += z[k];
            axpy(z[k], model.beta.row(k), dg.data(), s);
        }
        for (size_t i = 0; i < s; ++i) {
            double da = dg[i] * f.g[i] * (1.0 - f.g[i]);
            axpy(da, u, grads->S.row(i), d);
        }
    }
    return loss;
}

NlseModel nlse_init(size_t d, size_t s_dim, const LabelSet& labels, uint64_t seed) {
    if (s_dim >= d) throw std::runtime_error("nlse_init: s_dim must be less than d");
    NlseModel model;
    model.labels = labels;
    model.S = Matrix(s_dim, d);
    model.beta = Matrix(labels.names.size(), s_dim);
    model.bias.assign(labels.names.size(), 0.0);
    Rng rng(derive_seed(seed, "nlse/init"));
    double bound = std::sqrt(6.0 / static_cast<double>(s_dim + d));
    for (double& v : model.S.data) v = rng.next_uniform(-bound, bound);
    return model;
}

int nlse_predict(const NlseModel& model, const double* u) {
    NlseForward f = nlse_forward(model, u);
    int best = 0;
    for (size_t k = 1; k < f.probs.size(); ++k)
        if (f.probs[k] > f.probs[static_cast<size_t>(best)]) best = static_cast<int>(k);
    return best;
}

NlseModel nlse_train(const Matrix& U, const std::vector<int>& labels,
                     const LabelSet& label_set, const std::vector<size_t>& train_idx,
                     const std::vector<size_t>& val_idx, const NlseTrainConfig& config) {
    if (labels.size() != U.rows) throw std::runtime_error("nlse_train: labels do not match U");
    for (size_t i : train_idx)
        for (size_t j : val_idx)
            if (i == j) throw std::runtime_error("nlse_train: train/val indices overlap");
    size_t n_y = label_set.names.size();
    std::vector<int> present(n_y, 0);
    for (size_t i : train_idx) present[static_cast<size_t>(labels[i])] = 1;
    for (size_t k = 0; k < n_y; ++k)
        if (!present[k])
            throw std::runtime_error("nlse_train: class \"" + label_set.names[k] +
                                     "\" missing from training fold");
    if (val_idx.empty()) throw std::runtime_error("nlse_train: empty validation set");

    NlseModel model = nlse_init(U.cols, static_cast<size_t>(config.s_dim), label_set, config.seed);
    if (config.max_epochs <= 0) return model;

    Rng shuffle_rng(derive_seed(config.seed, "nlse/shuffle"));
    std::vector<size_t> order(train_idx);
    std::vector<int> val_true, val_pred;
    for (size_t i : val_idx) val_true.push_back(labels[i]);

    NlseModel best = model;
    double best_f1 = -1.0;
    int stale = 0;
    size_t batch = static_cast<size_t>(std::max(1, config.batch_size));
    NlseGradients grads;
    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (size_t start = 0; start < order.size(); start += batch) {
            size_t stop = std::min(order.size(), start + batch);
            std::vector<size_t> rows(order.begin() + static_cast<ptrdiff_t>(start),
                                     order.begin() + static_cast<ptrdiff_t>(stop));
            nlse_loss(model, U, rows, labels, &grads);
            axpy(-config.learning_rate, grads.S.data.data(), model.S.data.data(),
                 grads.S.data.size());
            axpy(-config.learning_rate, grads.beta.data.data(), model.beta.data.data(),
                 grads.beta.data.size());
            axpy(-config.learning_rate, grads.bias.data(), model.bias.data(), grads.bias.size());
        }
        val_pred.clear();
        for (size_t i : val_idx) val_pred.push_back(nlse_predict(model, U.row(i)));
        double f1 = macro_f1(confusion_matrix(val_true, val_pred, n_y));
        // ties keep the latest epoch (extra optimization at equal validation
        // score); the patience counter still requires strict improvement
        if (f1 >= best_f1) {
            if (f1 > best_f1) stale = 0; else ++stale;
            best_f1 = f1;
            best = model;
        } else {
            ++stale;
        }
        if (stale >= config.patience) break;
    }
    return best;
}

Matrix subspace_features(const NlseModel& model, const UserEmbeddingMatrix& users,
                         const std::vector<std::string>& user_ids) {
    Matrix out(user_ids.size(), model.s_dim());
    for (size_t r = 0; r < user_ids.size(); ++r) {
        int j = users.index_of(user_ids[r]);
        if (j < 0)
            throw std::runtime_error("subspace_features: unknown user \"" + user_ids[r] + "\"");
        NlseForward f = nlse_forward(model, users.vectors.row(static_cast<size_t>(j)));
        std::copy(f.g.begin(), f.g.end(), out.row(r));
    }
    return out;
}

std::vector<double> class_prototype(const NlseModel& model, const UserEmbeddingMatrix& users,
                                    const std::vector<int>& labels, int cls) {
    if (labels.size() != users.user_count())
        throw std::runtime_error("class_prototype: labels do not match users");
    std::vector<double> proto(model.s_dim(), 0.0);
    size_t count = 0;
    for (size_t j = 0; j < users.user_count(); ++j) {
        if (labels[j] != cls) continue;
        NlseForward f = nlse_forward(model, users.vectors.row(j));
        axpy(1.0, f.g.data(), proto.data(), proto.size());
        ++count;
    }
    if (count == 0) throw std::runtime_error("class_prototype: empty class");
    for (double& v : proto) v /= static_cast<double>(count);
    return proto;
}

void save_nlse_csv(const NlseModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "s_dim," << model.s_dim() << ",d," << model.input_dim() << ",labels";
    for (const auto& name : model.labels.names) out << ";" << name;
    out << "\n";
    auto dump = [&](const char* tag, const Matrix& m) {
        out << tag << "\n";
        for (size_t i = 0; i < m.rows; ++i) {
            const double* row = m.row(i);
            for (size_t j = 0; j < m.cols; ++j) out << (j ? "," : "") << fmt_g17(row[j]);
            out << "\n";
        }
    };
    dump("S", model.S);
    dump("beta", model.beta);
    out << "bias\n";
    for (size_t k = 0; k < model.bias.size(); ++k)
        out << (k ? "," : "") << fmt_g17(model.bias[k]);
    out << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

std::vector<double> parse_csv_row(const std::string& line) {
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    return vals;
}

}  // namespace

NlseModel load_nlse_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty model file");

    NlseModel model;
    size_t s_dim = 0, d = 0;
    {
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');
        if (cell != "s_dim") throw std::runtime_error(path + ": bad model header");
        std::getline(ss, cell, ',');
        s_dim = static_cast<size_t>(std::stoull(cell));
        std::getline(ss, cell, ',');
        if (cell != "d") throw std::runtime_error(path + ": bad model header");
        std::getline(ss, cell, ',');
        d = static_cast<size_t>(std::stoull(cell));
        std::getline(ss, cell, ',');
        if (cell.rfind("labels", 0) != 0) throw std::runtime_error(path + ": bad model header");
        std::stringstream ls(cell.substr(7));
        std::string name;
        while (std::getline(ls, name, ';'))
            if (!name.empty()) model.labels.names.push_back(name);
    }
    if (model.labels.names.empty()) throw std::runtime_error(path + ": no labels in header");

    auto expect = [&](const char* tag) {
        if (!std::getline(in, line) || line != tag)
            throw std::runtime_error(path + ": expected \"" + tag + "\" block");
    };
    expect("S");
    model.S = Matrix(s_dim, d);
    for (size_t i = 0; i < s_dim; ++i) {
        if (!std::getline(in, line)) throw std::runtime_error(path + ": truncated S block");
        auto vals = parse_csv_row(line);
        if (vals.size() != d) throw std::runtime_error(path + ": ragged S row");
        std::copy(vals.begin(), vals.end(), model.S.row(i));
    }
    expect("beta");
    model.beta = Matrix(model.labels.names.size(), s_dim);
    for (size_t k = 0; k < model.beta.rows; ++k) {
        if (!std::getline(in, line)) throw std::runtime_error(path + ": truncated beta block");
        auto vals = parse_csv_row(line);
        if (vals.size() != s_dim) throw std::runtime_error(path + ": ragged beta row");
        std::copy(vals.begin(), vals.end(), model.beta.row(k));
    }
    expect("bias");
    if (!std::getline(in, line)) throw std::runtime_error(path + ": truncated bias block");
    model.bias = parse_csv_row(line);
    if (model.bias.size() != model.labels.names.size())
        throw std::runtime_error(path + ": bias size mismatch");
    return model;
}

void save_subspace_csv(const NlseModel& model, const UserEmbeddingMatrix& users,
                       const std::vector<int>& labels, const LabelSet& label_set,
                       const std::string& path) {
    Matrix g = subspace_features(model, users, users.user_ids);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "user_id,label";
    for (size_t i = 0; i < g.cols; ++i) out << ",g" << i;
    out << "\n";
    for (size_t r = 0; r < g.rows; ++r) {
        out << users.user_ids[r] << ","
            << label_set.names[static_cast<size_t>(labels[r])];
        for (size_t i = 0; i < g.cols; ++i) out << "," << fmt_g17(g(r, i));
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace cohort
