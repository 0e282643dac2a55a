#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace cohort {

// Dense row-major double matrix. Embedding matrices store one vector per row.
struct Matrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(size_t r, size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double* row(size_t i) { return data.data() + i * cols; }
    const double* row(size_t i) const { return data.data() + i * cols; }

    double& operator()(size_t i, size_t j) { return data[i * cols + j]; }
    double operator()(size_t i, size_t j) const { return data[i * cols + j]; }

    bool operator==(const Matrix& o) const {
        return rows == o.rows && cols == o.cols && data == o.data;
    }
};

inline double dot(const double* a, const double* b, size_t n) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

// y += alpha * x
inline void axpy(double alpha, const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

inline double l2_norm(const double* a, size_t n) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += a[i] * a[i];
    return std::sqrt(s);
}

}  // namespace cohort
