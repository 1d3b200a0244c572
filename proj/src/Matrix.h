#ifndef MDIMPUTE_MATRIX_H
#define MDIMPUTE_MATRIX_H

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "Exceptions.h"

namespace mdi {

// Minimal dense row-major matrix. The linear algebra in this project is tiny
// (14-wide layers, 9x9 covariances), so a flat buffer is all that is needed.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols),
          data_(static_cast<size_t>(rows) * static_cast<size_t>(cols), fill) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& at(int r, int c) { return data_[index(r, c)]; }
    double at(int r, int c) const { return data_[index(r, c)]; }

    std::span<double> row(int r) { return {data_.data() + index(r, 0), static_cast<size_t>(cols_)}; }
    std::span<const double> row(int r) const {
        return {data_.data() + index(r, 0), static_cast<size_t>(cols_)};
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

private:
    size_t index(int r, int c) const {
        return static_cast<size_t>(r) * static_cast<size_t>(cols_) + static_cast<size_t>(c);
    }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

// Solves A x = b for symmetric positive definite A (in-place copy), used by
// the logistic fit and the covariance-metric distance. Returns false if the
// factorization breaks down (matrix singular to working precision).
inline bool choleskySolve(Matrix a, std::vector<double> b, std::vector<double>& x) {
    const int n = a.rows();
    if (a.cols() != n || b.size() != static_cast<size_t>(n))
        throw DataError("choleskySolve: dimension mismatch");
    // Factor A = L L^T.
    for (int j = 0; j < n; ++j) {
        double d = a.at(j, j);
        for (int k = 0; k < j; ++k) d -= a.at(j, k) * a.at(j, k);
        if (!(d > 0.0)) return false;
        const double ljj = std::sqrt(d);
        a.at(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            double s = a.at(i, j);
            for (int k = 0; k < j; ++k) s -= a.at(i, k) * a.at(j, k);
            a.at(i, j) = s / ljj;
        }
    }
    // Forward solve L y = b.
    for (int i = 0; i < n; ++i) {
        double s = b[static_cast<size_t>(i)];
        for (int k = 0; k < i; ++k) s -= a.at(i, k) * b[static_cast<size_t>(k)];
        b[static_cast<size_t>(i)] = s / a.at(i, i);
    }
    // Back solve L^T x = y.
    x.assign(static_cast<size_t>(n), 0.0);
    for (int i = n - 1; i >= 0; --i) {
        double s = b[static_cast<size_t>(i)];
        for (int k = i + 1; k < n; ++k) s -= a.at(k, i) * x[static_cast<size_t>(k)];
        x[static_cast<size_t>(i)] = s / a.at(i, i);
    }
    return true;
}

}  // namespace mdi

#endif
