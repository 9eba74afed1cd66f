#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "earnlm/error.hpp"
#include "earnlm/rng.hpp"

namespace earnlm {

// Dense row-major matrix of doubles. All model math runs in double so the
// finite-difference gradient checks are meaningful.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }

    std::size_t size() const { return data.size(); }

    void zero() { std::fill(data.begin(), data.end(), 0.0); }

    void fill_normal(Rng& rng, double mean, double stddev) {
        for (auto& v : data) v = rng.normal(mean, stddev);
    }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

inline void require_shape(const Matrix& m, std::size_t r, std::size_t c, const char* what) {
    if (m.rows != r || m.cols != c) {
        throw Error(ErrorCode::shape_mismatch,
                    std::string(what) + ": expected " + std::to_string(r) + "x" +
                        std::to_string(c) + ", got " + std::to_string(m.rows) + "x" +
                        std::to_string(m.cols));
    }
}

// out = a * b           a: m x k, b: k x n
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw Error(ErrorCode::shape_mismatch, "matmul inner dims differ");
    Matrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        double* orow = out.row(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = b.row(k);
            for (std::size_t j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

// out = a * b^T         a: m x k, b: n x k
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols) throw Error(ErrorCode::shape_mismatch, "matmul_nt inner dims differ");
    Matrix out(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        double* orow = out.row(i);
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double* brow = b.row(j);
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) acc += arow[k] * brow[k];
            orow[j] = acc;
        }
    }
    return out;
}

// out = a^T * b         a: k x m, b: k x n
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows) throw Error(ErrorCode::shape_mismatch, "matmul_tn inner dims differ");
    Matrix out(a.cols, b.cols);
    for (std::size_t k = 0; k < a.rows; ++k) {
        const double* arow = a.row(k);
        const double* brow = b.row(k);
        for (std::size_t i = 0; i < a.cols; ++i) {
            const double aki = arow[i];
            if (aki == 0.0) continue;
            double* orow = out.row(i);
            for (std::size_t j = 0; j < b.cols; ++j) orow[j] += aki * brow[j];
        }
    }
    return out;
}

// acc += m (elementwise), shapes must match
inline void add_inplace(Matrix& acc, const Matrix& m) {
    if (!acc.same_shape(m)) throw Error(ErrorCode::shape_mismatch, "add_inplace shape mismatch");
    for (std::size_t i = 0; i < acc.size(); ++i) acc.data[i] += m.data[i];
}

inline void add_scaled_inplace(Matrix& acc, const Matrix& m, double scale) {
    if (!acc.same_shape(m)) throw Error(ErrorCode::shape_mismatch, "add_scaledshape mismatch");
    for (std::size_t i = 0; i < acc.size(); ++i) acc.data[i] += scale * m.data[i];
}

inline Matrix scaled(const Matrix& m, double s) {
    Matrix out = m;
    for (auto& v : out.data) v *= s;
    return out;
}

// y = W x  with W: d x k, x: k
inline std::vector<double> matvec(const Matrix& w, const std::vector<double>& x) {
    if (w.cols != x.size()) throw Error(ErrorCode::shape_mismatch, "matvec dims differ");
    std::vector<double> y(w.rows, 0.0);
    for (std::size_t i = 0; i < w.rows; ++i) {
        const double* row = w.row(i);
        double acc = 0.0;
        for (std::size_t k = 0; k < w.cols; ++k) acc += row[k] * x[k];
        y[i] = acc;
    }
    return y;
}

}  // namespace earnlm
