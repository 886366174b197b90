#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace shellgate {

// Dense row-major matrix of doubles.
struct Matrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double* row(size_t i) { return data.data() + i * cols; }
    const double* row(size_t i) const { return data.data() + i * cols; }

    double& at(size_t i, size_t j) { return data[i * cols + j]; }
    double at(size_t i, size_t j) const { return data[i * cols + j]; }

    std::span<const double> row_span(size_t i) const { return {row(i), cols}; }
    std::span<double> row_span(size_t i) { return {row(i), cols}; }
};

// Sparse vector with strictly increasing indices. Values are doubles so the
// same type carries raw counts and appended dense statistics.
struct SparseVec {
    std::vector<std::pair<uint32_t, double>> entries;
    size_t dim = 0;
};

}  // namespace shellgate
