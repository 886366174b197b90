#pragma once

#include <span>
#include <vector>

#include "shellgate/matrix.hpp"

namespace shellgate::kernels {

// Hot numeric loops, parallelized with OpenMP. Every output element is
// produced by exactly one thread with a fixed inner summation order, so
// results are bit-identical to the serial reference regardless of the
// thread count. The serial versions are kept in kernels::serial for
// equivalence tests and the bench tool.

// C = A * B^T where A is m x k and B is n x k.
Matrix matmul_nt(const Matrix& a, const Matrix& b);

// C = A^T * B where A is k x m and B is k x n.
Matrix matmul_tn(const Matrix& a, const Matrix& b);

// C = A * B where A is m x k and B is k x n.
Matrix matmul_nn(const Matrix& a, const Matrix& b);

// Weighted centered Gram matrix: K[a][b] = sqrt(w_a w_b) * (x_a - mu) . (x_b - mu)
// over sparse rows sharing dimension mu.size().
Matrix weighted_gram(const std::vector<SparseVec>& rows,
                     const std::vector<double>& weights,
                     const std::vector<double>& mean);

// Rows projected onto components: out[i] = comps * (x_i - mu), with an
// optional per-feature inverse scale applied to (x_i - mu).
// comps is q x d, mean has length d, inv_scale is empty or length d.
Matrix project_batch(const Matrix& comps, const std::vector<double>& mean,
                     const std::vector<double>& inv_scale,
                     const std::vector<SparseVec>& rows);

double sparse_dot(const SparseVec& a, const SparseVec& b);

namespace serial {
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix matmul_nn(const Matrix& a, const Matrix& b);
Matrix weighted_gram(const std::vector<SparseVec>& rows,
                     const std::vector<double>& weights,
                     const std::vector<double>& mean);
Matrix project_batch(const Matrix& comps, const std::vector<double>& mean,
                     const std::vector<double>& inv_scale,
                     const std::vector<SparseVec>& rows);
}  // namespace serial

}  // namespace shellgate::kernels
