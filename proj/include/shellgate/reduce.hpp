#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "shellgate/featurize.hpp"
#include "shellgate/matrix.hpp"

namespace shellgate {

struct PcaOptions {
    double variance_target = 0.999;
    // Scale centered features by 1/stddev before projection (correlation
    // PCA). Off by default: plain centering.
    bool standardize = false;
    // Uniform subsample cap for the fit set; 0 disables.
    size_t max_fit_samples = 0;
    uint64_t subsample_seed = 1;
    // Force the eigenproblem side; Auto picks the smaller of distinct-row
    // count and feature count.
    enum class Side : uint8_t { Auto, Covariance, Gram } side = Side::Auto;
};

// Mean vector plus orthonormal component rows retaining at least
// variance_target of the training variance, with a minimal component count.
struct PcaModel {
    size_t input_dim = 0;
    size_t n_components = 0;
    double variance_target = 1.0;
    std::vector<double> mean;            // length input_dim
    std::vector<double> inv_scale;       // empty unless standardize
    Matrix components;                   // n_components x input_dim, rows orthonormal
    std::vector<double> explained_variance;  // descending, length n_components
    double total_variance = 0.0;

    double retained_fraction() const;

    std::vector<double> transform(const SparseVec& x) const;
    std::vector<double> transform(std::span<const double> x) const;
    Matrix transform_batch(const std::vector<SparseVec>& rows) const;

    // mean + components^T * y; used by reconstruction-error checks.
    std::vector<double> inverse_transform(std::span<const double> y) const;
};

PcaModel fit_pca(const std::vector<SparseVec>& rows, const PcaOptions& opts = {});

// Dense convenience wrappers.
PcaModel fit_pca(const Matrix& data, const PcaOptions& opts = {});
std::vector<SparseVec> to_sparse_rows(const Matrix& data);
SparseVec feature_to_sparse(const FeatureVector& fv, bool append_stats,
                            std::span<const double> stats = {});

}  // namespace shellgate
