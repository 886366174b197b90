#include "shellgate/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <unordered_map>

#include <Eigen/Dense>

#include "shellgate/error.hpp"
#include "shellgate/kernels.hpp"
#include "shellgate/rng.hpp"
#include "shellgate/threads.hpp"

namespace shellgate {

namespace {

using EigenRowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Eigenvalues below this fraction of the largest are treated as exact zeros;
// they are pure rounding noise and their inverse square roots are unusable.
constexpr double kRankCutoff = 1e-12;

struct DedupResult {
    std::vector<SparseVec> rows;     // unique rows (scaled when standardizing)
    std::vector<double> weights;     // multiplicities, sum == sample count
};

uint64_t hash_row(const SparseVec& row) {
    uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const void* p, size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ULL;
        }
    };
    for (const auto& [j, v] : row.entries) {
        mix(&j, sizeof(j));
        mix(&v, sizeof(v));
    }
    return h;
}

bool rows_equal(const SparseVec& a, const SparseVec& b) {
    return a.entries.size() == b.entries.size() &&
           std::equal(a.entries.begin(), a.entries.end(), b.entries.begin());
}

// Collapse duplicate samples into weighted unique rows. Exact: the weighted
// scatter of the result equals the scatter of the input, and text corpora
// are usually duplicate-heavy, which shrinks the Gram side substantially.
DedupResult dedup_rows(const std::vector<SparseVec>& rows, const std::vector<size_t>& take) {
    DedupResult out;
    std::unordered_map<uint64_t, std::vector<size_t>> buckets;  // hash -> unique ids
    out.rows.reserve(take.size() / 4 + 1);
    for (size_t idx : take) {
        const SparseVec& row = rows[idx];
        uint64_t h = hash_row(row);
        auto& bucket = buckets[h];
        bool found = false;
        for (size_t uid : bucket) {
            if (rows_equal(out.rows[uid], row)) {
                out.weights[uid] += 1.0;
                found = true;
                break;
            }
        }
        if (!found) {
            bucket.push_back(out.rows.size());
            out.rows.push_back(row);
            out.weights.push_back(1.0);
        }
    }
    return out;
}

struct Spectrum {
    std::vector<double> values;  // descending, clamped at zero
    Matrix vectors;              // row k is the eigenvector for values[k]
};

Spectrum solve_symmetric(const Matrix& m) {
    Eigen::Map<const EigenRowMajor> mapped(m.data.data(), static_cast<Eigen::Index>(m.rows),
                                           static_cast<Eigen::Index>(m.cols));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(mapped);
    if (solver.info() != Eigen::Success)
        throw TrainError("fit_pca: eigendecomposition failed to converge");
    const auto& vals = solver.eigenvalues();   // ascending
    const auto& vecs = solver.eigenvectors();  // columns
    const size_t n = m.rows;
    Spectrum s;
    s.values.resize(n);
    s.vectors = Matrix(n, n);
    for (size_t k = 0; k < n; ++k) {
        const size_t src = n - 1 - k;
        s.values[k] = std::max(0.0, vals[static_cast<Eigen::Index>(src)]);
        for (size_t j = 0; j < n; ++j)
            s.vectors.at(k, j) = vecs(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(src));
    }
    return s;
}

void sign_fix(Matrix& components) {
    for (size_t k = 0; k < components.rows; ++k) {
        double* row = components.row(k);
        size_t arg = 0;
        double best = std::abs(row[0]);
        for (size_t j = 1; j < components.cols; ++j) {
            double a = std::abs(row[j]);
            if (a > best) {
                best = a;
                arg = j;
            }
        }
        if (row[arg] < 0.0)
            for (size_t j = 0; j < components.cols; ++j) row[j] = -row[j];
    }
}

}  // namespace

double PcaModel::retained_fraction() const {
    double s = 0.0;
    for (double v : explained_variance) s += v;
    return total_variance > 0.0 ? s / total_variance : 0.0;
}

std::vector<double> PcaModel::transform(const SparseVec& x) const {
    if (x.dim != input_dim) throw ContractError("pca transform: dimension mismatch");
    std::vector<SparseVec> one{x};
    Matrix out = kernels::serial::project_batch(components, mean, inv_scale, one);
    return {out.data.begin(), out.data.end()};
}

std::vector<double> PcaModel::transform(std::span<const double> x) const {
    if (x.size() != input_dim) throw ContractError("pca transform: dimension mismatch");
    SparseVec sv;
    sv.dim = input_dim;
    sv.entries.reserve(x.size());
    for (size_t j = 0; j < x.size(); ++j)
        if (x[j] != 0.0) sv.entries.emplace_back(static_cast<uint32_t>(j), x[j]);
    return transform(sv);
}

Matrix PcaModel::transform_batch(const std::vector<SparseVec>& rows) const {
    for (const auto& r : rows)
        if (r.dim != input_dim) throw ContractError("pca transform: dimension mismatch");
    return kernels::project_batch(components, mean, inv_scale, rows);
}

std::vector<double> PcaModel::inverse_transform(std::span<const double> y) const {
    if (y.size() != n_components) throw ContractError("pca inverse: dimension mismatch");
    std::vector<double> x(mean);
    for (size_t k = 0; k < n_components; ++k) {
        const double* c = components.row(k);
        const double yk = y[k];
        if (inv_scale.empty()) {
            for (size_t j = 0; j < input_dim; ++j) x[j] += yk * c[j];
        } else {
            for (size_t j = 0; j < input_dim; ++j) x[j] += yk * c[j] / inv_scale[j];
        }
    }
    return x;
}

PcaModel fit_pca(const std::vector<SparseVec>& rows, const PcaOptions& opts) {
    if (rows.size() < 2) throw TrainError("fit_pca: need at least 2 samples");
    if (!(opts.variance_target > 0.0 && opts.variance_target <= 1.0))
        throw ContractError("fit_pca: variance_target must be in (0, 1]");
    const size_t d = rows.front().dim;
    for (const auto& r : rows)
        if (r.dim != d) throw ContractError("fit_pca: inconsistent dimensions");
    if (d == 0) throw TrainError("fit_pca: zero-dimensional input");

    std::vector<size_t> take(rows.size());
    std::iota(take.begin(), take.end(), 0);
    if (opts.max_fit_samples > 0 && rows.size() > opts.max_fit_samples) {
        Rng rng(opts.subsample_seed);
        for (size_t i = 0; i < opts.max_fit_samples; ++i) {
            size_t j = i + static_cast<size_t>(rng.below(take.size() - i));
            std::swap(take[i], take[j]);
        }
        take.resize(opts.max_fit_samples);
        std::sort(take.begin(), take.end());
    }
    const double n = static_cast<double>(take.size());
    if (take.size() < 2) throw TrainError("fit_pca: need at least 2 samples");

    DedupResult uniq = dedup_rows(rows, take);
    const size_t r = uniq.rows.size();

    std::vector<double> mean(d, 0.0);
    for (size_t a = 0; a < r; ++a)
        for (const auto& [j, v] : uniq.rows[a].entries) mean[j] += uniq.weights[a] * v;
    for (double& m : mean) m /= n;

    PcaModel model;
    model.input_dim = d;
    model.variance_target = opts.variance_target;
    model.mean = mean;

    // Standardization rescales the unique rows and the mean in place; the
    // rest of the fit runs in scaled space.
    std::vector<double> work_mean = mean;
    if (opts.standardize) {
        std::vector<double> sq(d, 0.0);
        for (size_t a = 0; a < r; ++a)
            for (const auto& [j, v] : uniq.rows[a].entries) sq[j] += uniq.weights[a] * v * v;
        model.inv_scale.assign(d, 1.0);
        for (size_t j = 0; j < d; ++j) {
            double var = (sq[j] - n * mean[j] * mean[j]) / (n - 1.0);
            if (var > 0.0) model.inv_scale[j] = 1.0 / std::sqrt(var);
        }
        for (auto& row : uniq.rows)
            for (auto& [j, v] : row.entries) v *= model.inv_scale[j];
        for (size_t j = 0; j < d; ++j) work_mean[j] = mean[j] * model.inv_scale[j];
    }

    double sq_sum = 0.0, mu_sq = 0.0;
    for (size_t a = 0; a < r; ++a)
        for (const auto& [j, v] : uniq.rows[a].entries) sq_sum += uniq.weights[a] * v * v;
    for (double m : work_mean) mu_sq += m * m;
    // Cancellation noise in sq_sum - n*mu^2 is relative to sq_sum, so the
    // zero-variance test is relative too.
    const double trace = sq_sum - n * mu_sq;
    if (trace <= 1e-12 * sq_sum) throw TrainError("fit_pca: zero total variance");

    const bool covariance_side = opts.side == PcaOptions::Side::Covariance ||
                                 (opts.side == PcaOptions::Side::Auto && d <= r);

    Spectrum spectrum;
    if (covariance_side) {
        Matrix scatter(d, d);
        for (size_t a = 0; a < r; ++a) {
            const double w = uniq.weights[a];
            const auto& e = uniq.rows[a].entries;
            for (size_t p = 0; p < e.size(); ++p) {
                const double wv = w * e[p].second;
                for (size_t q2 = 0; q2 <= p; ++q2)
                    scatter.at(e[p].first, e[q2].first) += wv * e[q2].second;
            }
        }
        for (size_t j1 = 0; j1 < d; ++j1)
            for (size_t j2 = 0; j2 < j1; ++j2) scatter.at(j2, j1) = scatter.at(j1, j2);
        for (size_t j1 = 0; j1 < d; ++j1)
            for (size_t j2 = 0; j2 < d; ++j2)
                scatter.at(j1, j2) -= n * work_mean[j1] * work_mean[j2];
        spectrum = solve_symmetric(scatter);
    } else {
        Matrix gram = kernels::weighted_gram(uniq.rows, uniq.weights, work_mean);
        spectrum = solve_symmetric(gram);
    }

    // Spectrum accounting: eigenvalues below the rank cutoff are rounding
    // noise and are dropped from both the numerator and the denominator.
    const double lead = spectrum.values.empty() ? 0.0 : spectrum.values.front();
    size_t rank = 0;
    double total_scatter = 0.0;
    for (double v : spectrum.values) {
        if (v <= kRankCutoff * lead) break;
        total_scatter += v;
        ++rank;
    }
    if (rank == 0) throw TrainError("fit_pca: zero total variance");

    size_t q = rank;
    double cum = 0.0;
    for (size_t k = 0; k < rank; ++k) {
        cum += spectrum.values[k];
        if (cum >= opts.variance_target * total_scatter) {
            q = k + 1;
            break;
        }
    }

    model.n_components = q;
    model.total_variance = total_scatter / (n - 1.0);
    model.explained_variance.resize(q);
    for (size_t k = 0; k < q; ++k) model.explained_variance[k] = spectrum.values[k] / (n - 1.0);

    model.components = Matrix(q, d);
    if (covariance_side) {
        for (size_t k = 0; k < q; ++k)
            std::memcpy(model.components.row(k), spectrum.vectors.row(k), d * sizeof(double));
    } else {
        // Right singular vectors from the Gram factorization:
        // v_k = sum_a u_ak sqrt(w_a) (x_a - mu) / sqrt(lambda_k).
        const int64_t qn = static_cast<int64_t>(q);
#pragma omp parallel for schedule(static) num_threads(threads::count())
        for (int64_t k = 0; k < qn; ++k) {
            double* out = model.components.row(static_cast<size_t>(k));
            const double inv_sigma = 1.0 / std::sqrt(spectrum.values[static_cast<size_t>(k)]);
            double coeff_sum = 0.0;
            for (size_t a = 0; a < r; ++a) {
                const double c =
                    spectrum.vectors.at(static_cast<size_t>(k), a) * std::sqrt(uniq.weights[a]) *
                    inv_sigma;
                coeff_sum += c;
                for (const auto& [j, v] : uniq.rows[a].entries) out[j] += c * v;
            }
            for (size_t j = 0; j < d; ++j) out[j] -= coeff_sum * work_mean[j];
        }
    }
    sign_fix(model.components);
    return model;
}

PcaModel fit_pca(const Matrix& data, const PcaOptions& opts) {
    return fit_pca(to_sparse_rows(data), opts);
}

std::vector<SparseVec> to_sparse_rows(const Matrix& data) {
    std::vector<SparseVec> rows(data.rows);
    for (size_t i = 0; i < data.rows; ++i) {
        rows[i].dim = data.cols;
        for (size_t j = 0; j < data.cols; ++j) {
            double v = data.at(i, j);
            if (v != 0.0) rows[i].entries.emplace_back(static_cast<uint32_t>(j), v);
        }
    }
    return rows;
}

SparseVec feature_to_sparse(const FeatureVector& fv, bool append_stats,
                            std::span<const double> stats) {
    SparseVec sv;
    sv.dim = fv.dim + (append_stats ? kCommandStats : 0);
    sv.entries.reserve(fv.indices.size() + (append_stats ? kCommandStats : 0));
    for (size_t i = 0; i < fv.indices.size(); ++i)
        sv.entries.emplace_back(fv.indices[i], static_cast<double>(fv.counts[i]));
    if (append_stats) {
        for (size_t s = 0; s < kCommandStats; ++s) {
            double v = s < stats.size() ? stats[s] : 0.0;
            if (v != 0.0) sv.entries.emplace_back(static_cast<uint32_t>(fv.dim + s), v);
        }
    }
    return sv;
}

}  // namespace shellgate
