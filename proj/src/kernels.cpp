#include "shellgate/kernels.hpp"

#include <cassert>
#include <cmath>
#include <cstdint>

#include "shellgate/threads.hpp"

namespace shellgate::kernels {

namespace {

inline double dot(const double* a, const double* b, size_t n) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

inline double row_dot_dense(const SparseVec& x, const std::vector<double>& d) {
    double s = 0.0;
    for (const auto& [j, v] : x.entries) s += v * d[j];
    return s;
}

inline void project_row(const Matrix& comps, const std::vector<double>& inv_scale,
                        const std::vector<double>& centered_mean_proj,
                        const SparseVec& x, double* out) {
    const size_t q = comps.rows;
    for (size_t k = 0; k < q; ++k) {
        const double* c = comps.row(k);
        double s = 0.0;
        if (inv_scale.empty()) {
            for (const auto& [j, v] : x.entries) s += c[j] * v;
        } else {
            for (const auto& [j, v] : x.entries) s += c[j] * v * inv_scale[j];
        }
        out[k] = s - centered_mean_proj[k];
    }
}

std::vector<double> mean_projection(const Matrix& comps, const std::vector<double>& mean,
                                    const std::vector<double>& inv_scale) {
    std::vector<double> mp(comps.rows, 0.0);
    for (size_t k = 0; k < comps.rows; ++k) {
        const double* c = comps.row(k);
        double s = 0.0;
        if (inv_scale.empty()) {
            for (size_t j = 0; j < comps.cols; ++j) s += c[j] * mean[j];
        } else {
            for (size_t j = 0; j < comps.cols; ++j) s += c[j] * mean[j] * inv_scale[j];
        }
        mp[k] = s;
    }
    return mp;
}

}  // namespace

double sparse_dot(const SparseVec& a, const SparseVec& b) {
    double s = 0.0;
    size_t i = 0, j = 0;
    const auto& ea = a.entries;
    const auto& eb = b.entries;
    while (i < ea.size() && j < eb.size()) {
        if (ea[i].first < eb[j].first) {
            ++i;
        } else if (ea[i].first > eb[j].first) {
            ++j;
        } else {
            s += ea[i].second * eb[j].second;
            ++i;
            ++j;
        }
    }
    return s;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    assert(a.cols == b.cols);
    Matrix c(a.rows, b.rows);
    const int64_t m = static_cast<int64_t>(a.rows);
#pragma omp parallel for schedule(static) num_threads(threads::count())
    for (int64_t i = 0; i < m; ++i) {
        double* out = c.row(static_cast<size_t>(i));
        const double* ai = a.row(static_cast<size_t>(i));
        for (size_t j = 0; j < b.rows; ++j) out[j] = dot(ai, b.row(j), a.cols);
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    assert(a.rows == b.rows);
    Matrix c(a.cols, b.cols);
    const int64_t m = static_cast<int64_t>(a.cols);
#pragma omp parallel for schedule(static) num_threads(threads::count())
    for (int64_t i = 0; i < m; ++i) {
        double* out = c.row(static_cast<size_t>(i));
        for (size_t r = 0; r < a.rows; ++r) {
            const double av = a.at(r, static_cast<size_t>(i));
            if (av == 0.0) continue;
            const double* br = b.row(r);
            for (size_t j = 0; j < b.cols; ++j) out[j] += av * br[j];
        }
    }
    return c;
}

Matrix matmul_nn(const Matrix& a, const Matrix& b) {
    assert(a.cols == b.rows);
    Matrix c(a.rows, b.cols);
    const int64_t m = static_cast<int64_t>(a.rows);
#pragma omp parallel for schedule(static) num_threads(threads::count())
    for (int64_t i = 0; i < m; ++i) {
        double* out = c.row(static_cast<size_t>(i));
        const double* ai = a.row(static_cast<size_t>(i));
        for (size_t k = 0; k < a.cols; ++k) {
            const double av = ai[k];
            if (av == 0.0) continue;
            const double* bk = b.row(k);
            for (size_t j = 0; j < b.cols; ++j) out[j] += av * bk[j];
        }
    }
    return c;
}

Matrix weighted_gram(const std::vector<SparseVec>& rows, const std::vector<double>& weights,
                     const std::vector<double>& mean) {
    const size_t r = rows.size();
    Matrix k(r, r);
    std::vector<double> mdot(r), sw(r);
    const int64_t rn = static_cast<int64_t>(r);
#pragma omp parallel for schedule(static) num_threads(threads::count())
    for (int64_t a = 0; a < rn; ++a) {
        mdot[a] = row_dot_dense(rows[a], mean);
        sw[a] = std::sqrt(weights[a]);
    }
    double mumu = 0.0;
    for (double mj : mean) mumu += mj * mj;
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads::count())
    for (int64_t a = 0; a < rn; ++a) {
        for (int64_t b = 0; b <= a; ++b) {
            double v = sw[a] * sw[b] * (sparse_dot(rows[a], rows[b]) - mdot[a] - mdot[b] + mumu);
            k.at(a, b) = v;
            k.at(b, a) = v;
        }
    }
    return k;
}

Matrix project_batch(const Matrix& comps, const std::vector<double>& mean,
                     const std::vector<double>& inv_scale, const std::vector<SparseVec>& rows) {
    Matrix out(rows.size(), comps.rows);
    const std::vector<double> mp = mean_projection(comps, mean, inv_scale);
    const int64_t n = static_cast<int64_t>(rows.size());
#pragma omp parallel for schedule(static) num_threads(threads::count())
    for (int64_t i = 0; i < n; ++i)
        project_row(comps, inv_scale, mp, rows[static_cast<size_t>(i)],
                    out.row(static_cast<size_t>(i)));
    return out;
}

namespace serial {

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    assert(a.cols == b.cols);
    Matrix c(a.rows, b.rows);
    for (size_t i = 0; i < a.rows; ++i) {
        double* out = c.row(i);
        const double* ai = a.row(i);
        for (size_t j = 0; j < b.rows; ++j) out[j] = dot(ai, b.row(j), a.cols);
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    assert(a.rows == b.rows);
    Matrix c(a.cols, b.cols);
    for (size_t i = 0; i < a.cols; ++i) {
        double* out = c.row(i);
        for (size_t r = 0; r < a.rows; ++r) {
            const double av = a.at(r, i);
            if (av == 0.0) continue;
            const double* br = b.row(r);
            for (size_t j = 0; j < b.cols; ++j) out[j] += av * br[j];
        }
    }
    return c;
}

Matrix weighted_gram(const std::vector<SparseVec>& rows, const std::vector<double>& weights,
                     const std::vector<double>& mean) {
    const size_t r = rows.size();
    Matrix k(r, r);
    std::vector<double> mdot(r), sw(r);
    for (size_t a = 0; a < r; ++a) {
        mdot[a] = row_dot_dense(rows[a], mean);
        sw[a] = std::sqrt(weights[a]);
    }
    double mumu = 0.0;
    for (double mj : mean) mumu += mj * mj;
    for (size_t a = 0; a < r; ++a) {
        for (size_t b = 0; b <= a; ++b) {
            double v = sw[a] * sw[b] * (sparse_dot(rows[a], rows[b]) - mdot[a] - mdot[b] + mumu);
            k.at(a, b) = v;
            k.at(b, a) = v;
        }
    }
    return k;
}

Matrix project_batch(const Matrix& comps, const std::vector<double>& mean,
                     const std::vector<double>& inv_scale, const std::vector<SparseVec>& rows) {
    Matrix out(rows.size(), comps.rows);
    const std::vector<double> mp = mean_projection(comps, mean, inv_scale);
    for (size_t i = 0; i < rows.size(); ++i)
        project_row(comps, inv_scale, mp, rows[i], out.row(i));
    return out;
}

}  // namespace serial

}  // namespace shellgate::kernels
