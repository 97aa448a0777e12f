// SPDX-License-Identifier: Apache-2.0

#include "pcm/linsolve.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pcm/types.hpp"

namespace pcm {

void SparseSpd::matvec(const double* x, double* y) const {
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
        y[i] = s;
    }
}

SpdBuilder::SpdBuilder(int n) : n_(n), rows_(n) {}

void SpdBuilder::add(int i, int j, double v) {
    if (i > j) std::swap(i, j);
    if (i < 0 || j >= n_) throw std::invalid_argument("SpdBuilder::add index out of range");
    rows_[i].emplace_back(j, v);
}

SparseSpd SpdBuilder::assemble() const {
    // Count entries per full row (upper entries mirror into their column's row).
    std::vector<std::vector<std::pair<int, double>>> merged(n_);
    for (int i = 0; i < n_; ++i) {
        std::vector<std::pair<int, double>> r = rows_[i];
        std::sort(r.begin(), r.end());
        // sum duplicates
        std::vector<std::pair<int, double>> u;
        for (const auto& [j, v] : r) {
            if (!u.empty() && u.back().first == j)
                u.back().second += v;
            else
                u.emplace_back(j, v);
        }
        for (const auto& [j, v] : u) {
            merged[i].emplace_back(j, v);
            if (j != i) merged[j].emplace_back(i, v);
        }
    }
    SparseSpd a;
    a.n = n_;
    a.row_ptr.assign(n_ + 1, 0);
    for (int i = 0; i < n_; ++i) {
        std::sort(merged[i].begin(), merged[i].end());
        a.row_ptr[i + 1] = a.row_ptr[i] + static_cast<int>(merged[i].size());
    }
    a.col.resize(a.row_ptr[n_]);
    a.val.resize(a.row_ptr[n_]);
    for (int i = 0; i < n_; ++i) {
        int k = a.row_ptr[i];
        for (const auto& [j, v] : merged[i]) {
            a.col[k] = j;
            a.val[k] = v;
            ++k;
        }
    }
    return a;
}

IncompleteCholesky::IncompleteCholesky(const SparseSpd& a) : n_(a.n) {
    work_.resize(n_);
    ldiag_.assign(n_, 0.0);
    lrow_ptr_.assign(n_ + 1, 0);
    for (int i = 0; i < n_; ++i) {
        int cnt = 0;
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
            if (a.col[k] < i) ++cnt;
        lrow_ptr_[i + 1] = lrow_ptr_[i] + cnt;
    }
    lcol_.resize(lrow_ptr_[n_]);
    lval_.assign(lrow_ptr_[n_], 0.0);

    // Column-indexed view of the strictly-lower pattern for the dot products.
    for (int i = 0; i < n_; ++i) {
        int k = lrow_ptr_[i];
        for (int p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
            if (a.col[p] < i) {
                lcol_[k] = a.col[p];
                lval_[k] = a.val[p];
                ++k;
            } else if (a.col[p] == i) {
                ldiag_[i] = a.val[p];
            }
        }
    }

    // L[i][j] = (A[i][j] - sum_k L[i][k] L[j][k]) / L[j][j], pattern-restricted.
    bool ok = true;
    for (int i = 0; i < n_ && ok; ++i) {
        for (int p = lrow_ptr_[i]; p < lrow_ptr_[i + 1]; ++p) {
            int j = lcol_[p];
            double s = lval_[p];
            // intersect row i (cols < j) with row j
            int pi = lrow_ptr_[i], pj = lrow_ptr_[j];
            while (pi < lrow_ptr_[i + 1] && pj < lrow_ptr_[j + 1] && lcol_[pi] < j) {
                if (lcol_[pi] == lcol_[pj]) {
                    s -= lval_[pi] * lval_[pj];
                    ++pi;
                    ++pj;
                } else if (lcol_[pi] < lcol_[pj]) {
                    ++pi;
                } else {
                    ++pj;
                }
            }
            lval_[p] = s / ldiag_[j];
        }
        double d = ldiag_[i];
        for (int p = lrow_ptr_[i]; p < lrow_ptr_[i + 1]; ++p) d -= lval_[p] * lval_[p];
        if (d <= 0.0 || !std::isfinite(d)) {
            ok = false;
            break;
        }
        ldiag_[i] = std::sqrt(d);
    }
    if (!ok) {
        jacobi_ = true;
        inv_diag_.resize(n_);
        for (int i = 0; i < n_; ++i) {
            double d = 0.0;
            for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
                if (a.col[k] == i) d = a.val[k];
            inv_diag_[i] = (d > 0.0) ? 1.0 / d : 1.0;
        }
    }
}

void IncompleteCholesky::apply(const double* r, double* z) const {
    if (jacobi_) {
        for (int i = 0; i < n_; ++i) z[i] = r[i] * inv_diag_[i];
        return;
    }
    double* y = work_.data();
    for (int i = 0; i < n_; ++i) {
        double s = r[i];
        for (int p = lrow_ptr_[i]; p < lrow_ptr_[i + 1]; ++p) s -= lval_[p] * y[lcol_[p]];
        y[i] = s / ldiag_[i];
    }
    for (int i = n_ - 1; i >= 0; --i) {
        double zi = y[i] / ldiag_[i];
        z[i] = zi;
        for (int p = lrow_ptr_[i]; p < lrow_ptr_[i + 1]; ++p) y[lcol_[p]] -= lval_[p] * zi;
    }
}

CgResult solve_pcg(const SparseSpd& a, const IncompleteCholesky& prec, const std::vector<double>& b,
                   std::vector<double>& x, double rel_tol, int max_iter) {
    const int n = a.n;
    if (static_cast<int>(x.size()) != n) x.assign(n, 0.0);
    if (max_iter <= 0) max_iter = std::max(200, 10 * n);

    double bnorm = 0.0;
    for (double v : b) bnorm += v * v;
    bnorm = std::sqrt(bnorm);
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        return {0, 0.0};
    }

    std::vector<double> r(n), z(n), p(n), q(n);
    a.matvec(x.data(), q.data());
    for (int i = 0; i < n; ++i) r[i] = b[i] - q[i];

    double rnorm = 0.0;
    for (double v : r) rnorm += v * v;
    rnorm = std::sqrt(rnorm);
    if (rnorm <= rel_tol * bnorm) return {0, rnorm / bnorm};

    prec.apply(r.data(), z.data());
    p = z;
    double rz = 0.0;
    for (int i = 0; i < n; ++i) rz += r[i] * z[i];

    for (int it = 1; it <= max_iter; ++it) {
        a.matvec(p.data(), q.data());
        double pq = 0.0;
        for (int i = 0; i < n; ++i) pq += p[i] * q[i];
        double alpha = rz / pq;
        for (int i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        rnorm = 0.0;
        for (double v : r) rnorm += v * v;
        rnorm = std::sqrt(rnorm);
        if (rnorm <= rel_tol * bnorm) return {it, rnorm / bnorm};
        prec.apply(r.data(), z.data());
        double rz_new = 0.0;
        for (int i = 0; i < n; ++i) rz_new += r[i] * z[i];
        double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw SolveError("conjugate gradient did not converge", rnorm / bnorm);
}

void dense_lu_solve(std::vector<double>& a, std::vector<double>& b, int n) {
    std::vector<int> piv(n);
    for (int i = 0; i < n; ++i) piv[i] = i;
    for (int k = 0; k < n; ++k) {
        int pr = k;
        double pmax = std::fabs(a[k * n + k]);
        for (int i = k + 1; i < n; ++i) {
            double v = std::fabs(a[i * n + k]);
            if (v > pmax) {
                pmax = v;
                pr = i;
            }
        }
        if (pmax == 0.0 || !std::isfinite(pmax))
            throw SolveError("singular matrix in dense LU", pmax);
        if (pr != k) {
            for (int j = 0; j < n; ++j) std::swap(a[k * n + j], a[pr * n + j]);
            std::swap(b[k], b[pr]);
        }
        for (int i = k + 1; i < n; ++i) {
            double f = a[i * n + k] / a[k * n + k];
            a[i * n + k] = 0.0;
            if (f == 0.0) continue;
            for (int j = k + 1; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
            b[i] -= f * b[k];
        }
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j) s -= a[i * n + j] * b[j];
        b[i] = s / a[i * n + i];
    }
}

void dense_spd_solve(std::vector<double>& a, std::vector<double>& b, int n) {
    // In-place Cholesky, lower triangle.
    for (int j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (int k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (d <= 0.0 || !std::isfinite(d)) throw SolveError("matrix not SPD in dense Cholesky", d);
        d = std::sqrt(d);
        a[j * n + j] = d;
        for (int i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (int k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s / d;
        }
    }
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
        b[i] = s / a[i * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int k = i + 1; k < n; ++k) s -= a[k * n + i] * b[k];
        b[i] = s / a[i * n + i];
    }
}

}  // namespace pcm
