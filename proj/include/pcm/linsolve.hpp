// SPDX-License-Identifier: Apache-2.0
//
// Sparse SPD solver used by both field solvers: CSR storage, conjugate
// gradients with zero-fill incomplete Cholesky preconditioning (Jacobi
// fallback), plus a small dense LU for the circuit Newton systems.

#ifndef PCM_LINSOLVE_HPP
#define PCM_LINSOLVE_HPP

#include <cstddef>
#include <vector>

#include "pcm/types.hpp"

namespace pcm {

// Symmetric positive-definite matrix in CSR form. Both triangles are stored
// so the matvec is a plain row sweep; columns are sorted within each row.
struct SparseSpd {
    int n = 0;
    std::vector<int> row_ptr;  // size n+1
    std::vector<int> col;
    std::vector<double> val;

    void matvec(const double* x, double* y) const;
};

// Incremental builder: collect (i, j, v) with duplicates summed, then
// assemble. Only i<=j entries need to be added; the mirror is filled in.
class SpdBuilder {
  public:
    explicit SpdBuilder(int n);
    void add(int i, int j, double v);
    SparseSpd assemble() const;
    int n() const { return n_; }

  private:
    int n_;
    std::vector<std::vector<std::pair<int, double>>> rows_;  // upper triangle incl. diag
};

// Zero-fill incomplete Cholesky factor (pattern of lower(A)). Falls back to
// a diagonal (Jacobi) preconditioner if a pivot loses positivity, which
// cannot happen for the M-matrices assembled here but keeps the solver total.
class IncompleteCholesky {
  public:
    explicit IncompleteCholesky(const SparseSpd& a);
    void apply(const double* r, double* z) const;  // z = (L L^T)^{-1} r
    bool jacobi_fallback() const { return jacobi_; }

  private:
    int n_;
    bool jacobi_ = false;
    std::vector<int> lrow_ptr_, lcol_;  // strictly-lower pattern
    std::vector<double> lval_;
    std::vector<double> ldiag_;
    std::vector<double> inv_diag_;  // Jacobi path
    mutable std::vector<double> work_;
};

struct CgResult {
    int iterations = 0;
    double relative_residual = 0.0;
};

// Preconditioned CG. `x` carries the warm start on entry and the solution on
// exit. Throws SolveError on non-convergence.
CgResult solve_pcg(const SparseSpd& a, const IncompleteCholesky& prec, const std::vector<double>& b,
                   std::vector<double>& x, double rel_tol, int max_iter = 0);

// Dense solvers for small systems (circuit Jacobians, test oracles).
// Row-major n x n matrix; both throw on singular input.
void dense_lu_solve(std::vector<double>& a, std::vector<double>& b, int n);
void dense_spd_solve(std::vector<double>& a, std::vector<double>& b, int n);

}  // namespace pcm

#endif
