#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

#include "semfem/errors.hpp"

namespace semfem {

struct Triplet {
  int r, c;
  double v;
};

// Symmetric sparse matrix in CSR form (full pattern stored). Built once from
// triplets, immutable afterwards. Duplicate triplets are summed in (row, col,
// insertion-order) order, which keeps assembly deterministic.
class SparseSymMatrix {
 public:
  SparseSymMatrix() = default;

  static SparseSymMatrix from_triplets(int n, std::vector<Triplet> ts) {
    std::stable_sort(ts.begin(), ts.end(), [](const Triplet& a, const Triplet& b) {
      return a.r != b.r ? a.r < b.r : a.c < b.c;
    });
    SparseSymMatrix m;
    m.n_ = n;
    m.row_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
    for (std::size_t i = 0; i < ts.size();) {
      std::size_t j = i;
      double s = 0.0;
      while (j < ts.size() && ts[j].r == ts[i].r && ts[j].c == ts[i].c) s += ts[j++].v;
      m.col_.push_back(ts[i].c);
      m.val_.push_back(s);
      ++m.row_ptr_[static_cast<std::size_t>(ts[i].r) + 1];
      i = j;
    }
    for (int r = 0; r < n; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
    return m;
  }

  int rows() const { return n_; }
  std::size_t nonzeros() const { return val_.size(); }

  void apply(const std::vector<double>& x, std::vector<double>& y) const {
    y.assign(n_, 0.0);
    for (int r = 0; r < n_; ++r) {
      double s = 0.0;
      for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += val_[k] * x[col_[k]];
      y[r] = s;
    }
  }

  std::vector<double> apply(const std::vector<double>& x) const {
    std::vector<double> y;
    apply(x, y);
    return y;
  }

  // x^T A x accumulated row by row (fixed order, reproducible).
  double quadratic_form(const std::vector<double>& x) const {
    double q = 0.0;
    for (int r = 0; r < n_; ++r) {
      double s = 0.0;
      for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += val_[k] * x[col_[k]];
      q += x[r] * s;
    }
    return q;
  }

  std::vector<double> diagonal() const {
    std::vector<double> d(n_, 0.0);
    for (int r = 0; r < n_; ++r)
      for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        if (col_[k] == r) d[r] = val_[k];
    return d;
  }

  double coeff(int r, int c) const {
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      if (col_[k] == c) return val_[k];
    return 0.0;
  }

  // a*this + b*other for matrices with identical sparsity patterns (as
  // produced by assembling different bilinear forms on the same mesh).
  // Entry-wise combination keeps quadratic forms on the result bit-compatible
  // with combining the two quadratic forms at the matrix-entry level.
  SparseSymMatrix combined(double a, const SparseSymMatrix& other, double b) const {
    if (n_ != other.n_ || row_ptr_ != other.row_ptr_ || col_ != other.col_)
      throw SolverError("combined: sparsity patterns differ");
    SparseSymMatrix m = *this;
    for (std::size_t k = 0; k < val_.size(); ++k) m.val_[k] = a * val_[k] + b * other.val_[k];
    return m;
  }

  template <class Fn>
  void for_each(Fn&& fn) const {
    for (int r = 0; r < n_; ++r)
      for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) fn(r, col_[k], val_[k]);
  }

 private:
  int n_ = 0;
  std::vector<int> row_ptr_;
  std::vector<int> col_;
  std::vector<double> val_;
};

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace detail

struct SolveStats {
  int iterations = 0;
  double rel_residual = 0.0;
};

// Jacobi-preconditioned conjugate gradients for SPD systems. Stops when
// ||b - A x||_2 <= tol * ||b||_2. Deterministic: fixed accumulation order,
// no randomisation. Throws SolverError (with the achieved residual) when the
// iteration cap 10 n is exhausted.
inline std::vector<double> cg_solve(const SparseSymMatrix& A, const std::vector<double>& b,
                                    const std::vector<double>* x0 = nullptr,
                                    double tol = 1e-12, int max_iter = -1,
                                    SolveStats* stats = nullptr) {
  const int n = A.rows();
  if (max_iter < 0) max_iter = std::max(10 * n, 50);
  std::vector<double> x = x0 ? *x0 : std::vector<double>(n, 0.0);
  const double bnorm = detail::norm2(b);
  if (bnorm == 0.0) {
    if (stats) *stats = {0, 0.0};
    return std::vector<double>(n, 0.0);
  }
  std::vector<double> d = A.diagonal();
  for (double& v : d) {
    if (!(v > 0.0)) throw SolverError("cg_solve: non-positive diagonal entry");
    v = 1.0 / v;
  }
  std::vector<double> r(n), z(n), p(n), Ap(n);
  A.apply(x, Ap);
  for (int i = 0; i < n; ++i) r[i] = b[i] - Ap[i];
  for (int i = 0; i < n; ++i) z[i] = d[i] * r[i];
  p = z;
  double rz = detail::dot(r, z);
  double rnorm = detail::norm2(r);
  int it = 0;
  while (rnorm > tol * bnorm) {
    if (it++ >= max_iter) {
      std::ostringstream os;
      os << "cg_solve: no convergence in " << max_iter
         << " iterations, residual " << rnorm / bnorm;
      throw SolverError(os.str());
    }
    A.apply(p, Ap);
    double pAp = detail::dot(p, Ap);
    if (!(pAp > 0.0)) throw SolverError("cg_solve: matrix not positive definite");
    double alpha = rz / pAp;
    for (int i = 0; i < n; ++i) x[i] += alpha * p[i];
    for (int i = 0; i < n; ++i) r[i] -= alpha * Ap[i];
    rnorm = detail::norm2(r);
    for (int i = 0; i < n; ++i) z[i] = d[i] * r[i];
    double rz_new = detail::dot(r, z);
    double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  if (stats) *stats = {it, rnorm / bnorm};
  return x;
}

// MINRES with symmetric |diag|^(-1/2) scaling, for symmetric indefinite
// systems (used by the direct path of non-coercive linear problems).
inline std::vector<double> minres_solve(const SparseSymMatrix& A, const std::vector<double>& b,
                                        const std::vector<double>* x0 = nullptr,
                                        double tol = 1e-12, int max_iter = -1,
                                        SolveStats* stats = nullptr) {
  const int n = A.rows();
  if (max_iter < 0) max_iter = std::max(30 * n, 100);
  std::vector<double> scale = A.diagonal();
  for (double& v : scale) v = 1.0 / std::sqrt(std::max(std::abs(v), 1e-300));

  // scaled system: As = S A S, bs = S (b - A x0), x = x0 + S y
  std::vector<double> xinit = x0 ? *x0 : std::vector<double>(n, 0.0);
  std::vector<double> bs(n);
  {
    std::vector<double> Ax;
    A.apply(xinit, Ax);
    for (int i = 0; i < n; ++i) bs[i] = scale[i] * (b[i] - Ax[i]);
  }
  auto apply_scaled = [&](const std::vector<double>& v, std::vector<double>& out) {
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i) t[i] = scale[i] * v[i];
    A.apply(t, out);
    for (int i = 0; i < n; ++i) out[i] *= scale[i];
  };

  const double beta1 = detail::norm2(bs);
  std::vector<double> y(n, 0.0);
  if (beta1 == 0.0) {
    if (stats) *stats = {0, 0.0};
    return xinit;
  }
  std::vector<double> r1 = bs, r2 = bs, v(n), w(n, 0.0), w1(n, 0.0), w2(n, 0.0), t(n);
  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
  double cs = -1.0, sn = 0.0;
  int it = 0;
  while (phibar > tol * beta1) {
    if (it++ >= max_iter) {
      std::ostringstream os;
      os << "minres_solve: no convergence in " << max_iter
         << " iterations, residual " << phibar / beta1;
      throw SolverError(os.str());
    }
    double s = 1.0 / beta;
    for (int i = 0; i < n; ++i) v[i] = s * r2[i];
    apply_scaled(v, t);
    if (it >= 2)
      for (int i = 0; i < n; ++i) t[i] -= (beta / oldb) * r1[i];
    double alfa = detail::dot(v, t);
    for (int i = 0; i < n; ++i) t[i] -= (alfa / beta) * r2[i];
    r1 = r2;
    r2 = t;
    oldb = beta;
    beta = detail::norm2(r2);
    double oldeps = epsln;
    double delta = cs * dbar + sn * alfa;
    double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    double gamma = std::max(std::hypot(gbar, beta), 1e-300);
    cs = gbar / gamma;
    sn = beta / gamma;
    double phi = cs * phibar;
    phibar = sn * phibar;
    w1 = w2;
    w2 = w;
    for (int i = 0; i < n; ++i) w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
    for (int i = 0; i < n; ++i) y[i] += phi * w[i];
  }
  if (stats) *stats = {it, phibar / beta1};
  for (int i = 0; i < n; ++i) xinit[i] += scale[i] * y[i];
  return xinit;
}

}  // namespace semfem
