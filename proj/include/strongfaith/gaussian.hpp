#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "strongfaith/dag.hpp"
#include "strongfaith/errors.hpp"

namespace strongfaith {

// Numeric layer: a concrete edge-weight assignment turns the DAG into a
// Gaussian with covariance Sigma = [(I - A)(I - A)^T]^{-1} and unit error
// variances. det(Sigma) = 1 since I - A is unit triangular.

struct Weights {
  const Dag* dag = nullptr;
  std::vector<double> a;  // indexed like dag->edges()
};

inline Weights make_weights(const Dag& g, std::vector<double> a) {
  if (static_cast<int>(a.size()) != g.edge_count())
    throw InvalidArgument("weight vector length must equal the edge count");
  for (double v : a)
    if (!std::isfinite(v)) throw InvalidArgument("edge weights must be finite");
  return Weights{&g, std::move(a)};
}

struct GaussianModel {
  int p = 0;
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd k;
};

inline void build_model_into(const Weights& w, GaussianModel& m) {
  const Dag& g = *w.dag;
  if (static_cast<int>(w.a.size()) != g.edge_count())
    throw InvalidArgument("weight vector length must equal the edge count");
  int p = g.p();
  m.p = p;
  Eigen::MatrixXd b = Eigen::MatrixXd::Identity(p, p);
  for (int t = 0; t < g.edge_count(); ++t) {
    const Edge& e = g.edges()[t];
    if (!std::isfinite(w.a[t])) throw InvalidArgument("edge weights must be finite");
    b(e.i - 1, e.j - 1) = -w.a[t];
  }
  m.k = b * b.transpose();
  Eigen::LLT<Eigen::MatrixXd> llt(m.k);
  if (llt.info() != Eigen::Success)
    throw NumericError("concentration matrix is not numerically positive definite");
  m.sigma = llt.solve(Eigen::MatrixXd::Identity(p, p));
}

inline GaussianModel build_model(const Weights& w) {
  GaussianModel m;
  build_model_into(w, m);
  return m;
}

// Reusable buffers for partial correlation queries; one instance per thread.
struct ParcorrScratch {
  std::vector<double> chol;  // n x n row-major Cholesky factor, built in place
  std::vector<double> z1, z2;
  std::vector<int> idx;
};

namespace detail {

// In-place lower Cholesky of the matrix packed in ws.chol (n x n row-major).
inline void cholesky(std::vector<double>& c, int n) {
  for (int k = 0; k < n; ++k) {
    double d = c[k * n + k];
    for (int t = 0; t < k; ++t) d -= c[k * n + t] * c[k * n + t];
    if (!(d > 0.0))
      throw NumericError("submatrix lost positive definiteness during factorization");
    d = std::sqrt(d);
    c[k * n + k] = d;
    for (int r = k + 1; r < n; ++r) {
      double v = c[r * n + k];
      for (int t = 0; t < k; ++t) v -= c[r * n + t] * c[k * n + t];
      c[r * n + k] = v / d;
    }
  }
}

// Forward substitution L z = rhs, L from cholesky() above.
inline void forward_solve(const std::vector<double>& c, int n, std::vector<double>& z) {
  for (int r = 0; r < n; ++r) {
    double v = z[r];
    for (int t = 0; t < r; ++t) v -= c[r * n + t] * z[t];
    z[r] = v / c[r * n + r];
  }
}

inline double clamp_corr(double num, double d1, double d2) {
  if (!(d1 > 0.0) || !(d2 > 0.0))
    throw NumericError("conditional variance is not positive");
  double r = num / std::sqrt(d1 * d2);
  return r > 1.0 ? 1.0 : (r < -1.0 ? -1.0 : r);
}

// Schur complement of the block indexed by ws.idx: given the symmetric matrix
// M (p x p, Eigen), computes m_ab - M_{a,idx} M_{idx,idx}^{-1} M_{idx,b} for
// (a,b) in {i,j}^2 and returns corr-style pieces through the out params.
inline void schur_pieces(const Eigen::MatrixXd& m, int i, int j, ParcorrScratch& ws,
                         double& out_ii, double& out_ij, double& out_jj) {
  int n = static_cast<int>(ws.idx.size());
  out_ii = m(i, i);
  out_ij = m(i, j);
  out_jj = m(j, j);
  if (n == 0) return;
  ws.chol.resize(static_cast<std::size_t>(n) * n);
  ws.z1.resize(n);
  ws.z2.resize(n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c <= r; ++c) ws.chol[r * n + c] = m(ws.idx[r], ws.idx[c]);
    ws.z1[r] = m(ws.idx[r], i);
    ws.z2[r] = m(ws.idx[r], j);
  }
  cholesky(ws.chol, n);
  forward_solve(ws.chol, n, ws.z1);
  forward_solve(ws.chol, n, ws.z2);
  for (int r = 0; r < n; ++r) {
    out_ii -= ws.z1[r] * ws.z1[r];
    out_ij -= ws.z1[r] * ws.z2[r];
    out_jj -= ws.z2[r] * ws.z2[r];
  }
}

inline void fill_idx(VertexSet s, std::vector<int>& idx) {
  idx.clear();
  while (s) {
    idx.push_back(std::countr_zero(s));  // 0-based
    s &= s - 1;
  }
}

}  // namespace detail

// Conditional-covariance route: corr(X_i, X_j | X_S) from the Schur
// complement of Sigma_SS inside Sigma. This is algebraically the inversion of
// the Sigma submatrix on S u {i,j}.
inline double parcorr_via_sigma(const GaussianModel& m, int i, int j, VertexSet s,
                                ParcorrScratch& ws) {
  detail::fill_idx(s, ws.idx);
  double sii, sij, sjj;
  detail::schur_pieces(m.sigma, i - 1, j - 1, ws, sii, sij, sjj);
  return detail::clamp_corr(sij, sii, sjj);
}

// Marginalization route: the concentration matrix of the margin on
// Q = S u {i,j} is the Schur complement of K_{Q^c Q^c} in K, and the partial
// correlation is -K^Q_ij / sqrt(K^Q_ii K^Q_jj).
inline double parcorr_via_schur(const GaussianModel& m, int i, int j, VertexSet s,
                                ParcorrScratch& ws) {
  VertexSet all = m.p == kMaxVertices ? ~VertexSet{0} : (vertex_bit(m.p + 1) - 1);
  VertexSet qc = all & ~s & ~vertex_bit(i) & ~vertex_bit(j);
  detail::fill_idx(qc, ws.idx);
  double kii, kij, kjj;
  detail::schur_pieces(m.k, i - 1, j - 1, ws, kii, kij, kjj);
  return detail::clamp_corr(-kij, kii, kjj);
}

// Canonical partial correlation. Both routes compute the same value; the
// dispatch just factors whichever block is smaller (|S| vs |Q^c|).
inline double partial_correlation(const GaussianModel& m, int i, int j, VertexSet s,
                                  ParcorrScratch& ws) {
  if (i < 1 || i > m.p || j < 1 || j > m.p || i == j)
    throw InvalidArgument("partial correlation needs distinct vertices in 1..p");
  if (set_contains(s, i) || set_contains(s, j))
    throw InvalidArgument("conditioning set must not contain i or j");
  int ssize = set_size(s);
  if (ssize <= m.p - 2 - ssize) return parcorr_via_sigma(m, i, j, s, ws);
  return parcorr_via_schur(m, i, j, s, ws);
}

inline double partial_correlation(const GaussianModel& m, int i, int j, VertexSet s) {
  ParcorrScratch ws;
  return partial_correlation(m, i, j, s, ws);
}

inline constexpr double kDefaultZeroThreshold = 1e-12;

struct MinParcorr {
  double value = std::numeric_limits<double>::infinity();
  Triple argmin{};
  bool any = false;  // false when every tested value was a structural zero
};

// Smallest |partial correlation| over the given triples, discarding values
// below the zero threshold as exact zeroes.
template <class TripleRange>
MinParcorr min_abs_parcorr(const GaussianModel& m, const TripleRange& triples,
                           double zero_threshold = kDefaultZeroThreshold) {
  MinParcorr out;
  ParcorrScratch ws;
  for (const Triple& t : triples) {
    double v = std::fabs(partial_correlation(m, t.i, t.j, t.s, ws));
    if (v < zero_threshold) continue;
    if (v < out.value) {
      out.value = v;
      out.argmin = t;
      out.any = true;
    }
  }
  return out;
}

}  // namespace strongfaith
