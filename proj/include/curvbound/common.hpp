#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace curvbound {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Thrown on malformed inputs (dimension mismatches, bad parameters).
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an evaluation point leaves the validated domain of a formula
/// (cut locus, t out of range for C_b, etc.).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

using Rng = std::mt19937_64;

inline Vec random_unit_vector(int n, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = gauss(rng);
  double nrm = v.norm();
  if (nrm < 1e-300) { v.setZero(); v[0] = 1.0; return v; }
  return v / nrm;
}

// Columns of the result span the same space as the columns of A, pairwise
// orthonormal.  Columns with norm below `pivot_tol` after projection are
// dropped.
inline Mat gram_schmidt(const Mat& A, double pivot_tol = 1e-12) {
  Mat Q(A.rows(), A.cols());
  int k = 0;
  for (int j = 0; j < A.cols(); ++j) {
    Vec v = A.col(j);
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i < k; ++i) v -= Q.col(i).dot(v) * Q.col(i);
    double nrm = v.norm();
    if (nrm > pivot_tol) Q.col(k++) = v / nrm;
  }
  return Q.leftCols(k);
}

// Extends the orthonormal columns of Q to a full orthonormal basis of R^n.
inline Mat orthonormal_completion(const Mat& Q) {
  const int n = static_cast<int>(Q.rows());
  Mat full(n, n);
  full.leftCols(Q.cols()) = Q;
  int k = static_cast<int>(Q.cols());
  for (int j = 0; j < n && k < n; ++j) {
    Vec v = Vec::Unit(n, j);
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i < k; ++i) v -= full.col(i).dot(v) * full.col(i);
    double nrm = v.norm();
    if (nrm > 1e-8) full.col(k++) = v / nrm;
  }
  if (k < n) throw std::runtime_error("orthonormal_completion failed");
  return full;
}

/// Sign-normalized frame: first nonzero entry of each column positive.
/// Used for deterministic tie-breaking among equal-valued optimizers.
inline Mat sign_normalize(Mat F, double tol = 1e-12) {
  for (int j = 0; j < F.cols(); ++j) {
    for (int i = 0; i < F.rows(); ++i) {
      if (std::abs(F(i, j)) > tol) {
        if (F(i, j) < 0) F.col(j) = -F.col(j);
        break;
      }
    }
  }
  return F;
}

inline bool lex_less(const Mat& A, const Mat& B, double tol = 1e-12) {
  for (int j = 0; j < A.cols(); ++j)
    for (int i = 0; i < A.rows(); ++i) {
      double d = A(i, j) - B(i, j);
      if (d < -tol) return true;
      if (d > tol) return false;
    }
  return false;
}

/// Halton low-discrepancy sequence in [0,1)^dim, index starts at 1.
inline Vec halton(std::uint64_t index, int dim) {
  static const int primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                               31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
  if (dim > 20) throw InputError("halton: dim > 20 unsupported");
  Vec out(dim);
  for (int d = 0; d < dim; ++d) {
    const int b = primes[d];
    double f = 1.0, r = 0.0;
    std::uint64_t i = index;
    while (i > 0) {
      f /= b;
      r += f * static_cast<double>(i % b);
      i /= b;
    }
    out[d] = r;
  }
  return out;
}

}  // namespace curvbound
