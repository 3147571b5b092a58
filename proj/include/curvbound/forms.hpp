#pragma once

#include <optional>
#include <vector>

#include "curvbound/common.hpp"
#include "curvbound/grassmann.hpp"

namespace curvbound::forms {

using grassmann::OptimizerConfig;
using grassmann::Plane;
using grassmann::Subspace;

/// Vector-valued symmetric bilinear form alpha: R^n x R^n -> R^p, stored as
/// p symmetric n x n coefficient matrices in orthonormal bases.  p = 0 is
/// legal and means alpha == 0.
class BilinearForm {
 public:
  BilinearForm(int n, std::vector<Mat> coefficients);

  static BilinearForm zero(int n, int p);
  static BilinearForm umbilic(int n, double c);  // p = 1, A_1 = c*I
  static BilinearForm diagonal(const Vec& d);    // p = 1, A_1 = diag(d)

  int dim_domain() const { return n_; }
  int dim_target() const { return static_cast<int>(coeffs_.size()); }
  const Mat& coefficient(int k) const { return coeffs_[k]; }
  const std::vector<Mat>& coefficients() const { return coeffs_; }

  /// alpha(X, Y) as a vector in R^p.
  Vec apply(const Vec& X, const Vec& Y) const;
  double diagonal_norm(const Vec& X) const { return apply(X, X).norm(); }

 private:
  int n_;
  std::vector<Mat> coeffs_;
};

/// K_alpha(X, Y) = <alpha(X,X), alpha(Y,Y)> - ||alpha(X,Y)||^2.
double curvature_pair(const BilinearForm& alpha, const Vec& X, const Vec& Y);

/// K_alpha(sigma) = K_alpha(X, Y) / ||X ^ Y||^2 for any basis {X, Y} of
/// sigma.  Basis independent.
double curvature_plane(const BilinearForm& alpha, const Plane& sigma);

struct MinDiagonalResult {
  double value;
  Vec argmin;  // unit vector in the ambient space
};

/// min of ||alpha(X,X)|| over unit X in S, by multi-start projected-gradient
/// refinement on the unit sphere of S.
MinDiagonalResult min_diagonal_norm(const BilinearForm& alpha,
                                    const Subspace& S,
                                    const OptimizerConfig& cfg = {});

/// X with ||alpha(X,X)|| <= tol, if the minimizer search finds one.
std::optional<Vec> find_asymptotic_vector(const BilinearForm& alpha,
                                          const Subspace& S, double tol,
                                          const OptimizerConfig& cfg = {});

struct OtsukiReport {
  double lambda = 0.0;
  std::optional<Plane> condition_i_violated_witness;  // K_alpha(sigma) > lambda
  std::optional<Vec> condition_ii_violated_witness;   // ||a(X,X)|| <= sqrt(l)
  double best_plane_value = 0.0;     // max K_alpha found
  double best_diagonal_norm = 0.0;   // min ||alpha(X,X)|| found
  bool consistent = true;
};

/// Searches for violations of the two conditions of the p >= n lemma.
/// When p < n at least one witness must exist; failure to find one is an
/// optimizer failure and is flagged via consistent = false, never treated
/// as a counterexample.
OtsukiReport check_otsuki(const BilinearForm& alpha, double lambda,
                          const OptimizerConfig& cfg = {});

/// dim span{alpha(X, Y)}: numerical rank of the p x n(n+1)/2 matrix of
/// values alpha(e_i, e_j), i <= j.  rank_tol is relative to the largest
/// singular value.
int algebraic_codimension(const BilinearForm& alpha, double rank_tol = 1e-8);

/// Restriction to S in S's orthonormal frame: coefficients F^T A_k F.
BilinearForm restrict_form(const BilinearForm& alpha, const Subspace& S);

/// Seed-deterministic random symmetric form, entries ~ N(0, scale^2).
BilinearForm random_form(int n, int p, std::uint64_t seed, double scale = 1.0);

}  // namespace curvbound::forms
