#pragma once

#include <limits>
#include <string>
#include <vector>

#include "curvbound/common.hpp"

namespace curvbound::spaces {

// Comparison function C_b(t): principal curvature of the geodesic sphere of
// radius t in the space form of curvature b.  Series branch near b = 0.
double cb(double b, double t);

/// Inverse of cb(b, .): the t with cb(b, t) = s, by bisection.
double cb_inverse(double b, double s);

// psi_b and derivatives: 1 - cos(sqrt(b) t) / t^2 / cosh(sqrt(-b) t).
// Satisfies psi'' = C_b * psi' on its domain.
double psi(double b, double t);
double psi_prime(double b, double t);
double psi_second(double b, double t);

enum class Model { euclidean, sphere, hyperbolic };

/// Space form Q_b^n in a global model chart: Cartesian coordinates for
/// b = 0, the round sphere of radius 1/sqrt(b) in R^{n+1} for b > 0, and
/// the hyperboloid sheet <x,x>_L = -1/(-b), x_0 > 0, for b < 0 (Minkowski
/// signature -,+,...,+ with coordinate 0 timelike).
class SpaceForm {
 public:
  static SpaceForm euclidean(int n);
  static SpaceForm with_curvature(double b, int n);

  double curvature() const { return b_; }
  int dim() const { return n_; }
  Model model() const { return model_; }
  int embedding_dim() const;
  /// Model radius 1/sqrt(|b|); meaningless for the flat case.
  double radius() const;
  double injectivity_radius() const;

  /// Canonical base point: origin / rho*e_n / rho*e_0.
  Vec base_point() const;

  double metric_dot(const Vec& u, const Vec& v) const;
  bool on_model(const Vec& x, double tol = 1e-8) const;
  /// Nearest model point (radial rescale / hyperboloid lift).
  Vec project_to_model(const Vec& x) const;
  /// Projection of an embedding vector onto the tangent space at x.
  Vec tangent_project(const Vec& x, const Vec& v) const;
  /// n orthonormal tangent vectors at x (w.r.t. the model metric).
  Mat tangent_basis(const Vec& x) const;

  double distance(const Vec& x, const Vec& o) const;

 private:
  SpaceForm(double b, int n, Model m) : b_(b), n_(n), model_(m) {}
  double b_;
  int n_;
  Model model_;
};

struct RadialDerivatives {
  double r;
  Vec grad;   // embedding vector, tangent at x, unit in the model metric
  Mat basis;  // orthonormal tangent basis at x (embedding x n)
  Mat hess;   // n x n, expressed in `basis`
};

/// Distance to o with analytic gradient and Hessian.  Space forms attain
/// the Hessian comparison with equality, which the returned data exhibits.
RadialDerivatives distance_and_derivatives(const SpaceForm& space,
                                           const Vec& x, const Vec& o);

struct ComparisonReport {
  int checked = 0;
  int skipped = 0;
  double min_eigen_margin = std::numeric_limits<double>::infinity();
  double max_abs_margin = 0.0;  // equality defect
  bool holds(double tol) const { return min_eigen_margin >= -tol; }
};

/// Min eigenvalue of Hess r - C_b(r)(g - dr (x) dr) at every sample,
/// against the comparison bound with curvature `b` (defaults to the
/// space's own curvature).  Out-of-domain samples are skipped.
ComparisonReport hessian_comparison_check(
    const SpaceForm& space, const std::vector<Vec>& samples, double tol,
    const Vec& o, double b = std::numeric_limits<double>::quiet_NaN());

/// Product P x Q with the product metric; Q may have dimension 0.
class ProductSpace {
 public:
  ProductSpace(SpaceForm P, SpaceForm Q, Vec basepoint_o);
  static ProductSpace trivial(SpaceForm P);  // l = 0

  const SpaceForm& P() const { return P_; }
  const SpaceForm& Q() const { return Q_; }
  const Vec& basepoint() const { return o_; }
  int dim() const { return P_.dim() + Q_.dim(); }
  int embedding_dim() const;

  Vec p_part(const Vec& v) const;
  Vec q_part(const Vec& v) const;
  Vec join(const Vec& vp, const Vec& vq) const;

  double metric_dot(const Vec& u, const Vec& v) const;
  Vec project_to_model(const Vec& x) const;
  Vec tangent_project(const Vec& x, const Vec& v) const;
  Mat tangent_basis(const Vec& x) const;

 private:
  SpaceForm P_;
  SpaceForm Q_;
  Vec o_;
};

/// Sectional curvature of the plane spanned by tangent vectors U, V at x.
double sectional_curvature(const SpaceForm& space, const Vec& x, const Vec& U,
                           const Vec& V);
double sectional_curvature(const ProductSpace& space, const Vec& x,
                           const Vec& U, const Vec& V);

struct RadialHeight {
  double h;
  Vec grad;  // ambient gradient (embedding vector, zero Q-component)
};

/// h = psi_b(r(pi_P(x))) with ambient gradient psi'(r) grad^P r.
RadialHeight modified_radial_height(const ProductSpace& N, double b,
                                    const Vec& point);

/// Hess^N h(U, V) for ambient tangent vectors U, V at `point`, expanded
/// through psi'' = C_b psi' and the analytic Hess^P r.
double modified_radial_hessian(const ProductSpace& N, double b,
                               const Vec& point, const Vec& U, const Vec& V);

}  // namespace curvbound::spaces
