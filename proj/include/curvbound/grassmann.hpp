#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "curvbound/common.hpp"

namespace curvbound::grassmann {

/// A d-dimensional subspace of R^n, stored as an orthonormal frame
/// (columns of `frame`).  Frames are re-orthonormalized on construction.
class Subspace {
 public:
  Subspace(int ambient_dim, const Mat& frame_columns);

  static Subspace full(int n) { return Subspace(n, Mat::Identity(n, n)); }
  static Subspace span(const Vec& v);
  static Subspace span(const Vec& u, const Vec& v);

  int ambient_dim() const { return n_; }
  int dim() const { return static_cast<int>(frame_.cols()); }
  const Mat& frame() const { return frame_; }

  /// Lifts coordinates in the frame basis to an ambient vector.
  Vec lift(const Vec& coords) const { return frame_ * coords; }

  bool contains(const Vec& v, double tol = 1e-8) const;

 private:
  int n_;
  Mat frame_;
};

/// Two-dimensional subspace; the argument of plane-curvature functionals.
class Plane : public Subspace {
 public:
  Plane(int ambient_dim, const Mat& frame_columns);
  Plane(const Vec& u, const Vec& v);

  Vec basis_x() const { return frame().col(0); }
  Vec basis_y() const { return frame().col(1); }
};

/// Real-valued functional on planes (e.g. a plane-curvature oracle).
using PlaneOracle = std::function<double(const Plane&)>;

struct OptimizerConfig {
  int starts = 64;
  int max_iters = 200;
  double step0 = 0.3;
  double fd_step = 1e-6;
  double obj_tol = 1e-8;
  std::uint64_t seed = 0;
};

struct MinMaxResult {
  double value = 0.0;
  Subspace argmin_subspace;
  Plane argmax_plane;
  std::vector<std::pair<Subspace, double>> inner_max_trace;
  long budget_used = 0;
};

std::vector<Subspace> sample_subspaces(int n, int d, int count,
                                       std::uint64_t seed);

/// Maximum of `evaluate` over planes contained in W, by multi-start
/// geodesic refinement on G_2(W).
std::pair<double, Plane> max_over_planes(const PlaneOracle& evaluate,
                                         const Subspace& W,
                                         const OptimizerConfig& cfg = {});

/// min over W with dim W = d_threshold+1 of max over planes sigma in W.
/// Fixing the dimension is justified by monotonicity of the inner max in W.
MinMaxResult minmax_functional(const PlaneOracle& evaluate, int n,
                               int d_threshold,
                               const OptimizerConfig& cfg = {});

/// Exhaustive angular-grid oracle for the same functional.  Test oracle
/// only; refuses n > 4.
double brute_force_minmax(const PlaneOracle& evaluate, int n, int d_threshold,
                          double grid_resolution = 1e-2);

/// Grid of (approximately) uniformly spread unit vectors in R^dim at the
/// given angular resolution.  Antipodes are not deduplicated.
std::vector<Vec> sphere_grid(int dim, double resolution);

}  // namespace curvbound::grassmann
