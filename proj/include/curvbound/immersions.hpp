#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "curvbound/common.hpp"
#include "curvbound/forms.hpp"
#include "curvbound/grassmann.hpp"
#include "curvbound/spaces.hpp"

namespace curvbound::immersions {

using grassmann::Plane;
using spaces::ProductSpace;
using spaces::SpaceForm;

struct FdConfig {
  double h1 = 1e-5;  // first-derivative step (chart units)
  double h2 = 1e-4;  // second-derivative step
};

/// Chart-based immersion into a model ambient space.  The map sends chart
/// coordinates to embedding coordinates of the ambient product.
class ParametricImmersion {
 public:
  using ChartMap = std::function<Vec(const Vec&)>;

  ParametricImmersion(std::string name, ChartMap map, Mat domain_box,
                      ProductSpace ambient, FdConfig fd = {});

  const std::string& name() const { return name_; }
  const ProductSpace& ambient() const { return ambient_; }
  const FdConfig& fd() const { return fd_; }
  const Mat& domain_box() const { return box_; }  // m x 2 (lo, hi)
  void set_domain_box(const Mat& box);

  int chart_dim() const { return static_cast<int>(box_.rows()); }  // m
  int ambient_p_dim() const { return ambient_.P().dim(); }         // n
  int ambient_q_dim() const { return ambient_.Q().dim(); }         // l
  int codimension() const { return ambient_.dim() - chart_dim(); } // p

  Vec evaluate(const Vec& x) const;
  Mat jacobian(const Vec& x) const;  // embedding_dim x m, central differences

  bool in_domain(const Vec& x, double margin = 0.0) const;
  Vec clamp_to_domain(const Vec& x, double margin) const;
  /// Halton point inside the domain box (index starts at 1).
  Vec domain_sample(std::uint64_t index) const;

 private:
  std::string name_;
  ChartMap map_;
  Mat box_;
  ProductSpace ambient_;
  FdConfig fd_;
};

struct PointFrameData {
  Vec x;                // chart point
  Vec point;            // embedding coordinates of f(x)
  Mat induced_metric;   // m x m
  Mat tangent_frame;    // embedding x m, orthonormal in the ambient metric
  Mat normal_frame;     // embedding x p
  forms::BilinearForm second_fundamental_form;  // domain m, target p
  Vec mean_curvature;   // p components in the normal frame, (1/m) trace
};

/// First and second fundamental forms at x, expressed in orthonormal
/// tangent/normal frames so the forms module applies directly.
PointFrameData fundamental_forms(const ParametricImmersion& f, const Vec& x);

/// K_f(sigma) = K_alpha(sigma), sigma given in the orthonormal tangent
/// frame of the point data.
double extrinsic_curvature(const ParametricImmersion& f, const Vec& x,
                           const Plane& sigma);
double extrinsic_curvature(const ParametricImmersion& f,
                           const PointFrameData& data, const Plane& sigma);

/// K_M(sigma) = K_f(sigma) + K_N(f_* sigma).
double intrinsic_curvature(const ParametricImmersion& f, const Vec& x,
                           const Plane& sigma);
double intrinsic_curvature(const ParametricImmersion& f,
                           const PointFrameData& data, const Plane& sigma);

struct ScalarRicci {
  double scalar;           // average of K over coordinate planes
  Vec ricci_eigenvalues;   // of Ric(X,Y) = sum_a <R(e_a,X)Y,e_a>
};

ScalarRicci scalar_and_ricci(const ParametricImmersion& f, const Vec& x);

struct PullbackRadial {
  double g;
  Vec grad;   // tangent-frame components
  Mat hess;   // m x m in the tangent frame, assembled via the composition
              // formula Hess^N h(f_*X, f_*Y) + <grad h, alpha(X, Y)>
};

PullbackRadial pullback_radial(const ParametricImmersion& f, const Vec& x,
                               double b);

/// Value/gradient/Hessian of an arbitrary chart scalar field in the
/// orthonormal tangent frame, via finite differences of the induced metric
/// (Christoffel correction included).  Independent of pullback_radial's
/// assembled route.
struct FieldDerivatives {
  double value;
  Vec grad_frame;
  Mat hess_frame;
};

FieldDerivatives chart_field_derivatives(
    const ParametricImmersion& f,
    const std::function<double(const Vec&)>& field, const Vec& x);

// Catalog of model immersions.
ParametricImmersion round_sphere(double R, int m);
ParametricImmersion flat_plane(int m);
ParametricImmersion flat_cylinder(double R, double axis_halfwidth = 5.0);
ParametricImmersion geodesic_sphere_cylinder(double b, int m, double R, int l,
                                             double axis_halfwidth = 5.0);
ParametricImmersion clifford_torus(int n);

struct CatalogInfo {
  std::string name;
  bool codimension_ok;  // p < m - l, the min-max hypothesis
};

CatalogInfo catalog_info(const ParametricImmersion& f);
std::vector<std::string> catalog_names();

struct ScanResult {
  double sup_value;
  Vec arg_sup;  // chart point attaining the sampled sup
  std::vector<std::pair<Vec, grassmann::MinMaxResult>> per_point;
};

/// Evaluates the min-max curvature functional at each sample point with the
/// extrinsic (or intrinsic) oracle; the max over samples is the desk-scale
/// surrogate for sup_M.
ScanResult scan_minmax(const ParametricImmersion& f,
                       const std::vector<Vec>& sample_points, int d_threshold,
                       const grassmann::OptimizerConfig& cfg = {},
                       bool intrinsic = false);

/// Low-discrepancy chart samples respecting a boundary margin.
std::vector<Vec> sample_chart(const ParametricImmersion& f, int count,
                              double margin = 0.0);

/// Tabulated-chart immersion: structured grid of ambient coordinates with
/// separable Catmull-Rom spline interpolation.
ParametricImmersion load_tabulated_chart(const std::string& path);
void save_tabulated_chart(const ParametricImmersion& f,
                          const std::vector<int>& shape,
                          const std::string& path);

}  // namespace curvbound::immersions
