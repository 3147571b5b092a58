#include "curvbound/immersions.hpp"

#include <array>
#include <cmath>
#include <fstream>

#include "curvbound/json_io.hpp"

namespace curvbound::immersions {

ParametricImmersion::ParametricImmersion(std::string name, ChartMap map,
                                         Mat domain_box, ProductSpace ambient,
                                         FdConfig fd)
    : name_(std::move(name)),
      map_(std::move(map)),
      box_(std::move(domain_box)),
      ambient_(std::move(ambient)),
      fd_(fd) {
  if (box_.cols() != 2) throw InputError("ParametricImmersion: box must be m x 2");
  for (int i = 0; i < box_.rows(); ++i)
    if (box_(i, 0) >= box_(i, 1))
      throw InputError("ParametricImmersion: empty domain box");
  if (codimension() < 0)
    throw InputError("ParametricImmersion: chart dim exceeds ambient dim");
}

void ParametricImmersion::set_domain_box(const Mat& box) {
  if (box.rows() != box_.rows() || box.cols() != 2)
    throw InputError("set_domain_box: shape mismatch");
  box_ = box;
}

Vec ParametricImmersion::evaluate(const Vec& x) const {
  if (x.size() != chart_dim())
    throw InputError("ParametricImmersion::evaluate: wrong chart dimension");
  return map_(x);
}

Mat ParametricImmersion::jacobian(const Vec& x) const {
  const int m = chart_dim();
  Mat J(ambient_.embedding_dim(), m);
  for (int i = 0; i < m; ++i) {
    Vec xp = x, xm = x;
    xp[i] += fd_.h1;
    xm[i] -= fd_.h1;
    J.col(i) = (map_(xp) - map_(xm)) / (2 * fd_.h1);
  }
  return J;
}

bool ParametricImmersion::in_domain(const Vec& x, double margin) const {
  for (int i = 0; i < chart_dim(); ++i)
    if (x[i] < box_(i, 0) + margin || x[i] > box_(i, 1) - margin) return false;
  return true;
}

Vec ParametricImmersion::clamp_to_domain(const Vec& x, double margin) const {
  Vec y = x;
  for (int i = 0; i < chart_dim(); ++i)
    y[i] = std::clamp(y[i], box_(i, 0) + margin, box_(i, 1) - margin);
  return y;
}

Vec ParametricImmersion::domain_sample(std::uint64_t index) const {
  Vec u = halton(index, chart_dim());
  Vec x(chart_dim());
  for (int i = 0; i < chart_dim(); ++i)
    x[i] = box_(i, 0) + u[i] * (box_(i, 1) - box_(i, 0));
  return x;
}

std::vector<Vec> sample_chart(const ParametricImmersion& f, int count,
                              double margin) {
  std::vector<Vec> pts;
  pts.reserve(count);
  std::uint64_t idx = 1;
  while (static_cast<int>(pts.size()) < count) {
    Vec x = f.clamp_to_domain(f.domain_sample(idx++), margin);
    pts.push_back(x);
  }
  return pts;
}

PointFrameData fundamental_forms(const ParametricImmersion& f, const Vec& x) {
  const int m = f.chart_dim();
  const auto& N = f.ambient();
  const double h2 = f.fd().h2;
  if (!f.in_domain(x, 2 * h2))
    throw InputError("fundamental_forms: point too close to the chart boundary");

  PointFrameData out{x,
                     f.evaluate(x),
                     Mat(),
                     Mat(),
                     Mat(),
                     forms::BilinearForm::zero(m, 0),
                     Vec()};
  Mat J = f.jacobian(x);

  Mat G(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) G(i, j) = G(j, i) = N.metric_dot(J.col(i), J.col(j));
  out.induced_metric = G;

  Eigen::SelfAdjointEigenSolver<Mat> es(G);
  if (es.eigenvalues().minCoeff() < 1e-10 * std::max(1.0, es.eigenvalues().maxCoeff()))
    throw DomainError("fundamental_forms: rank-deficient Jacobian (immersion violated)");
  Eigen::LLT<Mat> llt(G);
  Mat L = llt.matrixL();
  Mat Linv = L.inverse();

  // Orthonormal tangent frame E = J L^{-T}.
  Mat E = J * Linv.transpose();
  out.tangent_frame = E;

  // Normal frame: ambient tangent directions minus their tangential parts.
  const int p = f.codimension();
  Mat Bamb = N.tangent_basis(out.point);
  Mat Nor(N.embedding_dim(), p);
  int k = 0;
  for (int j = 0; j < Bamb.cols() && k < p; ++j) {
    Vec v = Bamb.col(j);
    for (int pass = 0; pass < 2; ++pass) {
      for (int a = 0; a < m; ++a) v -= N.metric_dot(E.col(a), v) * E.col(a);
      for (int a = 0; a < k; ++a) v -= N.metric_dot(Nor.col(a), v) * Nor.col(a);
    }
    double nn = N.metric_dot(v, v);
    if (nn > 1e-16) Nor.col(k++) = v / std::sqrt(nn);
  }
  if (k < p) throw DomainError("fundamental_forms: could not build normal frame");
  out.normal_frame = Nor;

  // Second chart derivatives of the map.
  std::vector<std::vector<Vec>> D2(m, std::vector<Vec>(m));
  Vec f0 = out.point;
  for (int i = 0; i < m; ++i) {
    Vec xp = x, xm = x;
    xp[i] += h2;
    xm[i] -= h2;
    D2[i][i] = (f.evaluate(xp) - 2 * f0 + f.evaluate(xm)) / (h2 * h2);
  }
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      Vec xpp = x, xpm = x, xmp = x, xmm = x;
      xpp[i] += h2; xpp[j] += h2;
      xpm[i] += h2; xpm[j] -= h2;
      xmp[i] -= h2; xmp[j] += h2;
      xmm[i] -= h2; xmm[j] -= h2;
      D2[i][j] = D2[j][i] = (f.evaluate(xpp) - f.evaluate(xpm) -
                             f.evaluate(xmp) + f.evaluate(xmm)) /
                            (4 * h2 * h2);
    }

  // alpha in chart coordinates: normal components of the ambient covariant
  // second derivative.  The normal frame lies in T_fN, so components along
  // the model embedding's own normal drop out automatically.
  std::vector<Mat> chart_coeffs(p, Mat(m, m));
  for (int t = 0; t < p; ++t)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        chart_coeffs[t](i, j) = N.metric_dot(D2[i][j], Nor.col(t));

  // Congruence into the orthonormal frame.
  std::vector<Mat> frame_coeffs;
  frame_coeffs.reserve(p);
  for (int t = 0; t < p; ++t)
    frame_coeffs.push_back(Linv * chart_coeffs[t] * Linv.transpose());
  out.second_fundamental_form = forms::BilinearForm(m, std::move(frame_coeffs));

  Vec H(p);
  for (int t = 0; t < p; ++t)
    H[t] = out.second_fundamental_form.coefficient(t).trace() / m;
  out.mean_curvature = H;
  return out;
}

double extrinsic_curvature(const ParametricImmersion& f,
                           const PointFrameData& data, const Plane& sigma) {
  (void)f;
  return forms::curvature_plane(data.second_fundamental_form, sigma);
}

double extrinsic_curvature(const ParametricImmersion& f, const Vec& x,
                           const Plane& sigma) {
  return extrinsic_curvature(f, fundamental_forms(f, x), sigma);
}

double intrinsic_curvature(const ParametricImmersion& f,
                           const PointFrameData& data, const Plane& sigma) {
  Vec U = data.tangent_frame * sigma.basis_x();
  Vec V = data.tangent_frame * sigma.basis_y();
  double kn = spaces::sectional_curvature(f.ambient(), data.point, U, V);
  return extrinsic_curvature(f, data, sigma) + kn;
}

double intrinsic_curvature(const ParametricImmersion& f, const Vec& x,
                           const Plane& sigma) {
  return intrinsic_curvature(f, fundamental_forms(f, x), sigma);
}

namespace {

// Curvature 4-tensor of M in the orthonormal frame, via the Gauss equation
// against the analytic ambient tensor.
struct GaussTensor {
  int m;
  double bP, bQ;
  Mat pd, qd;              // factor inner products of frame vectors
  std::vector<Mat> A;      // second fundamental form coefficients

  double ambient4(int i, int j, int k, int l) const {
    double v = bP * (pd(i, l) * pd(j, k) - pd(i, k) * pd(j, l));
    if (qd.size() > 0)
      v += bQ * (qd(i, l) * qd(j, k) - qd(i, k) * qd(j, l));
    return v;
  }
  double alpha_dot(int i, int j, int k, int l) const {
    double s = 0;
    for (const auto& At : A) s += At(i, j) * At(k, l);
    return s;
  }
  double riemann(int i, int j, int k, int l) const {
    return ambient4(i, j, k, l) + alpha_dot(i, l, j, k) - alpha_dot(i, k, j, l);
  }
};

GaussTensor gauss_tensor(const ParametricImmersion& f,
                         const PointFrameData& d) {
  const auto& N = f.ambient();
  const int m = f.chart_dim();
  GaussTensor g;
  g.m = m;
  g.bP = N.P().curvature();
  g.bQ = N.Q().curvature();
  g.pd = Mat(m, m);
  g.qd = N.Q().dim() > 0 ? Mat(m, m) : Mat();
  for (int a = 0; a < m; ++a)
    for (int b = a; b < m; ++b) {
      Vec Ea = d.tangent_frame.col(a), Eb = d.tangent_frame.col(b);
      g.pd(a, b) = g.pd(b, a) = N.P().metric_dot(N.p_part(Ea), N.p_part(Eb));
      if (N.Q().dim() > 0)
        g.qd(a, b) = g.qd(b, a) =
            N.Q().metric_dot(N.q_part(Ea), N.q_part(Eb));
    }
  g.A = d.second_fundamental_form.coefficients();
  return g;
}

}  // namespace

ScalarRicci scalar_and_ricci(const ParametricImmersion& f, const Vec& x) {
  const int m = f.chart_dim();
  PointFrameData d = fundamental_forms(f, x);
  if (m < 2) return {0.0, Vec::Zero(std::max(1, m))};
  GaussTensor g = gauss_tensor(f, d);

  double s = 0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (i != j) s += g.riemann(i, j, j, i);
  s /= m * (m - 1);

  Mat ric = Mat::Zero(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c) ric(a, b) += g.riemann(c, a, b, c);
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (ric + ric.transpose()));
  return {s, es.eigenvalues()};
}

PullbackRadial pullback_radial(const ParametricImmersion& f, const Vec& x,
                               double b) {
  const auto& N = f.ambient();
  const int m = f.chart_dim();
  PointFrameData d = fundamental_forms(f, x);
  spaces::RadialHeight rh = spaces::modified_radial_height(N, b, d.point);

  PullbackRadial out;
  out.g = rh.h;
  out.grad = Vec(m);
  for (int a = 0; a < m; ++a)
    out.grad[a] = N.metric_dot(rh.grad, d.tangent_frame.col(a));

  out.hess = Mat(m, m);
  const auto& A = d.second_fundamental_form.coefficients();
  const int p = f.codimension();
  Vec grad_dot_normal(p);
  for (int t = 0; t < p; ++t)
    grad_dot_normal[t] = N.metric_dot(rh.grad, d.normal_frame.col(t));
  for (int a = 0; a < m; ++a)
    for (int bb = a; bb < m; ++bb) {
      double v = spaces::modified_radial_hessian(
          N, b, d.point, d.tangent_frame.col(a), d.tangent_frame.col(bb));
      for (int t = 0; t < p; ++t) v += grad_dot_normal[t] * A[t](a, bb);
      out.hess(a, bb) = out.hess(bb, a) = v;
    }
  return out;
}

FieldDerivatives chart_field_derivatives(
    const ParametricImmersion& f,
    const std::function<double(const Vec&)>& field, const Vec& x) {
  const int m = f.chart_dim();
  const auto& N = f.ambient();
  const double h1 = f.fd().h1;
  const double h2 = f.fd().h2;

  auto metric_at = [&](const Vec& y) {
    Mat J = f.jacobian(y);
    Mat G(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j)
        G(i, j) = G(j, i) = N.metric_dot(J.col(i), J.col(j));
    return G;
  };

  Mat G = metric_at(x);
  Mat Ginv = G.inverse();

  // dG[k] = partial_k G, central differences.
  std::vector<Mat> dG(m);
  for (int k = 0; k < m; ++k) {
    Vec xp = x, xm = x;
    xp[k] += h2;
    xm[k] -= h2;
    dG[k] = (metric_at(xp) - metric_at(xm)) / (2 * h2);
  }

  Vec dg(m);
  for (int i = 0; i < m; ++i) {
    Vec xp = x, xm = x;
    xp[i] += h1;
    xm[i] -= h1;
    dg[i] = (field(xp) - field(xm)) / (2 * h1);
  }

  Mat d2g(m, m);
  double g0 = field(x);
  for (int i = 0; i < m; ++i) {
    Vec xp = x, xm = x;
    xp[i] += h2;
    xm[i] -= h2;
    d2g(i, i) = (field(xp) - 2 * g0 + field(xm)) / (h2 * h2);
  }
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      Vec xpp = x, xpm = x, xmp = x, xmm = x;
      xpp[i] += h2; xpp[j] += h2;
      xpm[i] += h2; xpm[j] -= h2;
      xmp[i] -= h2; xmp[j] += h2;
      xmm[i] -= h2; xmm[j] -= h2;
      d2g(i, j) = d2g(j, i) =
          (field(xpp) - field(xpm) - field(xmp) + field(xmm)) / (4 * h2 * h2);
    }

  // Covariant Hessian in chart coordinates.
  Mat hess_chart(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double corr = 0;
      for (int k = 0; k < m; ++k) {
        double gamma = 0;
        for (int l = 0; l < m; ++l)
          gamma += 0.5 * Ginv(k, l) *
                   (dG[i](j, l) + dG[j](i, l) - dG[l](i, j));
        corr += gamma * dg[k];
      }
      hess_chart(i, j) = d2g(i, j) - corr;
    }

  Eigen::LLT<Mat> llt(G);
  Mat Linv = Mat(llt.matrixL()).inverse();
  FieldDerivatives out;
  out.value = g0;
  out.grad_frame = Linv * dg;
  out.hess_frame = Linv * hess_chart * Linv.transpose();
  return out;
}

// ---------------------------------------------------------------------------
// Catalog

namespace {

// Point on the unit sphere S^{d} in R^{d+1} from d spherical angles.
Vec unit_sphere_point(const Vec& angles) {
  const int d = static_cast<int>(angles.size());
  Vec u(d + 1);
  double s = 1.0;
  for (int i = 0; i < d; ++i) {
    u[i] = s * std::cos(angles[i]);
    s *= std::sin(angles[i]);
  }
  u[d] = s;
  return u;
}

Mat angle_box(int count, bool last_full_circle) {
  Mat box(count, 2);
  for (int i = 0; i < count; ++i) {
    if (i + 1 == count && last_full_circle) {
      box(i, 0) = 0.1;
      box(i, 1) = 2 * M_PI - 0.1;
    } else {
      box(i, 0) = 0.15;
      box(i, 1) = M_PI - 0.15;
    }
  }
  return box;
}

Mat vstack_boxes(const Mat& a, const Mat& b) {
  Mat out(a.rows() + b.rows(), 2);
  out.topRows(a.rows()) = a;
  out.bottomRows(b.rows()) = b;
  return out;
}

}  // namespace

ParametricImmersion round_sphere(double R, int m) {
  if (R <= 0) throw InputError("round_sphere: R must be positive");
  if (m < 2) throw InputError("round_sphere: m must be >= 2");
  auto ambient = ProductSpace::trivial(SpaceForm::euclidean(m + 1));
  auto map = [R, m](const Vec& ang) { return Vec(R * unit_sphere_point(ang)); };
  return ParametricImmersion("round_sphere", map, angle_box(m, true), ambient);
}

ParametricImmersion flat_plane(int m) {
  if (m < 1) throw InputError("flat_plane: m must be >= 1");
  auto ambient = ProductSpace::trivial(SpaceForm::euclidean(m + 1));
  auto map = [m](const Vec& x) {
    Vec y = Vec::Zero(m + 1);
    y.head(m) = x;
    return y;
  };
  Mat box(m, 2);
  for (int i = 0; i < m; ++i) {
    box(i, 0) = -2.0;
    box(i, 1) = 2.0;
  }
  return ParametricImmersion("flat_plane", map, box, ambient);
}

ParametricImmersion flat_cylinder(double R, double axis_halfwidth) {
  if (R <= 0) throw InputError("flat_cylinder: R must be positive");
  ProductSpace ambient(SpaceForm::euclidean(2), SpaceForm::euclidean(1),
                       Vec::Zero(2));
  auto map = [R](const Vec& x) {
    Vec y(3);
    y << R * std::cos(x[0]), R * std::sin(x[0]), x[1];
    return y;
  };
  Mat box(2, 2);
  box << 0.1, 2 * M_PI - 0.1, -axis_halfwidth, axis_halfwidth;
  return ParametricImmersion("flat_cylinder", map, box, ambient);
}

ParametricImmersion geodesic_sphere_cylinder(double b, int m, double R, int l,
                                             double axis_halfwidth) {
  if (m < 3) throw InputError("geodesic_sphere_cylinder: requires m >= 3");
  if (l < 0) throw InputError("geodesic_sphere_cylinder: l must be >= 0");
  if (R <= 0) throw InputError("geodesic_sphere_cylinder: R must be positive");
  if (b > 0 && R >= M_PI / (2 * std::sqrt(b)))
    throw InputError("geodesic_sphere_cylinder: violates R < pi/(2 sqrt(b))");

  SpaceForm P = b == 0 ? SpaceForm::euclidean(m) : SpaceForm::with_curvature(b, m);
  SpaceForm Q = SpaceForm::euclidean(l);
  Vec o = P.base_point();
  ProductSpace ambient(P, Q, o);

  const int d = m - 1;  // sphere angles
  auto map = [P, o, b, m, R, l, d](const Vec& x) {
    Vec u = unit_sphere_point(x.head(d));
    Vec y;
    if (b == 0) {
      y = R * u;
    } else if (b > 0) {
      const double rho = P.radius();
      Vec ut = Vec::Zero(m + 1);
      ut.head(m) = u;  // unit, orthogonal to o = rho e_m
      y = std::cos(R / rho) * o + rho * std::sin(R / rho) * ut;
    } else {
      const double rho = P.radius();
      Vec ut = Vec::Zero(m + 1);
      ut.tail(m) = u;  // spacelike unit, orthogonal to o = rho e_0
      y = std::cosh(R / rho) * o + rho * std::sinh(R / rho) * ut;
    }
    Vec out(y.size() + l);
    out.head(y.size()) = y;
    out.tail(l) = x.tail(l);
    return out;
  };

  Mat box = angle_box(d, true);
  if (l > 0) {
    Mat zbox(l, 2);
    for (int i = 0; i < l; ++i) {
      zbox(i, 0) = -axis_halfwidth;
      zbox(i, 1) = axis_halfwidth;
    }
    box = vstack_boxes(box, zbox);
  }
  return ParametricImmersion("geodesic_sphere_cylinder", map, box, ambient);
}

ParametricImmersion clifford_torus(int n) {
  if (n < 2) throw InputError("clifford_torus: n must be >= 2");
  auto ambient = ProductSpace::trivial(SpaceForm::with_curvature(1.0, 2 * n - 1));
  const double c = 1.0 / std::sqrt(static_cast<double>(n));
  auto map = [n, c](const Vec& ang) {
    Vec y(2 * n);
    for (int i = 0; i < n; ++i) {
      y[2 * i] = c * std::cos(ang[i]);
      y[2 * i + 1] = c * std::sin(ang[i]);
    }
    return y;
  };
  Mat box(n, 2);
  for (int i = 0; i < n; ++i) {
    box(i, 0) = 0.1;
    box(i, 1) = 2 * M_PI - 0.1;
  }
  return ParametricImmersion("clifford_torus", map, box, ambient);
}

CatalogInfo catalog_info(const ParametricImmersion& f) {
  return {f.name(), f.codimension() < f.chart_dim() - f.ambient_q_dim()};
}

std::vector<std::string> catalog_names() {
  return {"round_sphere", "flat_plane", "flat_cylinder",
          "geodesic_sphere_cylinder", "clifford_torus"};
}

ScanResult scan_minmax(const ParametricImmersion& f,
                       const std::vector<Vec>& sample_points, int d_threshold,
                       const grassmann::OptimizerConfig& cfg, bool intrinsic) {
  const int m = f.chart_dim();
  if (d_threshold + 1 > m)
    throw InputError(
        "scan_minmax: d_threshold + 1 > chart dim (codimension hypothesis "
        "p < m - l violated, constraint set empty)");

  ScanResult out{-std::numeric_limits<double>::infinity(), Vec(), {}};
  for (const auto& x : sample_points) {
    PointFrameData d = fundamental_forms(f, x);
    grassmann::PlaneOracle oracle = [&](const Plane& sigma) {
      return intrinsic ? intrinsic_curvature(f, d, sigma)
                       : extrinsic_curvature(f, d, sigma);
    };
    auto r = grassmann::minmax_functional(oracle, m, d_threshold, cfg);
    if (r.value > out.sup_value) {
      out.sup_value = r.value;
      out.arg_sup = x;
    }
    out.per_point.emplace_back(x, std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tabulated charts

namespace {

std::array<double, 4> catmull_rom_weights(double u) {
  const double u2 = u * u, u3 = u2 * u;
  return {-0.5 * u3 + u2 - 0.5 * u, 1.5 * u3 - 2.5 * u2 + 1.0,
          -1.5 * u3 + 2.0 * u2 + 0.5 * u, 0.5 * u3 - 0.5 * u2};
}

struct TabulatedChart {
  std::vector<int> shape;
  Vec lo, hi;
  Mat values;  // (grid points) x embedding_dim, row-major over the grid

  Vec evaluate(const Vec& x) const {
    const int m = static_cast<int>(shape.size());
    std::vector<int> base(m);
    std::vector<std::array<double, 4>> w(m);
    for (int d = 0; d < m; ++d) {
      double t = (x[d] - lo[d]) / (hi[d] - lo[d]) * (shape[d] - 1);
      int i = std::clamp(static_cast<int>(std::floor(t)), 0, shape[d] - 2);
      base[d] = i;
      w[d] = catmull_rom_weights(t - i);
    }
    Vec out = Vec::Zero(values.cols());
    std::vector<int> offs(m, 0);
    // Tensor product over the 4^m stencil, indices clamped at edges.
    const int total = 1 << (2 * m);  // 4^m
    for (int s = 0; s < total; ++s) {
      int ss = s;
      double weight = 1.0;
      long row = 0;
      for (int d = 0; d < m; ++d) {
        int od = ss & 3;
        ss >>= 2;
        weight *= w[d][od];
        int idx = std::clamp(base[d] + od - 1, 0, shape[d] - 1);
        row = row * shape[d] + idx;
      }
      out += weight * values.row(row).transpose();
    }
    return out;
  }
};

}  // namespace

void save_tabulated_chart(const ParametricImmersion& f,
                          const std::vector<int>& shape,
                          const std::string& path) {
  const int m = f.chart_dim();
  if (static_cast<int>(shape.size()) != m)
    throw InputError("save_tabulated_chart: shape rank mismatch");
  long total = 1;
  for (int s : shape) {
    if (s < 4) throw InputError("save_tabulated_chart: need >= 4 points per axis");
    total *= s;
  }
  json j;
  j["version"] = 1;
  j["m"] = m;
  j["ambient"] = spaces_io::to_json(f.ambient());
  j["shape"] = shape;
  json lo = json::array(), hi = json::array();
  for (int i = 0; i < m; ++i) {
    lo.push_back(f.domain_box()(i, 0));
    hi.push_back(f.domain_box()(i, 1));
  }
  j["lo"] = lo;
  j["hi"] = hi;
  json vals = json::array();
  std::vector<int> idx(m, 0);
  for (long row = 0; row < total; ++row) {
    Vec x(m);
    long rr = row;
    for (int d = m - 1; d >= 0; --d) {
      int id = rr % shape[d];
      rr /= shape[d];
      x[d] = f.domain_box()(d, 0) +
             (f.domain_box()(d, 1) - f.domain_box()(d, 0)) * id / (shape[d] - 1);
    }
    Vec y = f.evaluate(x);
    for (int c = 0; c < y.size(); ++c) vals.push_back(y[c]);
  }
  j["values"] = vals;
  std::ofstream out(path);
  if (!out) throw InputError("save_tabulated_chart: cannot open " + path);
  out << j.dump();
}

ParametricImmersion load_tabulated_chart(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("load_tabulated_chart: cannot open " + path);
  json j;
  in >> j;
  auto ambient = spaces_io::product_from_json(j.at("ambient"));
  const int m = j.at("m").get<int>();

  auto chart = std::make_shared<TabulatedChart>();
  chart->shape = j.at("shape").get<std::vector<int>>();
  chart->lo = vec_from_json(j.at("lo"));
  chart->hi = vec_from_json(j.at("hi"));
  long total = 1;
  for (int s : chart->shape) total *= s;
  const int edim = ambient.embedding_dim();
  const auto& vals = j.at("values");
  if (static_cast<long>(vals.size()) != total * edim)
    throw InputError("load_tabulated_chart: value count mismatch");
  chart->values = Mat(total, edim);
  for (long r = 0; r < total; ++r)
    for (int c = 0; c < edim; ++c)
      chart->values(r, c) = vals[r * edim + c].get<double>();

  Mat box(m, 2);
  for (int i = 0; i < m; ++i) {
    box(i, 0) = chart->lo[i];
    box(i, 1) = chart->hi[i];
  }
  ProductSpace amb = ambient;
  auto map = [chart, amb](const Vec& x) {
    return amb.project_to_model(chart->evaluate(x));
  };
  return ParametricImmersion("tabulated:" + path, map, box, ambient);
}

}  // namespace curvbound::immersions
