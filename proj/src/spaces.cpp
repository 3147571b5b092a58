#include "curvbound/spaces.hpp"

#include <cmath>

namespace curvbound::spaces {

namespace {

void check_cb_domain(double b, double t) {
  if (t <= 0) throw DomainError("cb/psi: t <= 0");
  if (b > 0 && t >= M_PI / (2 * std::sqrt(b)))
    throw DomainError("cb/psi: t >= pi/(2 sqrt(b))");
}

constexpr double kSeriesThreshold = 1e-8;  // on |b| t^2

}  // namespace

double cb(double b, double t) {
  check_cb_domain(b, t);
  const double u = b * t * t;
  if (std::abs(u) < kSeriesThreshold) {
    // sqrt(b) cot(sqrt(b) t) = 1/t - b t/3 - b^2 t^3/45 - ...
    return 1.0 / t - b * t / 3.0 - b * b * t * t * t / 45.0;
  }
  if (b > 0) {
    const double s = std::sqrt(b);
    return s / std::tan(s * t);
  }
  const double s = std::sqrt(-b);
  return s / std::tanh(s * t);
}

double cb_inverse(double b, double s) {
  const double floor_value = b < 0 ? std::sqrt(-b) : 0.0;
  if (s <= floor_value)
    throw DomainError("cb_inverse: s out of range (cylindrically unbounded branch)");
  double lo = 1e-300;
  double hi;
  if (b > 0) {
    hi = M_PI / (2 * std::sqrt(b)) * (1 - 1e-15);
    if (cb(b, hi) > s) return hi;
  } else {
    hi = 1.0;
    while (cb(b, hi) > s) hi *= 2.0;
  }
  // cb is strictly decreasing; plain bisection to machine precision.
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (cb(b, mid) > s)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-15 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

double psi(double b, double t) {
  check_cb_domain(b, t);
  if (b > 0) {
    const double x = std::sqrt(b) * t;
    double sn = std::sin(0.5 * x);
    return 2.0 * sn * sn;  // 1 - cos(x) without cancellation
  }
  if (b == 0) return t * t;
  return std::cosh(std::sqrt(-b) * t);
}

double psi_prime(double b, double t) {
  check_cb_domain(b, t);
  if (b > 0) {
    const double s = std::sqrt(b);
    return s * std::sin(s * t);
  }
  if (b == 0) return 2.0 * t;
  const double s = std::sqrt(-b);
  return s * std::sinh(s * t);
}

double psi_second(double b, double t) {
  check_cb_domain(b, t);
  if (b > 0) return b * std::cos(std::sqrt(b) * t);
  if (b == 0) return 2.0;
  return -b * std::cosh(std::sqrt(-b) * t);
}

SpaceForm SpaceForm::euclidean(int n) {
  if (n < 0) throw InputError("SpaceForm: n < 0");
  return SpaceForm(0.0, n, Model::euclidean);
}

SpaceForm SpaceForm::with_curvature(double b, int n) {
  if (n < 1) throw InputError("SpaceForm: n < 1");
  if (b > 0) return SpaceForm(b, n, Model::sphere);
  if (b < 0) return SpaceForm(b, n, Model::hyperbolic);
  return SpaceForm(0.0, n, Model::euclidean);
}

int SpaceForm::embedding_dim() const {
  return model_ == Model::euclidean ? n_ : n_ + 1;
}

double SpaceForm::radius() const {
  if (model_ == Model::euclidean) return 0.0;
  return 1.0 / std::sqrt(std::abs(b_));
}

double SpaceForm::injectivity_radius() const {
  if (model_ == Model::sphere) return M_PI / std::sqrt(b_);
  return std::numeric_limits<double>::infinity();
}

Vec SpaceForm::base_point() const {
  Vec o = Vec::Zero(embedding_dim());
  if (model_ == Model::sphere) o[n_] = radius();
  if (model_ == Model::hyperbolic) o[0] = radius();
  return o;
}

double SpaceForm::metric_dot(const Vec& u, const Vec& v) const {
  if (model_ == Model::hyperbolic)
    return -u[0] * v[0] + u.tail(n_).dot(v.tail(n_));
  return u.dot(v);
}

bool SpaceForm::on_model(const Vec& x, double tol) const {
  if (x.size() != embedding_dim()) return false;
  if (model_ == Model::euclidean) return true;
  const double rho2 = radius() * radius();
  if (model_ == Model::sphere) return std::abs(x.squaredNorm() - rho2) <= tol * rho2;
  return std::abs(metric_dot(x, x) + rho2) <= tol * rho2 && x[0] > 0;
}

Vec SpaceForm::project_to_model(const Vec& x) const {
  if (model_ == Model::euclidean) return x;
  const double rho = radius();
  if (model_ == Model::sphere) {
    double nrm = x.norm();
    if (nrm < 1e-300) throw DomainError("project_to_model: zero vector");
    return x * (rho / nrm);
  }
  Vec y = x;
  y[0] = std::sqrt(rho * rho + x.tail(n_).squaredNorm());
  return y;
}

Vec SpaceForm::tangent_project(const Vec& x, const Vec& v) const {
  if (model_ == Model::euclidean) return v;
  const double rho2 = radius() * radius();
  if (model_ == Model::sphere) return v - (x.dot(v) / rho2) * x;
  // <x,x>_L = -rho^2, so P v = v + <v,x>_L x / rho^2.
  return v + (metric_dot(v, x) / rho2) * x;
}

Mat SpaceForm::tangent_basis(const Vec& x) const {
  if (model_ == Model::euclidean) return Mat::Identity(n_, n_);
  const int N = embedding_dim();
  Mat B(N, n_);
  int k = 0;
  for (int j = 0; j < N && k < n_; ++j) {
    Vec v = tangent_project(x, Vec::Unit(N, j));
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i < k; ++i) v -= metric_dot(B.col(i), v) * B.col(i);
    double nrm2 = metric_dot(v, v);
    if (nrm2 > 1e-16) B.col(k++) = v / std::sqrt(nrm2);
  }
  if (k < n_) throw std::runtime_error("tangent_basis: degenerate point");
  return B;
}

double SpaceForm::distance(const Vec& x, const Vec& o) const {
  if (model_ == Model::euclidean) return (x - o).norm();
  const double rho = radius();
  if (model_ == Model::sphere) {
    double c = std::clamp(x.dot(o) / (rho * rho), -1.0, 1.0);
    return rho * std::acos(c);
  }
  double c = std::max(1.0, -metric_dot(x, o) / (rho * rho));
  return rho * std::acosh(c);
}

RadialDerivatives distance_and_derivatives(const SpaceForm& space,
                                           const Vec& x, const Vec& o) {
  const int n = space.dim();
  RadialDerivatives out;
  out.r = space.distance(x, o);
  if (out.r < 1e-12)
    throw DomainError("distance_and_derivatives: x = o, gradient undefined");
  out.basis = space.tangent_basis(x);

  double k;  // tangential Hessian eigenvalue, derived per model
  switch (space.model()) {
    case Model::euclidean: {
      out.grad = (x - o) / out.r;
      k = 1.0 / out.r;
      break;
    }
    case Model::sphere: {
      const double rho = space.radius();
      double c = std::clamp(x.dot(o) / (rho * rho), -1.0, 1.0);
      double theta = std::acos(c);
      if (theta >= M_PI * (1 - 1e-12))
        throw DomainError("distance_and_derivatives: x at the cut locus of o");
      double s = std::sin(theta);
      out.grad = (c * x - o) / (rho * s);
      k = c / (rho * s);
      break;
    }
    case Model::hyperbolic: {
      const double rho = space.radius();
      double c = std::max(1.0, -space.metric_dot(x, o) / (rho * rho));
      double s = std::sqrt(c * c - 1.0);
      out.grad = (c * x - o) / (rho * s);
      k = c / (rho * s);
      break;
    }
  }

  Vec g(n);
  for (int i = 0; i < n; ++i) g[i] = space.metric_dot(out.basis.col(i), out.grad);
  out.hess = k * (Mat::Identity(n, n) - g * g.transpose());
  return out;
}

ComparisonReport hessian_comparison_check(const SpaceForm& space,
                                          const std::vector<Vec>& samples,
                                          double tol, const Vec& o, double b) {
  if (std::isnan(b)) b = space.curvature();
  ComparisonReport rep;
  for (const auto& x : samples) {
    RadialDerivatives d;
    try {
      d = distance_and_derivatives(space, x, o);
      if (b > 0 && d.r >= M_PI / (2 * std::sqrt(b))) {
        ++rep.skipped;
        continue;
      }
      const int n = space.dim();
      Vec g(n);
      for (int i = 0; i < n; ++i)
        g[i] = space.metric_dot(d.basis.col(i), d.grad);
      Mat D = d.hess - cb(b, d.r) * (Mat::Identity(n, n) - g * g.transpose());
      Eigen::SelfAdjointEigenSolver<Mat> es(D);
      double lo = es.eigenvalues().minCoeff();
      double hi = es.eigenvalues().cwiseAbs().maxCoeff();
      rep.min_eigen_margin = std::min(rep.min_eigen_margin, lo);
      rep.max_abs_margin = std::max(rep.max_abs_margin, hi);
      ++rep.checked;
    } catch (const DomainError&) {
      ++rep.skipped;
      continue;
    }
  }
  (void)tol;
  return rep;
}

ProductSpace::ProductSpace(SpaceForm P, SpaceForm Q, Vec basepoint_o)
    : P_(P), Q_(Q), o_(std::move(basepoint_o)) {
  if (o_.size() != P_.embedding_dim())
    throw InputError("ProductSpace: basepoint not in P's embedding");
  if (!P_.on_model(o_)) throw InputError("ProductSpace: basepoint off model");
}

ProductSpace ProductSpace::trivial(SpaceForm P) {
  return ProductSpace(P, SpaceForm::euclidean(0), P.base_point());
}

int ProductSpace::embedding_dim() const {
  return P_.embedding_dim() + Q_.embedding_dim();
}

Vec ProductSpace::p_part(const Vec& v) const {
  return v.head(P_.embedding_dim());
}

Vec ProductSpace::q_part(const Vec& v) const {
  return v.tail(Q_.embedding_dim());
}

Vec ProductSpace::join(const Vec& vp, const Vec& vq) const {
  Vec v(embedding_dim());
  v.head(P_.embedding_dim()) = vp;
  v.tail(Q_.embedding_dim()) = vq;
  return v;
}

double ProductSpace::metric_dot(const Vec& u, const Vec& v) const {
  double d = P_.metric_dot(p_part(u), p_part(v));
  if (Q_.dim() > 0) d += Q_.metric_dot(q_part(u), q_part(v));
  return d;
}

Vec ProductSpace::project_to_model(const Vec& x) const {
  return join(P_.project_to_model(p_part(x)), q_part(x));
}

Vec ProductSpace::tangent_project(const Vec& x, const Vec& v) const {
  Vec vq = q_part(v);
  if (Q_.dim() > 0) vq = Q_.tangent_project(q_part(x), vq);
  return join(P_.tangent_project(p_part(x), p_part(v)), vq);
}

Mat ProductSpace::tangent_basis(const Vec& x) const {
  Mat B = Mat::Zero(embedding_dim(), dim());
  Mat BP = P_.tangent_basis(p_part(x));
  B.topLeftCorner(P_.embedding_dim(), P_.dim()) = BP;
  if (Q_.dim() > 0) {
    Mat BQ = Q_.tangent_basis(q_part(x));
    B.bottomRightCorner(Q_.embedding_dim(), Q_.dim()) = BQ;
  }
  return B;
}

namespace {

double wedge2(double uu, double vv, double uv) { return uu * vv - uv * uv; }

}  // namespace

double sectional_curvature(const SpaceForm& space, const Vec& x, const Vec& U,
                           const Vec& V) {
  (void)x;
  double w = wedge2(space.metric_dot(U, U), space.metric_dot(V, V),
                    space.metric_dot(U, V));
  if (w < 1e-14) throw DomainError("sectional_curvature: degenerate plane");
  return space.curvature();
}

double sectional_curvature(const ProductSpace& space, const Vec& x,
                           const Vec& U, const Vec& V) {
  const auto& P = space.P();
  const auto& Q = space.Q();
  Vec up = space.p_part(U), vp = space.p_part(V);
  double num = P.curvature() *
               wedge2(P.metric_dot(up, up), P.metric_dot(vp, vp),
                      P.metric_dot(up, vp));
  if (Q.dim() > 0) {
    Vec uq = space.q_part(U), vq = space.q_part(V);
    num += Q.curvature() * wedge2(Q.metric_dot(uq, uq), Q.metric_dot(vq, vq),
                                  Q.metric_dot(uq, vq));
  }
  double den = wedge2(space.metric_dot(U, U), space.metric_dot(V, V),
                      space.metric_dot(U, V));
  if (den < 1e-14) throw DomainError("sectional_curvature: degenerate plane");
  (void)x;
  return num / den;
}

RadialHeight modified_radial_height(const ProductSpace& N, double b,
                                    const Vec& point) {
  const auto& P = N.P();
  Vec y = N.p_part(point);
  double r = P.distance(y, N.basepoint());
  if (r < 1e-12)
    throw DomainError("modified_radial_height: y = o, gradient undefined");
  RadialDerivatives d = distance_and_derivatives(P, y, N.basepoint());
  RadialHeight out;
  out.h = psi(b, r);
  out.grad = N.join(psi_prime(b, r) * d.grad, Vec::Zero(N.Q().embedding_dim()));
  return out;
}

double modified_radial_hessian(const ProductSpace& N, double b,
                               const Vec& point, const Vec& U, const Vec& V) {
  const auto& P = N.P();
  Vec y = N.p_part(point);
  RadialDerivatives d = distance_and_derivatives(P, y, N.basepoint());
  Vec up = P.tangent_project(y, N.p_part(U));
  Vec vp = P.tangent_project(y, N.p_part(V));
  double du = P.metric_dot(d.grad, up);
  double dv = P.metric_dot(d.grad, vp);
  // Hess^P r in the stored tangent basis.
  Vec uc(P.dim()), vc(P.dim());
  for (int i = 0; i < P.dim(); ++i) {
    uc[i] = P.metric_dot(d.basis.col(i), up);
    vc[i] = P.metric_dot(d.basis.col(i), vp);
  }
  double hess_r = uc.dot(d.hess * vc);
  return psi_second(b, d.r) * du * dv + psi_prime(b, d.r) * hess_r;
}

}  // namespace curvbound::spaces
