#include "curvbound/forms.hpp"

#include <algorithm>
#include <cmath>

namespace curvbound::forms {

BilinearForm::BilinearForm(int n, std::vector<Mat> coefficients)
    : n_(n), coeffs_(std::move(coefficients)) {
  if (n < 1) throw InputError("BilinearForm: n < 1");
  for (auto& A : coeffs_) {
    if (A.rows() != n || A.cols() != n)
      throw InputError("BilinearForm: coefficient matrix is not n x n");
    A = 0.5 * (A + A.transpose().eval());  // stored symmetrized
  }
}

BilinearForm BilinearForm::zero(int n, int p) {
  return BilinearForm(n, std::vector<Mat>(p, Mat::Zero(n, n)));
}

BilinearForm BilinearForm::umbilic(int n, double c) {
  return BilinearForm(n, {c * Mat::Identity(n, n)});
}

BilinearForm BilinearForm::diagonal(const Vec& d) {
  return BilinearForm(static_cast<int>(d.size()),
                      {Mat(d.asDiagonal())});
}

Vec BilinearForm::apply(const Vec& X, const Vec& Y) const {
  if (X.size() != n_ || Y.size() != n_)
    throw InputError("BilinearForm::apply: dimension mismatch");
  Vec out(dim_target());
  for (int k = 0; k < dim_target(); ++k) out[k] = X.dot(coeffs_[k] * Y);
  return out;
}

double curvature_pair(const BilinearForm& alpha, const Vec& X, const Vec& Y) {
  if (X.size() != alpha.dim_domain() || Y.size() != alpha.dim_domain())
    throw InputError("curvature_pair: dimension mismatch");
  return alpha.apply(X, X).dot(alpha.apply(Y, Y)) -
         alpha.apply(X, Y).squaredNorm();
}

double curvature_plane(const BilinearForm& alpha, const Plane& sigma) {
  if (sigma.ambient_dim() != alpha.dim_domain())
    throw InputError("curvature_plane: plane/form dimension mismatch");
  const Vec X = sigma.basis_x();
  const Vec Y = sigma.basis_y();
  double wedge = X.squaredNorm() * Y.squaredNorm() - std::pow(X.dot(Y), 2);
  if (wedge < 1e-14) throw DomainError("curvature_plane: degenerate plane");
  return curvature_pair(alpha, X, Y) / wedge;
}

namespace {

// Multi-start projected-gradient minimization of ||alpha(X,X)||^2 over the
// unit sphere of S.  The squared norm shares its minimizers with the norm
// and stays smooth at zeros.
MinDiagonalResult sphere_minimize(const BilinearForm& alpha, const Subspace& S,
                                  const OptimizerConfig& cfg) {
  const int d = S.dim();
  const BilinearForm beta = restrict_form(alpha, S);
  auto obj = [&](const Vec& x) { return beta.apply(x, x).squaredNorm(); };

  std::vector<Vec> starts;
  for (int j = 0; j < d && static_cast<int>(starts.size()) < cfg.starts; ++j)
    starts.push_back(Vec::Unit(d, j));
  Rng rng(cfg.seed + 17);
  while (static_cast<int>(starts.size()) < cfg.starts)
    starts.push_back(random_unit_vector(d, rng));

  Vec best_x = starts[0];
  double best_f = obj(best_x);
  for (const auto& x0 : starts) {
    Vec x = x0;
    double f = obj(x);
    double step = cfg.step0;
    for (int it = 0; it < cfg.max_iters && step > 1e-13; ++it) {
      Vec g(d);
      for (int i = 0; i < d; ++i) {
        Vec xp = x, xm = x;
        xp[i] += cfg.fd_step;
        xm[i] -= cfg.fd_step;
        g[i] = (obj(xp.normalized()) - obj(xm.normalized())) /
               (2 * cfg.fd_step);
      }
      Vec t = g - g.dot(x) * x;  // tangent to the sphere
      double tn = t.norm();
      if (tn < 1e-14) break;
      t /= tn;
      bool improved = false;
      while (step > 1e-13) {
        Vec xt = (x - step * t).normalized();
        double ft = obj(xt);
        // Relative acceptance keeps descent alive near exact zeros of the
        // objective, where absolute improvements underflow.
        if (ft < f - 1e-16 || ft < f * (1 - 1e-12)) {
          x = xt;
          f = ft;
          improved = true;
          step *= 1.5;
          break;
        }
        step *= 0.5;
      }
      if (!improved) break;
    }
    Vec xn = sign_normalize(x);
    bool better = f < best_f - 1e-15 || f < best_f * (1 - 1e-9);
    bool tied = !better && std::abs(f - best_f) <= 1e-15;
    if (better || (tied && lex_less(xn, sign_normalize(best_x)))) {
      best_f = f;
      best_x = xn;
    }
  }
  return {std::sqrt(std::max(0.0, best_f)), S.lift(sign_normalize(best_x))};
}

}  // namespace

MinDiagonalResult min_diagonal_norm(const BilinearForm& alpha,
                                    const Subspace& S,
                                    const OptimizerConfig& cfg) {
  if (S.ambient_dim() != alpha.dim_domain())
    throw InputError("min_diagonal_norm: subspace/form dimension mismatch");
  if (alpha.dim_target() == 0) {
    return {0.0, S.lift(Vec::Unit(S.dim(), 0))};
  }
  return sphere_minimize(alpha, S, cfg);
}

std::optional<Vec> find_asymptotic_vector(const BilinearForm& alpha,
                                          const Subspace& S, double tol,
                                          const OptimizerConfig& cfg) {
  if (tol <= 0) throw InputError("find_asymptotic_vector: tol <= 0");
  MinDiagonalResult r = min_diagonal_norm(alpha, S, cfg);
  if (r.value <= tol) return r.argmin;
  return std::nullopt;
}

OtsukiReport check_otsuki(const BilinearForm& alpha, double lambda,
                          const OptimizerConfig& cfg) {
  if (lambda < 0) throw InputError("check_otsuki: lambda < 0");
  const int n = alpha.dim_domain();
  const int p = alpha.dim_target();
  OtsukiReport rep;
  rep.lambda = lambda;

  if (n >= 2) {
    grassmann::PlaneOracle oracle = [&](const Plane& sigma) {
      return curvature_plane(alpha, sigma);
    };
    auto [maxK, sigma] =
        grassmann::max_over_planes(oracle, Subspace::full(n), cfg);
    rep.best_plane_value = maxK;
    if (maxK > lambda + 1e-10) rep.condition_i_violated_witness = sigma;
  } else {
    rep.best_plane_value = -std::numeric_limits<double>::infinity();
  }

  MinDiagonalResult md = min_diagonal_norm(alpha, Subspace::full(n), cfg);
  rep.best_diagonal_norm = md.value;
  if (md.value <= std::sqrt(lambda) + 1e-8)
    rep.condition_ii_violated_witness = md.argmin;

  // With p < n the lemma forbids (i) and (ii) holding together, so a missing
  // witness means the searches failed, not that a counterexample exists.
  rep.consistent = !(p < n && !rep.condition_i_violated_witness &&
                     !rep.condition_ii_violated_witness);
  return rep;
}

int algebraic_codimension(const BilinearForm& alpha, double rank_tol) {
  if (rank_tol <= 0) throw InputError("algebraic_codimension: rank_tol <= 0");
  const int n = alpha.dim_domain();
  const int p = alpha.dim_target();
  if (p == 0) return 0;
  Mat M(p, n * (n + 1) / 2);
  int col = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      M.col(col++) = alpha.apply(Vec::Unit(n, i), Vec::Unit(n, j));
  Eigen::JacobiSVD<Mat> svd(M);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0;
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s[i] > rank_tol * s[0]) ++rank;
  return rank;
}

BilinearForm restrict_form(const BilinearForm& alpha, const Subspace& S) {
  if (S.ambient_dim() != alpha.dim_domain())
    throw InputError("restrict_form: dimension mismatch");
  const Mat& F = S.frame();
  std::vector<Mat> coeffs;
  coeffs.reserve(alpha.dim_target());
  for (const auto& A : alpha.coefficients())
    coeffs.push_back(F.transpose() * A * F);
  return BilinearForm(S.dim(), std::move(coeffs));
}

BilinearForm random_form(int n, int p, std::uint64_t seed, double scale) {
  if (n < 1 || p < 0) throw InputError("random_form: bad dimensions");
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Mat> coeffs;
  coeffs.reserve(p);
  for (int k = 0; k < p; ++k) {
    Mat A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = scale * gauss(rng);
    coeffs.push_back(A);
  }
  return BilinearForm(n, std::move(coeffs));
}

}  // namespace curvbound::forms
