#include "curvbound/grassmann.hpp"

#include <algorithm>
#include <cmath>

namespace curvbound::grassmann {

Subspace::Subspace(int ambient_dim, const Mat& frame_columns)
    : n_(ambient_dim) {
  if (ambient_dim < 1) throw InputError("Subspace: ambient_dim < 1");
  if (frame_columns.rows() != ambient_dim)
    throw InputError("Subspace: frame rows != ambient_dim");
  if (frame_columns.cols() < 1 || frame_columns.cols() > ambient_dim)
    throw InputError("Subspace: dim out of range");
  frame_ = gram_schmidt(frame_columns);
  if (frame_.cols() != frame_columns.cols())
    throw InputError("Subspace: rank-deficient frame");
}

Subspace Subspace::span(const Vec& v) {
  Mat F(v.size(), 1);
  F.col(0) = v;
  return Subspace(static_cast<int>(v.size()), F);
}

Subspace Subspace::span(const Vec& u, const Vec& v) {
  Mat F(u.size(), 2);
  F.col(0) = u;
  F.col(1) = v;
  return Subspace(static_cast<int>(u.size()), F);
}

bool Subspace::contains(const Vec& v, double tol) const {
  Vec res = v - frame_ * (frame_.transpose() * v);
  return res.norm() <= tol * std::max(1.0, v.norm());
}

Plane::Plane(int ambient_dim, const Mat& frame_columns)
    : Subspace(ambient_dim, frame_columns) {
  if (dim() != 2) throw InputError("Plane: frame must span 2 dimensions");
}

Plane::Plane(const Vec& u, const Vec& v)
    : Plane(static_cast<int>(u.size()), [&] {
        Mat F(u.size(), 2);
        F.col(0) = u;
        F.col(1) = v;
        return F;
      }()) {}

std::vector<Subspace> sample_subspaces(int n, int d, int count,
                                       std::uint64_t seed) {
  if (d < 1 || d > n) throw InputError("sample_subspaces: d out of range");
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Subspace> out;
  out.reserve(count);
  while (static_cast<int>(out.size()) < count) {
    Mat A(n, d);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) A(i, j) = gauss(rng);
    Mat Q = gram_schmidt(A);
    if (Q.cols() != d) continue;  // measure-zero degenerate draw
    out.emplace_back(n, Q);
  }
  return out;
}

namespace {

/// Multi-start minimization of obj over frames in G_d(R^n): finite-difference
// gradient, projection to the horizontal space, retraction by
// re-orthonormalization, step halving.  Ties broken by the lexicographically
// smallest sign-normalized frame.
struct GrassOpt {
  double value;
  Mat frame;
};

GrassOpt optimize_grassmann(const std::function<double(const Mat&)>& obj,
                            int n, int d, const OptimizerConfig& cfg,
                            long* budget) {
  auto eval = [&](const Mat& F) {
    if (budget) ++*budget;
    return obj(F);
  };

  std::vector<Mat> starts;
  // Deterministic coordinate-plane starts first, then seeded random frames.
  {
    Mat I = Mat::Identity(n, n);
    for (int s = 0; s + d <= n && static_cast<int>(starts.size()) < cfg.starts;
         ++s)
      starts.push_back(I.middleCols(s, d));
  }
  for (const auto& S :
       sample_subspaces(n, d, std::max(0, cfg.starts -
                                              static_cast<int>(starts.size())),
                        cfg.seed + 1))
    starts.push_back(S.frame());

  // Rank starts by objective and refine only the most promising quarter.
  std::vector<std::pair<double, int>> ranked;
  for (int i = 0; i < static_cast<int>(starts.size()); ++i)
    ranked.emplace_back(eval(starts[i]), i);
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  int refine_count = std::max(2, static_cast<int>(ranked.size()) / 4);
  refine_count = std::min<int>(refine_count, static_cast<int>(ranked.size()));

  GrassOpt best{ranked.front().first,
                sign_normalize(starts[ranked.front().second])};

  for (int r = 0; r < refine_count; ++r) {
    Mat F = starts[ranked[r].second];
    double fval = ranked[r].first;
    double step = cfg.step0;
    for (int it = 0; it < cfg.max_iters && step > 1e-12; ++it) {
      // Finite-difference Euclidean gradient on the frame entries.
      Mat G(n, d);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) {
          Mat Fp = F, Fm = F;
          Fp(i, j) += cfg.fd_step;
          Fm(i, j) -= cfg.fd_step;
          Mat Qp = gram_schmidt(Fp), Qm = gram_schmidt(Fm);
          if (Qp.cols() != d || Qm.cols() != d) {
            G(i, j) = 0.0;
            continue;
          }
          G(i, j) = (eval(Qp) - eval(Qm)) / (2 * cfg.fd_step);
        }
      // Horizontal component (tangent to the Grassmannian).
      Mat D = G - F * (F.transpose() * G);
      double dn = D.norm();
      if (dn < 1e-14) break;
      D /= dn;
      bool improved = false;
      while (step > 1e-12) {
        Mat Ftry = gram_schmidt(F - step * D);
        if (Ftry.cols() == d) {
          double ftry = eval(Ftry);
          if (ftry < fval - cfg.obj_tol * 0.01) {
            F = Ftry;
            fval = ftry;
            improved = true;
            step *= 1.5;
            break;
          }
        }
        step *= 0.5;
      }
      if (!improved) break;
    }
    Mat Fn = sign_normalize(F);
    if (fval < best.value - 1e-12 ||
        (std::abs(fval - best.value) <= 1e-12 && lex_less(Fn, best.frame))) {
      best = {fval, Fn};
    }
  }
  return best;
}

}  // namespace

std::pair<double, Plane> max_over_planes(const PlaneOracle& evaluate,
                                         const Subspace& W,
                                         const OptimizerConfig& cfg) {
  const int d = W.dim();
  if (d < 2) throw InputError("max_over_planes: dim W < 2");
  const int n = W.ambient_dim();
  if (d == 2) {
    Plane sigma(n, W.frame());
    return {evaluate(sigma), sigma};
  }
  auto obj = [&](const Mat& Fd) {
    return -evaluate(Plane(n, W.frame() * Fd));
  };
  long budget = 0;
  GrassOpt r = optimize_grassmann(obj, d, 2, cfg, &budget);
  Plane sigma(n, W.frame() * r.frame);
  return {-r.value, sigma};
}

MinMaxResult minmax_functional(const PlaneOracle& evaluate, int n,
                               int d_threshold, const OptimizerConfig& cfg) {
  const int dW = d_threshold + 1;
  if (dW < 2) throw InputError("minmax_functional: d_threshold + 1 < 2");
  if (dW > n)
    throw InputError("minmax_functional: d_threshold + 1 > n, constraint set empty");

  if (dW == n) {
    Subspace W = Subspace::full(n);
    auto [val, sigma] = max_over_planes(evaluate, W, cfg);
    return MinMaxResult{val, W, sigma, {{W, val}}, 1};
  }

  OptimizerConfig inner = cfg;
  inner.starts = std::max(4, cfg.starts / 8);
  inner.max_iters = std::max(30, cfg.max_iters / 2);

  long budget = 0;
  std::vector<std::pair<Subspace, double>> trace;
  auto obj = [&](const Mat& F) {
    ++budget;
    Subspace W(n, F);
    double v = max_over_planes(evaluate, W, inner).first;
    if (trace.size() < 64) trace.emplace_back(W, v);
    return v;
  };

  OptimizerConfig outer = cfg;
  outer.starts = std::max(6, cfg.starts / 4);
  GrassOpt r = optimize_grassmann(obj, n, dW, outer, nullptr);

  Subspace Wbest(n, r.frame);
  // Re-solve the inner problem at full budget for the reported witness.
  auto [val, sigma] = max_over_planes(evaluate, Wbest, cfg);
  MinMaxResult res{val, Wbest, sigma, std::move(trace), budget};
  return res;
}

std::vector<Vec> sphere_grid(int dim, double resolution) {
  if (dim < 1) throw InputError("sphere_grid: dim < 1");
  if (resolution <= 0) throw InputError("sphere_grid: resolution <= 0");
  std::vector<Vec> out;
  if (dim == 1) {
    Vec v(1);
    v[0] = 1.0;
    out.push_back(v);
    out.push_back(-v);
    return out;
  }
  if (dim == 2) {
    int steps = std::max(4, static_cast<int>(std::ceil(2 * M_PI / resolution)));
    for (int i = 0; i < steps; ++i) {
      double t = 2 * M_PI * i / steps;
      Vec v(2);
      v << std::cos(t), std::sin(t);
      out.push_back(v);
    }
    return out;
  }
  // dim >= 3: polar angle from the last axis, recurse with an
  // area-proportional azimuthal resolution.
  int psteps = std::max(3, static_cast<int>(std::ceil(M_PI / resolution)));
  for (int i = 0; i <= psteps; ++i) {
    double phi = M_PI * i / psteps;
    double s = std::sin(phi);
    double sub_res = resolution / std::max(s, resolution / M_PI);
    auto sub = sphere_grid(dim - 1, sub_res);
    for (const auto& u : sub) {
      Vec v(dim);
      v.head(dim - 1) = s * u;
      v[dim - 1] = std::cos(phi);
      out.push_back(v);
      if (i == 0 || i == psteps) break;  // poles collapse
    }
  }
  return out;
}

namespace {

// Max of the oracle over planes contained in W, by exhaustive grid.
double grid_max_planes(const PlaneOracle& evaluate, const Subspace& W,
                       double res) {
  const int d = W.dim();
  const int n = W.ambient_dim();
  if (d == 2) return evaluate(Plane(n, W.frame()));
  double best = -std::numeric_limits<double>::infinity();
  if (d == 3) {
    // Planes in W <-> unit normals in W-coordinates.
    for (const auto& u : sphere_grid(3, res)) {
      Mat B = orthonormal_completion(u).rightCols(2);
      best = std::max(best, evaluate(Plane(n, W.frame() * B)));
    }
    return best;
  }
  // d == 4: plane spanned by u and a unit vector of u's orthocomplement.
  for (const auto& u : sphere_grid(4, res)) {
    Mat C = orthonormal_completion(u).rightCols(3);
    for (const auto& w : sphere_grid(3, res)) {
      Mat F(n, 2);
      F.col(0) = W.frame() * u;
      F.col(1) = W.frame() * (C * w);
      best = std::max(best, evaluate(Plane(n, F)));
    }
  }
  return best;
}

}  // namespace

double brute_force_minmax(const PlaneOracle& evaluate, int n, int d_threshold,
                          double grid_resolution) {
  if (n > 4) throw InputError("brute_force_minmax: refused for n > 4");
  const int dW = d_threshold + 1;
  if (dW < 2 || dW > n)
    throw InputError("brute_force_minmax: d_threshold out of range");
  const double res = grid_resolution;

  if (dW == n)
    return grid_max_planes(evaluate, Subspace::full(n), res);

  double best = std::numeric_limits<double>::infinity();
  if (dW == n - 1) {
    // Subspaces <-> unit normals.
    for (const auto& u : sphere_grid(n, res)) {
      Subspace W(n, orthonormal_completion(u).rightCols(n - 1));
      best = std::min(best, grid_max_planes(evaluate, W, res));
    }
    return best;
  }
  // dW == 2, n == 4: planes of R^4 from (normal-pair) parametrization.
  for (const auto& u : sphere_grid(4, res)) {
    Mat C = orthonormal_completion(u).rightCols(3);
    for (const auto& w : sphere_grid(3, res)) {
      Mat F(4, 2);
      F.col(0) = u;
      F.col(1) = C * w;
      best = std::min(best, evaluate(Plane(4, F)));
    }
  }
  return best;
}

}  // namespace curvbound::grassmann
