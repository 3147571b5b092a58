#include "curvbound/principles.hpp"

#include <algorithm>
#include <cmath>

#include "curvbound/spaces.hpp"

namespace curvbound::principles {

namespace {

// log^(j), defined for t above exp^(j)(1).
double iterated_log(double t, int j) {
  for (int i = 0; i < j; ++i) t = std::log(t);
  return t;
}

double iterated_exp_of_one(int j) {
  double t = 1.0;
  for (int i = 0; i < j; ++i) t = std::exp(t);
  return t;
}

std::function<double(double)> monotone_interpolant(std::vector<double> t,
                                                   std::vector<double> v) {
  if (t.size() != v.size() || t.size() < 2)
    throw InputError("tabulated function: need matching samples, >= 2");
  for (std::size_t i = 1; i < t.size(); ++i)
    if (t[i] <= t[i - 1])
      throw InputError("tabulated function: abscissae must increase");
  return [t = std::move(t), v = std::move(v)](double x) {
    if (x <= t.front()) return v.front();
    if (x >= t.back()) return v.back();
    auto it = std::upper_bound(t.begin(), t.end(), x);
    std::size_t i = static_cast<std::size_t>(it - t.begin());
    double u = (x - t[i - 1]) / (t[i] - t[i - 1]);
    return v[i - 1] + u * (v[i] - v[i - 1]);
  };
}

// Divergence certificate for int^inf u(t) dt with positive integrand u:
// compare against the divergent family 1/(t prod_{j<=J} log^(j) t).  If the
// ratio u(t) * t * prod log^(j)(t) stays bounded away from zero for some J,
// the integral diverges; if it decays clearly for every J tried, it is
// declared convergent; otherwise inconclusive.
TailVerdict tail_divergence(const std::function<double(double)>& u,
                            double t_max) {
  if (t_max < 10) throw InputError("tail check: t_max must be >= 10");
  constexpr int kMaxJ = 4;
  constexpr int kGrid = 160;
  bool all_decay = true;
  int observed = 0;
  for (int J = 0; J <= kMaxJ; ++J) {
    double t0 = std::max(10.0, 1.5 * iterated_exp_of_one(J));
    // A member is observable only when the range spans a couple of decades;
    // shorter windows cannot separate bounded-below ratios from slow decay.
    if (t0 * 100 > t_max) continue;
    ++observed;
    double ratio0 = 0.0, min_ratio = 0.0, last = 0.0;
    bool tail_decreasing = true;
    for (int i = 0; i <= kGrid; ++i) {
      double t = t0 * std::pow(t_max / t0, static_cast<double>(i) / kGrid);
      double prod = t;
      for (int j = 1; j <= J; ++j) prod *= iterated_log(t, j);
      double ratio = u(t) * prod;
      if (i == 0) {
        ratio0 = min_ratio = ratio;
      } else {
        min_ratio = std::min(min_ratio, ratio);
        if (i > (3 * kGrid) / 4 && ratio > last * (1 + 1e-9))
          tail_decreasing = false;
      }
      last = ratio;
    }
    if (ratio0 > 0 && min_ratio >= 0.3 * ratio0) return TailVerdict::diverges;
    if (!(tail_decreasing && last <= 0.05 * ratio0)) all_decay = false;
  }
  return (observed > 0 && all_decay) ? TailVerdict::converges
                                     : TailVerdict::inconclusive;
}

}  // namespace

DecayFunction DecayFunction::iterated_log_family(double A, int J) {
  if (A <= 0) throw InputError("iterated_log_family: A must be positive");
  if (J < 1) throw InputError("iterated_log_family: J must be >= 1");
  const double splice = iterated_exp_of_one(J);
  auto formula = [A, J](double t) {
    double v = A * A * t * t;
    for (int j = 1; j <= J; ++j) {
      double lg = iterated_log(t, j);
      v *= lg * lg;
    }
    return v;
  };
  const double floor = formula(splice);
  return DecayFunction(
      "decay(A=" + std::to_string(A) + ",J=" + std::to_string(J) + ")",
      [formula, splice, floor](double t) {
        return t <= splice ? floor : formula(t);
      });
}

DecayFunction DecayFunction::constant(double c) {
  if (c <= 0) throw InputError("DecayFunction::constant: c must be positive");
  return DecayFunction("constant", [c](double) { return c; });
}

DecayFunction DecayFunction::power(double exponent) {
  return DecayFunction("power(" + std::to_string(exponent) + ")",
                       [exponent](double t) { return std::pow(t, exponent); });
}

DecayFunction DecayFunction::tabulated(std::vector<double> t,
                                       std::vector<double> v) {
  return DecayFunction("tabulated",
                       monotone_interpolant(std::move(t), std::move(v)));
}

DecayReport decay_condition_check(const DecayFunction& F, double t_max) {
  if (t_max < 10) throw InputError("decay_condition_check: t_max >= 10");
  DecayReport rep;
  rep.f0 = F(0.0);
  rep.positive_at_zero = rep.f0 > 0;

  rep.nondecreasing = true;
  double prev = rep.f0;
  constexpr int kGrid = 2000;
  for (int i = 1; i <= kGrid; ++i) {
    // Dense near 0, geometric for large t.
    double t = i <= kGrid / 2
                   ? 2.0 * i / (kGrid / 2)
                   : 2.0 * std::pow(t_max / 2.0,
                                    static_cast<double>(i - kGrid / 2) /
                                        (kGrid - kGrid / 2));
    double v = F(t);
    if (v < prev * (1 - 1e-12) - 1e-12) {
      rep.nondecreasing = false;
      break;
    }
    prev = v;
  }

  rep.tail = tail_divergence(
      [&F](double t) { return 1.0 / std::sqrt(std::max(F(t), 1e-300)); },
      t_max);
  return rep;
}

GrowthFunction GrowthFunction::constant(double c) {
  if (c <= 0) throw InputError("GrowthFunction::constant: c must be positive");
  return GrowthFunction("constant", [c](double) { return c; });
}

GrowthFunction GrowthFunction::affine(double a, double slope) {
  return GrowthFunction(
      "affine(" + std::to_string(a) + "," + std::to_string(slope) + ")",
      [a, slope](double t) { return a + slope * t; });
}

GrowthFunction GrowthFunction::affine_power(double a, double slope,
                                            double exponent) {
  return GrowthFunction("affine_power",
                        [a, slope, exponent](double t) {
                          return std::pow(a + slope * t, exponent);
                        });
}

GrowthFunction GrowthFunction::tabulated(std::vector<double> t,
                                         std::vector<double> v) {
  return GrowthFunction("tabulated",
                        monotone_interpolant(std::move(t), std::move(v)));
}

GrowthReport growth_condition_check(const GrowthFunction& sigma,
                                    double t_max) {
  if (t_max < 10) throw InputError("growth_condition_check: t_max >= 10");
  GrowthReport rep;
  rep.positive = true;
  double recip_mid = 0.0, recip_end = 0.0;
  constexpr int kGrid = 200;
  for (int i = 0; i <= kGrid; ++i) {
    double t = i == 0 ? 0.0 : std::pow(t_max, static_cast<double>(i) / kGrid);
    double s = sigma(t);
    if (s <= 0) {
      rep.positive = false;
      return rep;
    }
    if (i == kGrid / 2) recip_mid = 1.0 / s;
    if (i == kGrid) recip_end = 1.0 / s;
  }
  rep.limsup_reciprocal_finite = recip_end <= std::max(10 * recip_mid, 1e3);
  rep.integral =
      tail_divergence([&sigma](double t) { return 1.0 / sigma(t); }, t_max);
  return rep;
}

// ---------------------------------------------------------------------------
// Sequence searches

namespace {

Mat truncated_box(const immersions::ParametricImmersion& f,
                  double truncation) {
  Mat box = f.domain_box();
  for (int i = 0; i < box.rows(); ++i) {
    box(i, 0) = std::max(box(i, 0), -truncation);
    box(i, 1) = std::min(box(i, 1), truncation);
    if (box(i, 0) >= box(i, 1))
      throw InputError("truncation leaves an empty chart domain");
  }
  return box;
}

std::vector<Vec> box_samples(const Mat& box, int count, double margin) {
  const int m = static_cast<int>(box.rows());
  std::vector<Vec> pts;
  pts.reserve(count);
  for (int i = 1; i <= count; ++i) {
    Vec u = halton(i, m);
    Vec x(m);
    for (int d = 0; d < m; ++d) {
      double lo = box(d, 0) + margin, hi = box(d, 1) - margin;
      x[d] = lo + u[d] * (hi - lo);
    }
    pts.push_back(x);
  }
  return pts;
}

// Derivative-free compass ascent of `field` inside the box.
Vec pattern_ascend(const std::function<double(const Vec&)>& field,
                   const Mat& box, double margin, Vec x, int iters) {
  const int m = static_cast<int>(box.rows());
  Vec step(m);
  for (int d = 0; d < m; ++d) step[d] = 0.1 * (box(d, 1) - box(d, 0));
  double best = field(x);
  for (int it = 0; it < iters; ++it) {
    bool improved = false;
    for (int d = 0; d < m; ++d) {
      for (double s : {step[d], -step[d]}) {
        Vec y = x;
        y[d] = std::clamp(y[d] + s, box(d, 0) + margin, box(d, 1) - margin);
        double v = field(y);
        if (v > best + 1e-15) {
          best = v;
          x = y;
          improved = true;
        }
      }
    }
    if (!improved) {
      step *= 0.5;
      if (step.maxCoeff() < 1e-10) break;
    }
  }
  return x;
}

bool hits_truncation(const immersions::ParametricImmersion& f, const Mat& box,
                     const Vec& x, double margin) {
  const Mat& orig = f.domain_box();
  for (int d = 0; d < box.rows(); ++d) {
    bool cut_lo = box(d, 0) > orig(d, 0) + 1e-12;
    bool cut_hi = box(d, 1) < orig(d, 1) - 1e-12;
    if (cut_lo && x[d] <= box(d, 0) + margin + 1e-6) return true;
    if (cut_hi && x[d] >= box(d, 1) - margin - 1e-6) return true;
  }
  return false;
}

struct Maximizer {
  double sup;
  std::vector<Vec> candidates;  // refined tops first, then raw samples
};

Maximizer locate_maximum(const std::function<double(const Vec&)>& field,
                         const Mat& box, double margin, int samples,
                         int refine_iters) {
  auto pts = box_samples(box, samples, margin);
  std::vector<int> order(pts.size());
  std::vector<double> vals(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    order[i] = static_cast<int>(i);
    vals[i] = field(pts[i]);
  }
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return vals[a] > vals[b]; });
  Maximizer out{-std::numeric_limits<double>::infinity(), {}};
  const int tops = static_cast<int>(std::min<std::size_t>(5, pts.size()));
  for (int i = 0; i < tops; ++i) {
    Vec x = pattern_ascend(field, box, margin, pts[order[i]], refine_iters);
    out.sup = std::max(out.sup, field(x));
    out.candidates.push_back(x);
  }
  const int keep = static_cast<int>(std::min<std::size_t>(50, pts.size()));
  for (int i = 0; i < keep; ++i) out.candidates.push_back(pts[order[i]]);
  return out;
}

SequenceRecord hessian_sequence_impl(const immersions::ParametricImmersion& f,
                                     const ChartField& g, double truncation,
                                     int k_max, const SequenceConfig& cfg,
                                     bool strong) {
  if (k_max < 1 || k_max > 20)
    throw InputError("hessian sequence: require 1 <= k_max <= 20");
  const Mat box = truncated_box(f, truncation);
  const double margin = 3 * f.fd().h2;

  auto m = locate_maximum(g, box, margin, cfg.samples, cfg.refine_iters);

  SequenceRecord rec;
  rec.mode = strong ? SequenceMode::strong : SequenceMode::weak;
  rec.truncation = truncation;
  rec.sup_estimate = m.sup;

  // Derivative data is reused across k.
  std::vector<immersions::FieldDerivatives> derivs;
  derivs.reserve(m.candidates.size());
  for (const auto& x : m.candidates)
    derivs.push_back(immersions::chart_field_derivatives(f, g, x));

  for (int k = 1; k <= k_max; ++k) {
    SequenceEntry e;
    e.k = k;
    const double thr = 1.0 / k;
    for (std::size_t i = 0; i < m.candidates.size(); ++i) {
      const auto& d = derivs[i];
      if (d.value <= m.sup - thr) continue;
      Eigen::SelfAdjointEigenSolver<Mat> es(d.hess_frame);
      double hmax = es.eigenvalues().maxCoeff();
      if (hmax > thr + cfg.tol) continue;
      if (strong && d.grad_frame.norm() >= thr + cfg.tol) continue;
      e.found = true;
      e.x = m.candidates[i];
      e.value = d.value;
      e.grad_norm = d.grad_frame.norm();
      e.hess_max_eigen = hmax;
      e.boundary_hit = hits_truncation(f, box, e.x, margin);
      break;
    }
    rec.entries.push_back(std::move(e));
  }
  return rec;
}

}  // namespace

SequenceRecord weak_hessian_sequence(const immersions::ParametricImmersion& f,
                                     const ChartField& g, double truncation,
                                     int k_max, const SequenceConfig& cfg) {
  return hessian_sequence_impl(f, g, truncation, k_max, cfg, false);
}

SequenceRecord strong_hessian_sequence(
    const immersions::ParametricImmersion& f, const ChartField& g,
    double truncation, int k_max, const SequenceConfig& cfg) {
  return hessian_sequence_impl(f, g, truncation, k_max, cfg, true);
}

double penalty_factor(const GrowthFunction& sigma, double z_norm) {
  if (z_norm < 0) throw InputError("penalty_factor: negative distance");
  if (z_norm == 0) return 1.0;
  // Composite Simpson, fixed panel density per unit length.
  int panels = std::max(8, static_cast<int>(std::ceil(32 * z_norm)));
  if (panels % 2 == 1) ++panels;
  const double h = z_norm / panels;
  double acc = 1.0 / sigma(0.0) + 1.0 / sigma(z_norm);
  for (int i = 1; i < panels; ++i)
    acc += (i % 2 == 1 ? 4.0 : 2.0) / sigma(i * h);
  return std::exp(acc * h / 3.0);
}

SequenceRecord penalized_sequence(const immersions::ParametricImmersion& f,
                                  const GrowthFunction& sigma, const Vec& x0,
                                  int k_max, const PenalizedConfig& cfg) {
  if (k_max < 1 || k_max > 20)
    throw InputError("penalized_sequence: require 1 <= k_max <= 20");
  const auto& N = f.ambient();
  if (N.Q().dim() < 1)
    throw InputError("penalized_sequence: ambient must have an axis factor");
  if (N.Q().model() != spaces::Model::euclidean)
    throw InputError("penalized_sequence: axis factor must be flat");
  auto growth = growth_condition_check(sigma, 1e8);
  if (!growth.passes_integral())
    throw InputError(
        "penalized_sequence: growth function fails the divergence hypothesis");

  const double b = N.P().curvature();
  auto radial_g = [&](const Vec& x) {
    Vec y = f.evaluate(x);
    double r = N.P().distance(N.p_part(y), N.basepoint());
    return spaces::psi(b, r);
  };
  auto z_norm = [&](const Vec& x) { return N.q_part(f.evaluate(x)).norm(); };
  auto phi_field = [&](const Vec& x) {
    return penalty_factor(sigma, z_norm(x));
  };

  {
    Vec y0 = f.evaluate(x0);
    if (N.P().distance(N.p_part(y0), N.basepoint()) < 1e-8)
      throw InputError("penalized_sequence: x0 projects onto the pole");
  }
  const double g0 = radial_g(x0);

  const Mat box = truncated_box(f, cfg.truncation);
  const double margin = 3 * f.fd().h2;

  SequenceRecord rec;
  rec.mode = SequenceMode::penalized;
  rec.truncation = cfg.truncation;
  rec.g_at_x0 = g0;
  rec.sup_estimate =
      locate_maximum(radial_g, box, margin, cfg.samples, cfg.refine_iters).sup;

  for (int k = 1; k <= k_max; ++k) {
    auto gk = [&](const Vec& x) {
      return (radial_g(x) - g0 + 1.0) / std::pow(phi_field(x), 1.0 / k);
    };
    auto m = locate_maximum(gk, box, margin, cfg.samples, cfg.refine_iters);
    Vec xk = m.candidates.front();
    double best = gk(xk);
    for (const auto& cand : m.candidates) {
      double v = gk(cand);
      if (v > best) {
        best = v;
        xk = cand;
      }
    }

    SequenceEntry e;
    e.k = k;
    e.found = true;
    e.x = xk;
    e.value = radial_g(xk);
    e.phi = phi_field(xk);
    e.boundary_hit = hits_truncation(f, box, xk, margin);

    auto dg = immersions::chart_field_derivatives(f, radial_g, xk);
    auto dphi = immersions::chart_field_derivatives(f, phi_field, xk);
    e.grad_norm = dg.grad_frame.norm();
    Eigen::SelfAdjointEigenSolver<Mat> es(dg.hess_frame);
    e.hess_max_eigen = es.eigenvalues().maxCoeff();

    const double c = (e.value - g0 + 1.0) / (k * e.phi);
    Vec rhs = c * dphi.grad_frame;
    e.grad_identity_residual =
        (dg.grad_frame - rhs).norm() /
        std::max({1.0, dg.grad_frame.norm(), rhs.norm()});
    rec.entries.push_back(std::move(e));
  }
  return rec;
}

}  // namespace curvbound::principles
