#pragma once

#include <functional>
#include <string>
#include <vector>

#include "curvbound/common.hpp"
#include "curvbound/immersions.hpp"

namespace curvbound::principles {

enum class TailVerdict { diverges, converges, inconclusive };

/// Nondecreasing decay-rate profile F(t) = A^2 t^2 prod_j (log^(j) t)^2 for
/// large t, held constant below the iterated-log domain so that F(0) > 0.
class DecayFunction {
 public:
  static DecayFunction iterated_log_family(double A, int J);
  static DecayFunction constant(double c);
  static DecayFunction power(double exponent);  // F(t) = t^e
  static DecayFunction tabulated(std::vector<double> t, std::vector<double> v);

  double operator()(double t) const { return f_(t); }
  const std::string& name() const { return name_; }

 private:
  DecayFunction(std::string name, std::function<double(double)> f)
      : name_(std::move(name)), f_(std::move(f)) {}
  std::string name_;
  std::function<double(double)> f_;
};

struct DecayReport {
  bool positive_at_zero = false;
  bool nondecreasing = false;
  TailVerdict tail = TailVerdict::inconclusive;
  double f0 = 0.0;
  bool pass() const {
    return positive_at_zero && nondecreasing && tail == TailVerdict::diverges;
  }
};

/// (i) F(0) > 0, (ii) F nondecreasing on a dense grid, (iii) divergence of
/// the integral of 1/sqrt(F), certified by comparison against the divergent
/// family 1/(t prod log^(j) t).  A finite quadrature value never certifies
/// divergence, so unresolved tails come back inconclusive, not pass.
DecayReport decay_condition_check(const DecayFunction& F, double t_max);

class GrowthFunction {
 public:
  static GrowthFunction constant(double c);
  static GrowthFunction affine(double a, double slope);  // a + slope*t
  static GrowthFunction affine_power(double a, double slope, double exponent);
  static GrowthFunction tabulated(std::vector<double> t,
                                  std::vector<double> v);

  double operator()(double t) const { return f_(t); }
  const std::string& name() const { return name_; }

 private:
  GrowthFunction(std::string name, std::function<double(double)> f)
      : name_(std::move(name)), f_(std::move(f)) {}
  std::string name_;
  std::function<double(double)> f_;
};

struct GrowthReport {
  bool positive = false;
  TailVerdict integral = TailVerdict::inconclusive;  // of 1/sigma
  bool limsup_reciprocal_finite = false;
  bool passes_integral() const {
    return positive && integral == TailVerdict::diverges;
  }
  bool passes_limsup() const { return positive && limsup_reciprocal_finite; }
};

GrowthReport growth_condition_check(const GrowthFunction& sigma, double t_max);

enum class SequenceMode { weak, strong, penalized };

struct SequenceEntry {
  int k = 0;
  bool found = false;
  bool boundary_hit = false;
  Vec x;  // chart point
  double value = 0.0;
  double grad_norm = 0.0;
  double hess_max_eigen = 0.0;
  double phi = 1.0;                     // penalized mode
  double grad_identity_residual = 0.0;  // penalized mode
};

struct SequenceRecord {
  SequenceMode mode = SequenceMode::weak;
  double truncation = 0.0;
  double sup_estimate = 0.0;
  double g_at_x0 = 0.0;  // penalized mode
  std::vector<SequenceEntry> entries;
  bool all_found() const {
    for (const auto& e : entries)
      if (!e.found) return false;
    return !entries.empty();
  }
};

struct SequenceConfig {
  int samples = 500;
  int refine_iters = 80;
  double tol = 1e-7;  // slack on the 1/k thresholds
  std::uint64_t seed = 0;
};

using ChartField = std::function<double(const Vec&)>;

/// For each k <= k_max, a chart point with g(x_k) > g* - 1/k and
/// lambda_max(Hess g) <= 1/k, searched on the chart domain truncated to
/// |coordinate| <= truncation per axis.  g* comes from global sampling plus
/// local ascent.  Missing points are recorded, never fabricated.
SequenceRecord weak_hessian_sequence(const immersions::ParametricImmersion& f,
                                     const ChartField& g, double truncation,
                                     int k_max, const SequenceConfig& cfg = {});

/// Adds the gradient condition ||grad g(x_k)|| < 1/k.
SequenceRecord strong_hessian_sequence(
    const immersions::ParametricImmersion& f, const ChartField& g,
    double truncation, int k_max, const SequenceConfig& cfg = {});

struct PenalizedConfig {
  double truncation = 5.0;
  int samples = 500;
  int refine_iters = 80;
  double tol = 1e-6;
  std::uint64_t seed = 0;
};

/// Penalized maximizer sequence for the radial height g on a product
/// ambient with axis factor: maximizes g_k = (g - g(x0) + 1) / phi^{1/k}
/// with phi = exp(int_0^{|z|} ds/sigma), and verifies at each maximizer the
/// first-order identity grad g = ((g - g(x0) + 1)/(k phi)) grad phi.
SequenceRecord penalized_sequence(const immersions::ParametricImmersion& f,
                                  const GrowthFunction& sigma, const Vec& x0,
                                  int k_max, const PenalizedConfig& cfg = {});

/// phi built from sigma by composite Simpson quadrature of 1/sigma.
double penalty_factor(const GrowthFunction& sigma, double z_norm);

}  // namespace curvbound::principles
