#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "curvbound/immersions.hpp"
#include "curvbound/json_io.hpp"
#include "curvbound/principles.hpp"

namespace curvbound::harness {

/// Thrown when a config violates a stated hypothesis of the estimate being
/// verified; callers map it to the dedicated refusal exit code.
struct HypothesisRefusal : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string experiment = "sharpness";
  std::string catalog_entry = "geodesic_sphere_cylinder";
  double b = 0.0;
  double b_compare = 0.0;  // perturbed-ambient comparison curvature
  double R = 2.0;
  int m = 3;  // first-factor dimension for the catalog entry
  int l = 0;
  int d_threshold = -1;  // -1: derived as codimension + l
  int budget = 200;
  std::uint64_t seed = 0;
  double tol_sharp = 0.01;    // relative, discretization-dominated equalities
  double tol_analytic = 1e-6;
  bool intrinsic = false;
  bool override_hypothesis = false;
  bool no_timestamp = false;
  int k_max = 10;
  double truncation = 3.0;
  std::string sigma = "constant";  // constant | affine | affine_squared
  double synthetic_sup = std::numeric_limits<double>::quiet_NaN();
  std::string out_path;
  std::string csv_path;
  std::string plot_path;

  /// Validates the radius window 0 < R < min{inj, pi/(2 sqrt(b))} (the
  /// second clause only for b > 0).  Throws HypothesisRefusal.
  void validate_radius() const;

  static ExperimentConfig from_json(const json& j);
  json to_json() const;
};

struct CheckLine {
  std::string name;
  double computed = 0.0;
  double bound = 0.0;
  double margin = 0.0;  // computed - bound
  bool pass = false;
  std::string computed_provenance = "computed";
  std::string bound_provenance = "analytic-bound";
};

struct ExperimentReport {
  std::string experiment;
  bool refused = false;
  std::string refusal_reason;
  std::vector<CheckLine> checks;
  json details = json::object();

  bool pass() const {
    if (refused) return false;
    for (const auto& c : checks)
      if (!c.pass) return false;
    return !checks.empty();
  }
  json to_json(bool with_timestamp) const;
};

/// Builds the configured catalog entry.
immersions::ParametricImmersion make_catalog_entry(const ExperimentConfig& c);

/// sup over sampled points of the min-max curvature functional, against
/// C_b^2(R) (extrinsic) or C_b^2(R) + b (intrinsic).  Entries violating
/// p < dim M - l are refused unless overridden; the override clamps the
/// subspace dimension to the full tangent space.
ExperimentReport verify_minmax_estimate(const ExperimentConfig& c);

/// Extrinsic radius bound: inverts the curvature side through cb_inverse
/// and compares with the entry's known radius.  A curvature side at or
/// below -b reports the cylindrically unbounded branch.
ExperimentReport verify_radius_bound(const ExperimentConfig& c);

/// Hypersurface scalar-curvature bound sup s >= C_b^2(R) + b, plus the
/// pointwise step s >= min-plane sectional curvature.
ExperimentReport verify_scalar_corollary(const ExperimentConfig& c);

/// Inequality chain at weak-Hessian-sequence points of the radial height:
/// Hessian upper bound 1/k, Hessian lower bound through the comparison
/// function, the resulting diagonal bound on the second fundamental form,
/// and the witnessed plane curvature, with the 1/k decay rate of the gap.
ExperimentReport verify_sequence_chain(const ExperimentConfig& c);

/// Same chain at penalized-sequence points, with the modified constant
/// (psi_b(R)+1)/k, the first-order maximizer identity, and the variant
/// bound under a squared growth cap on the second fundamental form.
ExperimentReport verify_penalized_bounds(const ExperimentConfig& c);

/// Hessian margin of a space form of curvature b' <= b against the
/// comparison profile at curvature b: nonnegative, strictly positive off
/// the radial direction when b' < b.
ExperimentReport perturbed_ambient_test(const ExperimentConfig& c);

/// Dispatch by c.experiment; throws InputError on unknown names.
ExperimentReport run_experiment(const ExperimentConfig& c);

void write_report(const ExperimentReport& r, const ExperimentConfig& c);
void write_csv(const std::vector<std::pair<Vec, double>>& rows,
               const std::string& path);
/// Gnuplot-compatible columns: comparison-function curve plus check margins.
void write_plot_data(const ExperimentReport& r, double b,
                     const std::string& path);

/// CURVBOUND_THREADS cap (falls back to hardware concurrency, min 1).
int thread_cap();
/// Index-parallel loop under the thread cap; deterministic per index.
void parallel_for(int n, const std::function<void(int)>& body);

}  // namespace curvbound::harness
