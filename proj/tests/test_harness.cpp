#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "curvbound/harness.hpp"

using namespace curvbound;
using namespace curvbound::harness;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("config JSON round trip") {
  ExperimentConfig c;
  c.experiment = "radius";
  c.catalog_entry = "round_sphere";
  c.b = -1.0;
  c.b_compare = 0.5;
  c.R = 1.25;
  c.m = 4;
  c.l = 1;
  c.d_threshold = 2;
  c.budget = 77;
  c.seed = 99;
  c.tol_sharp = 0.02;
  c.intrinsic = true;
  c.override_hypothesis = true;
  c.k_max = 7;
  c.truncation = 2.5;
  c.sigma = "affine";
  c.synthetic_sup = 0.75;
  auto c2 = ExperimentConfig::from_json(c.to_json());
  CHECK(c2.experiment == c.experiment);
  CHECK(c2.catalog_entry == c.catalog_entry);
  CHECK(c2.b == c.b);
  CHECK(c2.b_compare == c.b_compare);
  CHECK(c2.R == c.R);
  CHECK(c2.m == c.m);
  CHECK(c2.l == c.l);
  CHECK(c2.d_threshold == c.d_threshold);
  CHECK(c2.budget == c.budget);
  CHECK(c2.seed == c.seed);
  CHECK(c2.tol_sharp == c.tol_sharp);
  CHECK(c2.intrinsic == c.intrinsic);
  CHECK(c2.override_hypothesis == c.override_hypothesis);
  CHECK(c2.k_max == c.k_max);
  CHECK(c2.truncation == c.truncation);
  CHECK(c2.sigma == c.sigma);
  CHECK(c2.synthetic_sup == c.synthetic_sup);
}

TEST_CASE("radius-window validation refuses out-of-range configs") {
  ExperimentConfig c;
  c.R = 0.0;
  CHECK_THROWS_AS(c.validate_radius(), HypothesisRefusal);
  c.R = 1.6;
  c.b = 1.0;  // cap is pi/2 ~ 1.5708
  CHECK_THROWS_AS(c.validate_radius(), HypothesisRefusal);
  c.R = 1.5;
  CHECK_NOTHROW(c.validate_radius());
}

TEST_CASE("unknown experiment and catalog names are usage errors") {
  ExperimentConfig c;
  c.experiment = "nonsense";
  CHECK_THROWS_AS(run_experiment(c), InputError);
  c.experiment = "sharpness";
  c.catalog_entry = "nonsense";
  CHECK_THROWS_AS(run_experiment(c), InputError);
}

TEST_CASE("violated codimension hypothesis refuses; override scans anyway") {
  ExperimentConfig c;
  c.experiment = "minmax";
  c.catalog_entry = "flat_cylinder";
  c.R = 1.0;
  c.b = 0.0;
  c.budget = 20;
  auto rep = run_experiment(c);
  CHECK(rep.refused);
  CHECK(!rep.pass());
  CHECK(rep.refusal_reason.find("hypothesis") != std::string::npos);

  c.override_hypothesis = true;
  auto rep2 = run_experiment(c);
  CHECK(!rep2.refused);
  REQUIRE(rep2.checks.size() == 1);
  CHECK(rep2.checks[0].name == "override_scan_below_bound");
  // The flat cylinder's extrinsic curvature is identically zero, strictly
  // below the bound cb(0, 1)^2 = 1.
  CHECK(std::abs(rep2.checks[0].computed) < 1e-8);
  CHECK(rep2.checks[0].bound == doctest::Approx(1.0));
  CHECK(rep2.pass());
}

TEST_CASE("radius bound: equality, unbounded branch, and refusals") {
  ExperimentConfig c;
  c.experiment = "radius";
  c.b = -1.0;
  c.R = 1.0;

  // Synthetic curvature side at the sharp value: radius equality.
  double s = spaces::cb(-1.0, 1.0);
  c.synthetic_sup = s * s;
  auto rep = run_experiment(c);
  CHECK(!rep.refused);
  bool saw_equality = false;
  for (const auto& line : rep.checks)
    if (line.name == "radius_equality") {
      saw_equality = true;
      CHECK(line.pass);
      CHECK(line.computed == doctest::Approx(1.0).epsilon(1e-6));
    }
  CHECK(saw_equality);
  CHECK(rep.pass());

  // Curvature side below -b: no finite radius, certified branch.
  c.synthetic_sup = 0.5;  // sqrt(0.5) < 1 = sqrt(-b)
  auto rep2 = run_experiment(c);
  REQUIRE(rep2.checks.size() == 1);
  CHECK(rep2.checks[0].name == "cylindrically_unbounded_branch");
  CHECK(rep2.pass());

  // Nonpositive curvature side carries no radius information.
  c.synthetic_sup = -0.25;
  auto rep3 = run_experiment(c);
  CHECK(rep3.refused);

  // Positive ambient curvature uses a different argument entirely.
  c.b = 1.0;
  c.synthetic_sup = 1.0;
  CHECK_THROWS_AS(run_experiment(c), HypothesisRefusal);
}

TEST_CASE("scalar corollary on the round sphere") {
  ExperimentConfig c;
  c.experiment = "scalar";
  c.catalog_entry = "round_sphere";
  c.b = 0.0;
  c.R = 2.0;
  c.m = 3;
  c.budget = 20;
  auto rep = run_experiment(c);
  CHECK(!rep.refused);
  CHECK(rep.pass());
  // A product entry is not a hypersurface without axis: refused.
  c.catalog_entry = "flat_cylinder";
  c.R = 1.0;
  auto rep2 = run_experiment(c);
  CHECK(rep2.refused);
}

TEST_CASE("perturbed ambient comparison margins") {
  ExperimentConfig c;
  c.experiment = "perturbed";
  c.b = -1.0;
  c.b_compare = 0.0;
  c.R = 1.0;
  auto rep = run_experiment(c);
  CHECK(!rep.refused);
  CHECK(rep.pass());
  bool saw_strict = false;
  for (const auto& line : rep.checks)
    if (line.name == "tangential_margin_strict") {
      saw_strict = true;
      CHECK(line.computed > 0);
    }
  CHECK(saw_strict);

  // Equal curvatures: no strict line, margins still nonnegative.
  c.b_compare = -1.0;
  auto rep2 = run_experiment(c);
  CHECK(rep2.pass());
  for (const auto& line : rep2.checks)
    CHECK(line.name != "tangential_margin_strict");

  // Wrong ordering is refused.
  c.b = 0.5;
  c.b_compare = 0.0;
  CHECK_THROWS_AS(run_experiment(c), HypothesisRefusal);
}

TEST_CASE("sequence chain experiment passes on a product entry") {
  ExperimentConfig c;
  c.experiment = "chain";
  c.catalog_entry = "geodesic_sphere_cylinder";
  c.b = 0.0;
  c.R = 2.0;
  c.m = 3;
  c.l = 1;
  c.k_max = 5;
  auto rep = run_experiment(c);
  CHECK(!rep.refused);
  CHECK(rep.pass());
  CHECK(rep.details["truncation"]["hypothesis"] == "sampled");
}

TEST_CASE("reports without timestamps are byte stable") {
  ExperimentConfig c;
  c.experiment = "sharpness";
  c.catalog_entry = "geodesic_sphere_cylinder";
  c.b = 0.0;
  c.R = 2.0;
  c.m = 3;
  c.l = 1;
  c.budget = 25;
  c.no_timestamp = true;
  c.out_path = "/tmp/test_harness_rep_a.json";
  auto rep_a = run_experiment(c);
  write_report(rep_a, c);
  c.out_path = "/tmp/test_harness_rep_b.json";
  auto rep_b = run_experiment(c);
  write_report(rep_b, c);
  std::string a = slurp("/tmp/test_harness_rep_a.json");
  std::string b = slurp("/tmp/test_harness_rep_b.json");
  // Identical apart from the embedded output path, which we kept out of the
  // serialized config.
  CHECK(a == b);
  CHECK(a.find("timestamp") == std::string::npos);
  // The timestamped variant differs only by the added field.
  json j = rep_a.to_json(true);
  CHECK(j.contains("timestamp"));
  std::remove("/tmp/test_harness_rep_a.json");
  std::remove("/tmp/test_harness_rep_b.json");
}

TEST_CASE("per-sample CSV and plot data round trip") {
  std::vector<std::pair<Vec, double>> rows;
  for (int i = 0; i < 5; ++i) {
    Vec x(2);
    x << 0.1 * i, 1.0 - 0.1 * i;
    rows.emplace_back(x, 1.0 / (i + 1));
  }
  const std::string csv = "/tmp/test_harness.csv";
  write_csv(rows, csv);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "x0,x1,value");
  int count = 0;
  double x0, x1, v;
  char comma;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    ls >> x0 >> comma >> x1 >> comma >> v;
    CHECK(x0 == doctest::Approx(0.1 * count).epsilon(1e-15));
    CHECK(v == doctest::Approx(1.0 / (count + 1)).epsilon(1e-15));
    ++count;
  }
  CHECK(count == 5);
  std::remove(csv.c_str());

  ExperimentReport rep;
  rep.experiment = "perturbed";
  CheckLine cl;
  cl.name = "demo";
  cl.margin = 0.5;
  cl.pass = true;
  rep.checks.push_back(cl);
  const std::string plot = "/tmp/test_harness.plot";
  write_plot_data(rep, -1.0, plot);
  std::string content = slurp(plot);
  CHECK(content.find("demo") != std::string::npos);
  CHECK(content.find("0.5") != std::string::npos);
  std::remove(plot.c_str());
}

TEST_CASE("parallel_for runs every index once and propagates errors") {
  setenv("CURVBOUND_THREADS", "3", 1);
  CHECK(thread_cap() == 3);
  std::vector<std::atomic<int>> hits(100);
  for (auto& h : hits) h = 0;
  parallel_for(100, [&](int i) { ++hits[i]; });
  for (const auto& h : hits) CHECK(h == 1);

  CHECK_THROWS_AS(
      parallel_for(50,
                   [](int i) {
                     if (i == 17) throw InputError("boom");
                   }),
      InputError);

  setenv("CURVBOUND_THREADS", "1", 1);
  CHECK(thread_cap() == 1);
  int serial = 0;
  parallel_for(10, [&](int i) { serial += i; });
  CHECK(serial == 45);
  unsetenv("CURVBOUND_THREADS");
}
