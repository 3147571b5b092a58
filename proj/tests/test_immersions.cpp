#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "curvbound/immersions.hpp"
#include "oracles.hpp"

using namespace curvbound;
using namespace curvbound::immersions;
using grassmann::Plane;

namespace {

Plane random_frame_plane(int m, Rng& rng) {
  while (true) {
    Vec u = random_unit_vector(m, rng), v = random_unit_vector(m, rng);
    if (std::abs(u.dot(v)) < 0.9) return Plane(u, v);
  }
}

}  // namespace

TEST_CASE("round sphere is umbilic with curvature 1/R^2") {
  const double R = 2.0;
  for (int m : {2, 3}) {
    auto f = round_sphere(R, m);
    CHECK(f.codimension() == 1);
    Rng rng(1);
    for (const auto& x : sample_chart(f, 6, 0.05)) {
      auto d = fundamental_forms(f, x);
      // Umbilic: ||alpha(X,X)|| = 1/R for every unit X.
      for (int t = 0; t < 10; ++t) {
        Vec X = random_unit_vector(m, rng);
        CHECK(d.second_fundamental_form.diagonal_norm(X) ==
              doctest::Approx(1.0 / R).epsilon(1e-6));
      }
      CHECK(d.mean_curvature.norm() == doctest::Approx(1.0 / R).epsilon(1e-6));
      Plane sigma = random_frame_plane(m, rng);
      CHECK(extrinsic_curvature(f, d, sigma) ==
            doctest::Approx(1.0 / (R * R)).epsilon(1e-5));
      // Flat ambient: intrinsic == extrinsic.
      CHECK(intrinsic_curvature(f, d, sigma) ==
            doctest::Approx(1.0 / (R * R)).epsilon(1e-5));
      // Induced metric is positive definite and consistent with the frame.
      CHECK(d.induced_metric.rows() == m);
      CHECK((d.tangent_frame.transpose() * d.tangent_frame -
             Mat::Identity(m, m))
                .norm() < 1e-6);
    }
  }
}

TEST_CASE("flat plane has vanishing second fundamental form") {
  auto f = flat_plane(3);
  Rng rng(2);
  for (const auto& x : sample_chart(f, 5, 0.05)) {
    auto d = fundamental_forms(f, x);
    for (int k = 0; k < d.second_fundamental_form.dim_target(); ++k)
      CHECK(d.second_fundamental_form.coefficient(k).norm() < 1e-7);
    Plane sigma = random_frame_plane(3, rng);
    CHECK(std::abs(extrinsic_curvature(f, d, sigma)) < 1e-7);
  }
}

TEST_CASE("flat cylinder: extrinsically flat, principal curvatures 1/R and 0") {
  const double R = 1.5;
  auto f = flat_cylinder(R);
  for (const auto& x : sample_chart(f, 5, 0.05)) {
    auto d = fundamental_forms(f, x);
    REQUIRE(d.second_fundamental_form.dim_target() == 1);
    Eigen::SelfAdjointEigenSolver<Mat> es(
        d.second_fundamental_form.coefficient(0));
    Vec ev = es.eigenvalues().cwiseAbs();
    std::sort(ev.data(), ev.data() + ev.size());
    CHECK(ev[0] < 1e-6);
    CHECK(ev[1] == doctest::Approx(1.0 / R).epsilon(1e-6));
    Plane sigma(Vec::Unit(2, 0), Vec::Unit(2, 1));
    CHECK(std::abs(extrinsic_curvature(f, d, sigma)) < 1e-7);
  }
}

TEST_CASE("clifford surface: extrinsic -1, intrinsic 0, codimension rank 1") {
  auto f = clifford_torus(2);
  CHECK(f.chart_dim() == 2);
  for (const auto& x : sample_chart(f, 8, 0.05)) {
    auto d = fundamental_forms(f, x);
    Plane sigma(Vec::Unit(2, 0), Vec::Unit(2, 1));
    CHECK(extrinsic_curvature(f, d, sigma) ==
          doctest::Approx(-1.0).epsilon(1e-5));
    CHECK(std::abs(intrinsic_curvature(f, d, sigma)) < 1e-4);
    CHECK(forms::algebraic_codimension(d.second_fundamental_form, 1e-5) == 1);
  }
}

TEST_CASE("geodesic sphere cylinders have the comparison principal values") {
  // Sphere directions carry cb(b, R); the axis direction is totally geodesic.
  struct Case {
    double b, R;
    int m, l;
  };
  for (const Case& c : {Case{-1.0, 1.0, 3, 1}, Case{0.0, 2.0, 3, 1},
                        Case{1.0, 0.7, 3, 0}}) {
    auto f = geodesic_sphere_cylinder(c.b, c.m, c.R, c.l);
    const int mc = f.chart_dim();
    CHECK(mc == c.m - 1 + c.l);
    CHECK(f.codimension() == 1);
    const double k = spaces::cb(c.b, c.R);
    for (const auto& x : sample_chart(f, 4, 0.05)) {
      auto d = fundamental_forms(f, x);
      Eigen::SelfAdjointEigenSolver<Mat> es(
          d.second_fundamental_form.coefficient(0));
      Vec ev = es.eigenvalues().cwiseAbs();
      std::sort(ev.data(), ev.data() + ev.size());
      // l zeros then m-1 copies of cb(b, R).
      for (int i = 0; i < c.l; ++i) CHECK(ev[i] < 1e-5);
      for (int i = c.l; i < mc; ++i)
        CHECK(ev[i] == doctest::Approx(k).epsilon(1e-5));
    }
  }
}

TEST_CASE("intrinsic curvature agrees with the finite-difference tensor") {
  std::vector<ParametricImmersion> cases;
  cases.push_back(round_sphere(2.0, 3));
  cases.push_back(geodesic_sphere_cylinder(-1.0, 3, 1.2, 1));
  cases.push_back(clifford_torus(2));
  Rng rng(7);
  for (const auto& f : cases) {
    const int m = f.chart_dim();
    for (const auto& x : sample_chart(f, 3, 0.2)) {
      for (int t = 0; t < 3; ++t) {
        Plane sigma = random_frame_plane(m, rng);
        double got = intrinsic_curvature(f, x, sigma);
        double oracle = oracles::fd_sectional_curvature(
            f, x, sigma.basis_x(), sigma.basis_y());
        CHECK(got == doctest::Approx(oracle).epsilon(0).scale(1.0).epsilon(
                         1e-3));
      }
    }
  }
}

TEST_CASE("scalar and Ricci data of the round sphere") {
  const double R = 2.0;
  const int m = 3;
  auto f = round_sphere(R, m);
  for (const auto& x : sample_chart(f, 3, 0.1)) {
    auto sr = scalar_and_ricci(f, x);
    CHECK(sr.scalar == doctest::Approx(1.0 / (R * R)).epsilon(1e-4));
    REQUIRE(sr.ricci_eigenvalues.size() == m);
    for (int i = 0; i < m; ++i)
      CHECK(sr.ricci_eigenvalues[i] ==
            doctest::Approx((m - 1) / (R * R)).epsilon(1e-4));
  }
}

TEST_CASE("assembled radial Hessian matches direct chart differentiation") {
  const double b = -1.0;
  auto f = geodesic_sphere_cylinder(b, 3, 1.0, 1);
  const auto& N = f.ambient();
  auto field = [&](const Vec& x) {
    Vec y = f.evaluate(x);
    return spaces::psi(b, N.P().distance(N.p_part(y), N.basepoint()));
  };
  for (const auto& x : sample_chart(f, 5, 0.1)) {
    auto pr = pullback_radial(f, x, b);
    auto fd = chart_field_derivatives(f, field, x);
    CHECK(pr.g == doctest::Approx(fd.value).epsilon(1e-10));
    CHECK((pr.grad - fd.grad_frame).norm() < 1e-5);
    CHECK((pr.hess - fd.hess_frame).norm() < 1e-5);
  }
}

TEST_CASE("trace identity for pulled-back ambient functions") {
  // trace Hess(h o f) = sum_i Hess^N h(E_i, E_i) + m <grad h, H>.
  const double b = 0.0;
  auto f = geodesic_sphere_cylinder(b, 3, 2.0, 1);
  const auto& N = f.ambient();
  const int m = f.chart_dim();
  for (const auto& x : sample_chart(f, 5, 0.1)) {
    auto pr = pullback_radial(f, x, b);
    auto d = fundamental_forms(f, x);
    auto rh = spaces::modified_radial_height(N, b, d.point);
    double ambient_trace = 0;
    for (int i = 0; i < m; ++i)
      ambient_trace += spaces::modified_radial_hessian(
          N, b, d.point, d.tangent_frame.col(i), d.tangent_frame.col(i));
    Vec Hvec = d.normal_frame * d.mean_curvature;
    double expected = ambient_trace + m * N.metric_dot(rh.grad, Hvec);
    CHECK(pr.hess.trace() == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("scan_minmax: refusal and sup on the round sphere") {
  auto f = round_sphere(1.0, 3);
  auto pts = sample_chart(f, 4, 0.1);
  CHECK_THROWS_AS(scan_minmax(f, pts, 3, {}), InputError);
  grassmann::OptimizerConfig cfg;
  cfg.starts = 12;
  cfg.max_iters = 40;
  auto r = scan_minmax(f, pts, 1, cfg);
  CHECK(r.sup_value == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.per_point.size() == pts.size());
}

TEST_CASE("tabulated charts reproduce the source immersion") {
  auto f = round_sphere(1.0, 2);
  const std::string path = "/tmp/test_tab_chart.json";
  save_tabulated_chart(f, {48, 48}, path);
  auto g = load_tabulated_chart(path);
  CHECK(g.chart_dim() == 2);
  CHECK(g.domain_box().isApprox(f.domain_box()));
  for (const auto& x : sample_chart(f, 6, 0.3)) {
    CHECK((g.evaluate(x) - f.evaluate(x)).norm() < 1e-4);
    Plane sigma(Vec::Unit(2, 0), Vec::Unit(2, 1));
    double kf = extrinsic_curvature(f, x, sigma);
    double kg = extrinsic_curvature(g, x, sigma);
    CHECK(std::abs(kf - kg) < 2e-2);
  }
  std::remove(path.c_str());
}

TEST_CASE("chart sampling is deterministic and respects margins") {
  auto f = flat_cylinder(1.0);
  auto a = sample_chart(f, 10, 0.2);
  auto b2 = sample_chart(f, 10, 0.2);
  REQUIRE(a.size() == 10);
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].isApprox(b2[i]));
    CHECK(f.in_domain(a[i], 0.2));
  }
  Vec outside(2);
  outside << 7.0, 0.0;
  CHECK(!f.in_domain(outside));
  Vec clamped = f.clamp_to_domain(outside, 0.1);
  CHECK(f.in_domain(clamped, 0.05));
}

TEST_CASE("catalog metadata") {
  CHECK(catalog_info(round_sphere(1.0, 2)).codimension_ok);   // 1 < 2
  CHECK(!catalog_info(flat_cylinder(1.0)).codimension_ok);    // 1 == 2 - 1
  CHECK(catalog_info(geodesic_sphere_cylinder(0.0, 3, 2.0, 1)).codimension_ok);
  CHECK(catalog_names().size() == 5);
}
