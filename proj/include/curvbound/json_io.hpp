#pragma once

#include <json.hpp>

#include "curvbound/forms.hpp"
#include "curvbound/grassmann.hpp"
#include "curvbound/spaces.hpp"

namespace curvbound {

using nlohmann::json;

inline json to_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Vec vec_from_json(const json& a) {
  Vec v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[i] = a[i].get<double>();
  return v;
}

inline json to_json(const Mat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

inline Mat mat_from_json(const json& rows) {
  const int r = static_cast<int>(rows.size());
  const int c = r > 0 ? static_cast<int>(rows[0].size()) : 0;
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rows[i][j].get<double>();
  return m;
}

namespace spaces_io {

inline const char* model_name(spaces::Model m) {
  switch (m) {
    case spaces::Model::euclidean: return "euclidean";
    case spaces::Model::sphere: return "sphere";
    case spaces::Model::hyperbolic: return "hyperbolic";
  }
  return "euclidean";
}

inline json to_json(const spaces::SpaceForm& s) {
  return json{{"model", model_name(s.model())},
              {"b", s.curvature()},
              {"dim", s.dim()}};
}

inline spaces::SpaceForm space_form_from_json(const json& j) {
  double b = j.at("b").get<double>();
  int dim = j.at("dim").get<int>();
  auto s = dim == 0 ? spaces::SpaceForm::euclidean(0)
                    : spaces::SpaceForm::with_curvature(b, dim);
  if (j.contains("model") && j["model"].get<std::string>() !=
                                 std::string(model_name(s.model())))
    throw InputError("space form descriptor: model inconsistent with sign(b)");
  return s;
}

inline json to_json(const spaces::ProductSpace& N) {
  return json{{"type", "product"},
              {"P", to_json(N.P())},
              {"Q", to_json(N.Q())},
              {"basepoint", curvbound::to_json(N.basepoint())}};
}

inline spaces::ProductSpace product_from_json(const json& j) {
  auto P = space_form_from_json(j.at("P"));
  auto Q = space_form_from_json(j.at("Q"));
  Vec o = j.contains("basepoint") ? vec_from_json(j["basepoint"])
                                  : P.base_point();
  return spaces::ProductSpace(P, Q, o);
}

}  // namespace spaces_io

namespace forms_io {

// Versioned form schema: {version, n, p, matrices: row-major upper triangles}.
inline json to_json(const forms::BilinearForm& a) {
  json mats = json::array();
  const int n = a.dim_domain();
  for (int k = 0; k < a.dim_target(); ++k) {
    json tri = json::array();
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) tri.push_back(a.coefficient(k)(i, j));
    mats.push_back(tri);
  }
  return json{{"version", 1},
              {"n", a.dim_domain()},
              {"p", a.dim_target()},
              {"matrices", mats}};
}

inline forms::BilinearForm form_from_json(const json& j) {
  const int n = j.at("n").get<int>();
  const int p = j.at("p").get<int>();
  std::vector<Mat> coeffs;
  for (int k = 0; k < p; ++k) {
    Mat A = Mat::Zero(n, n);
    const auto& tri = j.at("matrices")[k];
    int idx = 0;
    for (int i = 0; i < n; ++i)
      for (int jj = i; jj < n; ++jj) {
        A(i, jj) = tri[idx++].get<double>();
        A(jj, i) = A(i, jj);
      }
    coeffs.push_back(A);
  }
  return forms::BilinearForm(n, std::move(coeffs));
}

}  // namespace forms_io

namespace grassmann_io {

inline json to_json(const grassmann::Subspace& S) {
  return json{{"ambient_dim", S.ambient_dim()},
              {"dim", S.dim()},
              {"frame", curvbound::to_json(S.frame())}};
}

inline grassmann::Subspace subspace_from_json(const json& j) {
  return grassmann::Subspace(j.at("ambient_dim").get<int>(),
                             mat_from_json(j.at("frame")));
}

inline json to_json(const grassmann::MinMaxResult& r) {
  return json{{"value", r.value},
              {"argmin_subspace", to_json(r.argmin_subspace)},
              {"argmax_plane", to_json(r.argmax_plane)},
              {"budget_used", r.budget_used}};
}

}  // namespace grassmann_io

}  // namespace curvbound
