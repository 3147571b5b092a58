#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "curvbound/harness.hpp"

namespace {

using namespace curvbound;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitRefusal = 2;
constexpr int kExitUsage = 3;

harness::ExperimentConfig load_config(const std::string& config_path) {
  if (config_path.empty()) return {};
  std::ifstream in(config_path);
  if (!in) throw InputError("cannot open config file: " + config_path);
  json j;
  in >> j;
  return harness::ExperimentConfig::from_json(j);
}

void print_report(const harness::ExperimentReport& rep) {
  if (rep.refused) {
    std::cout << "REFUSED: " << rep.refusal_reason << "\n";
    return;
  }
  for (const auto& c : rep.checks) {
    std::cout << (c.pass ? "PASS" : "FAIL") << "  " << c.name
              << "  computed=" << c.computed << "  bound=" << c.bound
              << "  margin=" << c.margin << "\n";
  }
  std::cout << (rep.pass() ? "all checks passed" : "some checks failed")
            << "\n";
}

int run_verify(const harness::ExperimentConfig& cfg) {
  auto rep = harness::run_experiment(cfg);
  harness::write_report(rep, cfg);
  print_report(rep);
  if (rep.refused) return kExitRefusal;
  return rep.pass() ? kExitPass : kExitFail;
}

forms::BilinearForm load_or_random_form(const std::string& form_path, int n,
                                        int p, std::uint64_t seed) {
  if (!form_path.empty()) {
    std::ifstream in(form_path);
    if (!in) throw InputError("cannot open form file: " + form_path);
    json j;
    in >> j;
    return forms_io::form_from_json(j);
  }
  return forms::random_form(n, p, seed);
}

void emit(const json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(out_path);
    if (!out) throw InputError("cannot open output path: " + out_path);
    out << j.dump(2) << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curvature-bound verification toolkit"};
  app.require_subcommand(1);

  harness::ExperimentConfig cfg;
  std::string config_path, experiment, form_path, mode = "weak";
  std::string report_path;
  int n = 3, p = 1, d_threshold = 1;
  double lambda = 0.0, tol = -1.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--seed", cfg.seed, "RNG seed");
    sub->add_option("--budget", cfg.budget, "sampling budget");
    sub->add_option("--tol", tol, "tolerance override");
    sub->add_option("--out", cfg.out_path, "output path");
  };

  auto* verify = app.add_subcommand("verify", "run a named experiment");
  verify->add_option("experiment", experiment, "experiment name")->required();
  add_common(verify);
  verify->add_option("--entry", cfg.catalog_entry, "catalog entry");
  verify->add_option("--b", cfg.b, "first-factor curvature");
  verify->add_option("--b-compare", cfg.b_compare, "comparison curvature");
  verify->add_option("--R", cfg.R, "radius");
  verify->add_option("--m", cfg.m, "first-factor dimension");
  verify->add_option("--l", cfg.l, "axis dimension");
  verify->add_option("--d", cfg.d_threshold, "subspace dimension threshold");
  verify->add_option("--k-max", cfg.k_max, "sequence length");
  verify->add_option("--truncation", cfg.truncation, "chart truncation");
  verify->add_option("--sigma", cfg.sigma, "growth function name");
  verify->add_option("--synthetic-sup", cfg.synthetic_sup,
                     "synthetic curvature side");
  verify->add_flag("--intrinsic", cfg.intrinsic, "intrinsic variant");
  verify->add_flag("--override", cfg.override_hypothesis,
                   "scan despite a violated hypothesis");
  verify->add_flag("--no-timestamp", cfg.no_timestamp,
                   "omit timestamp for byte-stable reports");
  verify->add_option("--csv", cfg.csv_path, "per-sample CSV path");
  verify->add_option("--plot", cfg.plot_path, "plot-data path");

  auto* minmax = app.add_subcommand("minmax", "min-max functional of a form");
  add_common(minmax);
  minmax->add_option("--form", form_path, "form JSON file");
  minmax->add_option("--n", n, "domain dimension");
  minmax->add_option("--p", p, "target dimension");
  minmax->add_option("--d", d_threshold, "subspace dimension threshold");

  auto* otsuki = app.add_subcommand("otsuki", "diagonal-norm lemma check");
  add_common(otsuki);
  otsuki->add_option("--form", form_path, "form JSON file");
  otsuki->add_option("--n", n, "domain dimension");
  otsuki->add_option("--p", p, "target dimension");
  otsuki->add_option("--lambda", lambda, "curvature ceiling");

  auto* sequence = app.add_subcommand("sequence", "maximizer sequences");
  add_common(sequence);
  sequence->add_option("--mode", mode, "weak | strong | penalized");
  sequence->add_option("--entry", cfg.catalog_entry, "catalog entry");
  sequence->add_option("--b", cfg.b, "first-factor curvature");
  sequence->add_option("--R", cfg.R, "radius");
  sequence->add_option("--m", cfg.m, "first-factor dimension");
  sequence->add_option("--l", cfg.l, "axis dimension");
  sequence->add_option("--k-max", cfg.k_max, "sequence length");
  sequence->add_option("--truncation", cfg.truncation, "chart truncation");
  sequence->add_option("--sigma", cfg.sigma, "growth function name");

  auto* catalog = app.add_subcommand("catalog", "catalog queries");
  auto* catalog_list = catalog->add_subcommand("list", "list entries");

  auto* report = app.add_subcommand("report", "report utilities");
  auto* report_render = report->add_subcommand("render", "render a report");
  report_render->add_option("--in", report_path, "report JSON path")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (!config_path.empty()) {
      auto file_cfg = load_config(config_path);
      std::string keep_out = cfg.out_path;
      auto keep_seed = cfg.seed;
      cfg = file_cfg;
      if (!keep_out.empty()) cfg.out_path = keep_out;
      if (keep_seed != 0) cfg.seed = keep_seed;
    }
    if (tol > 0) {
      cfg.tol_sharp = tol;
      cfg.tol_analytic = tol;
    }

    if (verify->parsed()) {
      cfg.experiment = experiment;
      return run_verify(cfg);
    }

    if (minmax->parsed()) {
      auto alpha = load_or_random_form(form_path, n, p, cfg.seed);
      grassmann::PlaneOracle oracle = [&](const grassmann::Plane& s) {
        return forms::curvature_plane(alpha, s);
      };
      grassmann::OptimizerConfig ocfg;
      ocfg.seed = cfg.seed;
      auto r = grassmann::minmax_functional(oracle, alpha.dim_domain(),
                                            d_threshold, ocfg);
      emit(grassmann_io::to_json(r), cfg.out_path);
      return kExitPass;
    }

    if (otsuki->parsed()) {
      auto alpha = load_or_random_form(form_path, n, p, cfg.seed);
      grassmann::OptimizerConfig ocfg;
      ocfg.seed = cfg.seed;
      auto r = forms::check_otsuki(alpha, lambda, ocfg);
      json j{{"lambda", r.lambda},
             {"best_plane_value", r.best_plane_value},
             {"best_diagonal_norm", r.best_diagonal_norm},
             {"condition_i_violated", r.condition_i_violated_witness.has_value()},
             {"condition_ii_violated",
              r.condition_ii_violated_witness.has_value()},
             {"consistent", r.consistent}};
      emit(j, cfg.out_path);
      return r.consistent ? kExitPass : kExitFail;
    }

    if (sequence->parsed()) {
      auto f = harness::make_catalog_entry(cfg);
      const auto& N = f.ambient();
      double b = cfg.b;
      principles::ChartField g = [&, b](const Vec& x) {
        Vec y = f.evaluate(x);
        return spaces::psi(
            b, N.P().distance(N.p_part(y), N.p_part(N.basepoint())));
      };
      principles::SequenceRecord rec;
      if (mode == "weak") {
        rec = principles::weak_hessian_sequence(f, g, cfg.truncation,
                                                cfg.k_max);
      } else if (mode == "strong") {
        rec = principles::strong_hessian_sequence(f, g, cfg.truncation,
                                                  cfg.k_max);
      } else if (mode == "penalized") {
        principles::GrowthFunction sigma =
            cfg.sigma == "affine" ? principles::GrowthFunction::affine(1, 1)
                                  : principles::GrowthFunction::constant(1);
        principles::PenalizedConfig pcfg;
        pcfg.truncation = cfg.truncation;
        Vec x0 = f.clamp_to_domain(f.domain_sample(1), 3 * f.fd().h2);
        rec = principles::penalized_sequence(f, sigma, x0, cfg.k_max, pcfg);
      } else {
        std::cerr << "unknown sequence mode: " << mode << "\n";
        return kExitUsage;
      }
      // JSON lines, one record per k.
      std::ostringstream os;
      for (const auto& e : rec.entries) {
        json j{{"k", e.k},
               {"found", e.found},
               {"boundary_hit", e.boundary_hit},
               {"value", e.value},
               {"grad_norm", e.grad_norm},
               {"hess_max_eigen", e.hess_max_eigen}};
        if (e.found) j["x"] = to_json(e.x);
        if (mode == "penalized") {
          j["phi"] = e.phi;
          j["grad_identity_residual"] = e.grad_identity_residual;
        }
        os << j.dump() << "\n";
      }
      if (cfg.out_path.empty()) {
        std::cout << os.str();
      } else {
        std::ofstream out(cfg.out_path);
        out << os.str();
      }
      return rec.all_found() ? kExitPass : kExitFail;
    }

    if (catalog_list->parsed()) {
      for (const auto& name : immersions::catalog_names())
        std::cout << name << "\n";
      return kExitPass;
    }

    if (report_render->parsed()) {
      std::ifstream in(report_path);
      if (!in) throw InputError("cannot open report: " + report_path);
      json j;
      in >> j;
      std::cout << "experiment: " << j.value("experiment", std::string("?"))
                << "\n";
      if (j.value("refused", false)) {
        std::cout << "REFUSED: " << j.value("refusal_reason", std::string())
                  << "\n";
      } else {
        for (const auto& c : j.value("checks", json::array())) {
          std::cout << (c.value("pass", false) ? "PASS" : "FAIL") << "  "
                    << c.value("name", std::string()) << "  margin="
                    << c["margin"]["value"].get<double>() << "\n";
        }
      }
      std::cout << "overall: " << (j.value("pass", false) ? "pass" : "fail")
                << "\n";
      return kExitPass;
    }
  } catch (const harness::HypothesisRefusal& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return kExitRefusal;
  } catch (const InputError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
  return kExitUsage;
}
