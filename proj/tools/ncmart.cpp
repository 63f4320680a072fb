#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ncmart/io.hpp"

namespace {

using namespace ncmart;

struct Options {
  int dim = 8;
  int levels = 4;
  int trials = 200;
  std::uint64_t seed = 7;
  double k = 2.0;
  std::vector<double> p_grid{1.1, 1.25, 1.5, 2.0, 4.0, 8.0};
  std::optional<double> tol;
  std::string filtration = "pinching";
  std::string out;
  std::string format = "csv";
  std::string norms_out;
  std::string dump_projections;
  std::string dump_decomposition;
  std::vector<int> factor_dims{2, 2, 2, 2};
  int b_dim = 2;
};

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("not a number in list: '" + item + "'");
    }
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (double v : parse_double_list(s)) {
    if (v != static_cast<int>(v)) throw UsageError("expected integers in list");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

// Config file values apply where the flag was not given.
void apply_config(const std::string& path, const CLI::App& app, Options& o) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("config file: ") + e.what());
  }
  if (!j.is_object()) throw UsageError("config file must hold a JSON object");
  auto unset = [&](const char* flag) { return app.get_option(flag)->count() == 0; };
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "dim") { if (unset("--dim")) o.dim = value.get<int>(); }
      else if (key == "levels") { if (unset("--levels")) o.levels = value.get<int>(); }
      else if (key == "trials") { if (unset("--trials")) o.trials = value.get<int>(); }
      else if (key == "seed") { if (unset("--seed")) o.seed = value.get<std::uint64_t>(); }
      else if (key == "k") { if (unset("--k")) o.k = value.get<double>(); }
      else if (key == "p_grid") { if (unset("--p-grid")) o.p_grid = value.get<std::vector<double>>(); }
      else if (key == "tol") { if (unset("--tol")) o.tol = value.get<double>(); }
      else if (key == "filtration") { if (unset("--filtration")) o.filtration = value.get<std::string>(); }
      else if (key == "out") { if (unset("--out")) o.out = value.get<std::string>(); }
      else if (key == "format") { if (unset("--format")) o.format = value.get<std::string>(); }
      else if (key == "factor_dims") { if (unset("--factor-dims")) o.factor_dims = value.get<std::vector<int>>(); }
      else if (key == "b_dim") { if (unset("--b-dim")) o.b_dim = value.get<int>(); }
      else throw UsageError("config file: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("config file: ") + e.what());
  }
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw UsageError("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream f(path);
  if (!f) throw UsageError("cannot write " + path);
  f << j.dump(2) << '\n';
}

EnsembleSpec ensemble(const Options& o, TrialMode mode) {
  EnsembleSpec s;
  s.dim = o.dim;
  s.levels = o.levels;
  s.family = kind_from_name(o.filtration);
  s.trials = o.trials;
  s.seed = o.seed;
  s.mode = mode;
  s.k = o.k;
  return s;
}

SuiteTolerances tolerances(const Options& o) {
  return o.tol ? SuiteTolerances::uniform(*o.tol) : SuiteTolerances{};
}

Json operators_json(const std::vector<Operator>& xs) {
  Json a = Json::array();
  for (const Operator& x : xs) a.push_back(operator_to_json(x));
  return a;
}

Json projections_json(const Martingale& m) {
  const auto families = dyadic_families(m);
  const SpectralLayers ly = layers(m, families);
  Json fam = Json::array();
  for (const CuculescuFamily& f : families) {
    for (std::size_t n = 0; n < f.q.size(); ++n) {
      fam.push_back(Json{{"lambda", f.lambda}, {"n", n + 1}, {"q", operator_to_json(f.q[n].op())}});
    }
  }
  Json lay = Json::array();
  for (int i = 0; i < ly.layer_count(); ++i) {
    for (int n = 1; n <= m.levels(); ++n) {
      lay.push_back(Json{{"i", i}, {"n", n}, {"p", operator_to_json(ly.p(i, n).op())}});
    }
  }
  return Json{{"filtration", filtration_to_json(m.filtration())},
              {"martingale", operators_json(m.values())},
              {"families", std::move(fam)},
              {"layers", std::move(lay)}};
}

Json decomposition_json(const Martingale& m) {
  const AdaptedTriple t = abc_decompose(m);
  const MartingalePair yz = yz_decompose(m);
  return Json{{"filtration", filtration_to_json(m.filtration())},
              {"a", operators_json(t.a)},
              {"b", operators_json(t.b)},
              {"c", operators_json(t.c)},
              {"dy", operators_json(yz.dy)},
              {"dz", operators_json(yz.dz)}};
}

void write_dumps(const Options& o, const Martingale& m) {
  if (!o.dump_projections.empty()) write_json_file(o.dump_projections, projections_json(m));
  if (!o.dump_decomposition.empty()) write_json_file(o.dump_decomposition, decomposition_json(m));
}

int report_suites(const Options& o, const std::vector<SuiteResult>& suites) {
  Output out(o.out);
  if (o.format == "json") {
    Json all = Json::array();
    bool pass = true;
    for (const SuiteResult& s : suites) {
      all.push_back(suite_to_json(s));
      pass = pass && s.passed();
    }
    out.stream() << Json{{"pass", pass}, {"suites", std::move(all)}}.dump(2) << '\n';
  } else {
    bool header = true;
    for (const SuiteResult& s : suites) {
      std::ostringstream body;
      write_suite_csv(body, s);
      std::string text = body.str();
      if (!header) text = text.substr(text.find('\n') + 1);
      out.stream() << text;
      header = false;
    }
  }
  int code = 0;
  for (const SuiteResult& s : suites) {
    if (const CheckResult* c = s.worst_failure()) {
      std::cerr << fmt::format("FAIL {}/{}: observed {} > threshold {} (trial {}, seed {})\n",
                               s.name(), c->name, format_double(c->observed),
                               format_double(c->threshold), c->worst_trial, c->worst_seed);
      code = 1;
    }
  }
  return code;
}

int cmd_verify(const Options& o) {
  const EnsembleSpec weak = ensemble(o, TrialMode::positive_normalized);
  const EnsembleSpec regular = ensemble(o, TrialMode::k_regular);
  const SuiteTolerances tol = tolerances(o);
  std::vector<SuiteResult> suites{run_weak_type_suite(weak, tol), run_regular_suite(regular, tol)};
  if (o.trials > 0) {
    const Filtration f = make_filtration(weak);
    write_dumps(o, ensemble_trial(weak, f, 0));
  }
  return report_suites(o, suites);
}

int cmd_constants(const Options& o) {
  const ConstantsReport r = estimate_constants(ensemble(o, TrialMode::positive_normalized), o.p_grid);
  Output out(o.out);
  if (o.format == "json") {
    out.stream() << constants_to_json(r).dump(2) << '\n';
  } else {
    write_constants_csv(out.stream(), r);
  }
  if (!o.norms_out.empty()) {
    std::ofstream f(o.norms_out);
    if (!f) throw UsageError("cannot write " + o.norms_out);
    write_norms_csv(f, r);
  }
  const double slack = o.tol.value_or(1e-8);
  int code = 0;
  for (const RatioRow& row : r.rows) {
    if (row.p == 2.0 && std::abs(row.max - 1.0) > slack) {
      std::cerr << fmt::format("FAIL p=2 {}: max {} differs from 1 (seed {})\n", row.ratio,
                               format_double(row.max), row.seed);
      code = 1;
    }
  }
  return code;
}

int cmd_bmo(const Options& o) {
  return report_suites(o, {run_bmo_suite(o.factor_dims, o.trials, o.seed, tolerances(o))});
}

int cmd_khintchine(const Options& o) {
  const KhintchineReport r = run_khintchine_scenario(o.factor_dims, o.b_dim, o.trials, o.seed);
  Output out(o.out);
  if (o.format == "json") {
    out.stream() << khintchine_to_json(r).dump(2) << '\n';
  } else {
    out.stream() << "alpha,beta,min_ratio,max_ratio,trials,excluded\n"
                 << fmt::format("{},{},{},{},{},{}\n", format_double(r.alpha), format_double(r.beta),
                                format_double(r.min_ratio), format_double(r.max_ratio), r.trials,
                                r.excluded);
  }
  return 0;
}

// ---------------------------------------------------------------- demo --

std::string num(double v) {
  if (std::abs(v) < 1e-12) v = 0.0;
  return fmt::format("{:.6g}", v);
}

std::string show(const Matrix& m) {
  const Matrix off = m - Matrix(m.diagonal().asDiagonal());
  std::vector<std::string> parts;
  if (off.cwiseAbs().maxCoeff() <= 1e-12 && m.imag().cwiseAbs().maxCoeff() <= 1e-12) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) parts.push_back(num(m(i, i).real()));
    return fmt::format("diag({})", fmt::join(parts, ", "));
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<std::string> row;
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(num(m(r, c).real()));
    parts.push_back("[" + fmt::format("{}", fmt::join(row, ", ")) + "]");
  }
  return fmt::format("[{}]", fmt::join(parts, ", "));
}

std::string show(const Operator& x) { return show(x.mat()); }
std::string show(const Projection& p) { return show(p.mat()); }

int cmd_demo(const Options& o) {
  const Filtration f = Filtration::dyadic_diagonal(4, 3);
  const Martingale m = martingale_from_terminal(Operator::diagonal({4, 0, 0, 0}), f);
  const int N = m.levels();
  Output out(o.out);
  std::ostream& os = out.stream();

  os << "filtration: dyadic diagonal, d = 4, N = 3\n";
  for (int n = 1; n <= N; ++n) {
    os << fmt::format("x_{} = {}\n", n, show(m.value(n)));
  }
  for (int n = 1; n <= N; ++n) {
    os << fmt::format("dx_{} = {}\n", n, show(m.difference(n)));
  }

  const auto families = dyadic_families(m);
  os << fmt::format("k_max = {}\n", dyadic_kmax(m));
  for (const CuculescuFamily& fam : families) {
    for (int n = 1; n <= N; ++n) {
      os << fmt::format("q_{}^({}) = {}\n", n, num(fam.lambda), show(fam.at(n)));
    }
  }

  const SpectralLayers ly = layers(m, families);
  for (int i = 0; i < ly.layer_count(); ++i) {
    for (int n = 1; n <= N; ++n) {
      os << fmt::format("p_{{{},{}}} = {}\n", i, n, show(ly.p(i, n)));
    }
  }

  const SupportFamily sup = supports(m, ly);
  for (int i = 1; i < ly.layer_count(); ++i) {
    for (int n = 2; n <= N; ++n) {
      os << fmt::format("r_{{{},{}}} = {}\n", i, n, show(sup.r[i][n - 1]));
    }
  }
  for (int n = 2; n <= N; ++n) os << fmt::format("h_{} = {}\n", n, show(sup.h[n - 1]));
  os << fmt::format("sup |h_n| = {}, (sum |h_n|_2^2)^(1/2) = {}\n", num(sup.h_sup), num(sup.h_l2));

  const AdaptedTriple t = abc_decompose(m, ly);
  for (int n = 1; n <= N; ++n) {
    os << fmt::format("a_{0} = {1}\nb_{0} = {2}\nc_{0} = {3}\n", n, show(t.a[n - 1]),
                      show(t.b[n - 1]), show(t.c[n - 1]));
  }
  os << fmt::format("exactness residual = {}\n", num(abc_exactness_residual(m, t)));
  os << fmt::format("layer identity residual = {}\n", num(conditioned_square_identities(t, m, ly)));
  const WeakReport w = abc_weak_report(t, m);
  os << fmt::format("weak norms: theta = {}, sigma_b = {}, sigma_c = {}\n", num(w.theta),
                    num(w.sigma_b), num(w.sigma_c));

  const MartingalePair yz = yz_decompose(m, ly);
  for (int n = 1; n <= N; ++n) {
    os << fmt::format("dy_{0} = {1}\ndz_{0} = {2}\n", n, show(yz.dy[n - 1]), show(yz.dz[n - 1]));
  }
  if (is_k_regular(m, o.k)) {
    const RegularWeakReport r = regular_weak_report(m, o.k, yz);
    os << fmt::format("regular weak norms (k = {}): sigma_y = {}, sigma_z = {}\n", num(o.k),
                      num(r.sigma_y), num(r.sigma_z));
  } else {
    os << fmt::format("not {}-regular: first violation at level {}\n", num(o.k),
                      *first_irregular_level(m, o.k));
  }
  write_dumps(o, m);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical toolkit for martingales in finite-dimensional matrix algebras"};
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  std::string p_grid, factor_dims, config;
  app.add_option("--dim", o.dim, "matrix dimension")->check(CLI::PositiveNumber);
  app.add_option("--levels", o.levels, "number of filtration levels")->check(CLI::PositiveNumber);
  app.add_option("--trials", o.trials, "number of random trials")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", o.seed, "base seed (default: $NCMART_SEED or 7)");
  app.add_option("--k", o.k, "regularity constant for the regular suite")->check(CLI::Range(1.0, 1e9));
  app.add_option("--p-grid", p_grid, "comma separated exponents for constants");
  app.add_option("--tol", o.tol, "replace every residual tolerance")->check(CLI::PositiveNumber);
  app.add_option("--filtration", o.filtration, "pinching, tensor or diagonal")
      ->check(CLI::IsMember({"pinching", "tensor", "diagonal"}));
  app.add_option("--out", o.out, "report file (default: stdout)");
  app.add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--norms-out", o.norms_out, "per-trial norm CSV for constants");
  app.add_option("--dump-projections", o.dump_projections, "JSON file for Cuculescu families and layers");
  app.add_option("--dump-decomposition", o.dump_decomposition, "JSON file for the a/b/c and y/z terms");
  app.add_option("--factor-dims", factor_dims, "comma separated tensor factor dims (bmo, khintchine)");
  app.add_option("--b-dim", o.b_dim, "dimension of the coefficient algebra (khintchine)")
      ->check(CLI::PositiveNumber);
  app.add_option("--config", config, "JSON file with option values");

  auto* verify = app.add_subcommand("verify", "weak-type and regular inequality suites");
  auto* constants = app.add_subcommand("constants", "norm ratios over a p-grid");
  auto* bmo = app.add_subcommand("bmo", "BMO bounds for independent sums");
  auto* khintchine = app.add_subcommand("khintchine", "BMO ratio band for sums a_n ⊗ b_n");
  auto* demo = app.add_subcommand("demo", "dyadic worked example with every intermediate");

  if (argc <= 1) {
    std::cerr << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (app.get_option("--seed")->count() == 0) {
      if (const char* env = std::getenv("NCMART_SEED")) {
        try {
          o.seed = std::stoull(env);
        } catch (const std::exception&) {
          throw UsageError(std::string("NCMART_SEED is not an integer: ") + env);
        }
      }
    }
    if (!config.empty()) apply_config(config, app, o);
    if (!p_grid.empty()) o.p_grid = parse_double_list(p_grid);
    if (!factor_dims.empty()) o.factor_dims = parse_int_list(factor_dims);
    if (o.format != "csv" && o.format != "json") throw UsageError("format must be csv or json");

    if (verify->parsed()) return cmd_verify(o);
    if (constants->parsed()) return cmd_constants(o);
    if (bmo->parsed()) return cmd_bmo(o);
    if (khintchine->parsed()) return cmd_khintchine(o);
    if (demo->parsed()) return cmd_demo(o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const StructuralError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
