#include "ncmart/io.hpp"

#include <ostream>

#include <fmt/format.h>

namespace ncmart {

namespace {

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json optional_number(const std::optional<double>& v) {
  return v ? number_or_null(*v) : Json(nullptr);
}

Partition partition_from_json(const Json& j, int level) {
  if (!j.is_array()) {
    throw StructuralError("filtration JSON: level " + std::to_string(level) + " is not an array");
  }
  Partition p;
  for (const Json& block : j) {
    if (!block.is_array()) throw StructuralError("filtration JSON: block is not an array");
    Block b;
    for (const Json& idx : block) {
      if (!idx.is_number_integer() || idx.get<int>() < 1) {
        throw StructuralError("filtration JSON: indices must be integers >= 1");
      }
      b.push_back(idx.get<int>() - 1);
    }
    p.push_back(std::move(b));
  }
  return p;
}

}  // namespace

std::string format_double(double v) { return fmt::format("{}", v); }

const char* kind_name(FiltrationKind k) {
  switch (k) {
    case FiltrationKind::pinching: return "pinching";
    case FiltrationKind::tensor: return "tensor";
    case FiltrationKind::diagonal: return "diagonal";
  }
  return "unknown";
}

FiltrationKind kind_from_name(const std::string& name) {
  if (name == "pinching") return FiltrationKind::pinching;
  if (name == "tensor") return FiltrationKind::tensor;
  if (name == "diagonal") return FiltrationKind::diagonal;
  throw StructuralError("unknown filtration type '" + name + "'");
}

Json operator_to_json(const Operator& x) {
  Json entries = Json::array();
  const Matrix& m = x.mat();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) entries.push_back({m(r, c).real(), m(r, c).imag()});
  return Json{{"dim", x.dim()},
              {"trace", x.algebra().normalized() ? "normalized" : "unnormalized"},
              {"entries", std::move(entries)}};
}

Operator operator_from_json(const Json& j) {
  try {
    const int d = j.at("dim").get<int>();
    const std::string trace = j.value("trace", "normalized");
    if (trace != "normalized" && trace != "unnormalized") {
      throw StructuralError("operator JSON: trace must be normalized or unnormalized");
    }
    const Json& entries = j.at("entries");
    if (d <= 0 || !entries.is_array() || entries.size() != static_cast<std::size_t>(d) * d) {
      throw StructuralError("operator JSON: expected " + std::to_string(d * d) + " entries");
    }
    Matrix m(d, d);
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) {
        const Json& e = entries[static_cast<std::size_t>(r) * d + c];
        if (!e.is_array() || e.size() != 2) {
          throw StructuralError("operator JSON: entries must be [re, im] pairs");
        }
        m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
      }
    }
    return Operator(std::move(m), TracialAlgebra(d, trace == "normalized"
                                                        ? TraceNormalization::normalized
                                                        : TraceNormalization::unnormalized));
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(std::string("operator JSON: ") + e.what());
  }
}

Json filtration_to_json(const Filtration& f) {
  Json j{{"type", kind_name(f.kind())}};
  if (f.kind() == FiltrationKind::tensor) {
    j["dims"] = f.factor_dims();
    return j;
  }
  Json levels = Json::array();
  for (const Partition& p : f.partitions()) {
    Json level = Json::array();
    for (const Block& b : p) {
      Json block = Json::array();
      for (int i : b) block.push_back(i + 1);
      level.push_back(std::move(block));
    }
    levels.push_back(std::move(level));
  }
  j["partitions"] = std::move(levels);
  return j;
}

Filtration filtration_from_json(const Json& j) {
  try {
    const FiltrationKind kind = kind_from_name(j.at("type").get<std::string>());
    if (kind == FiltrationKind::tensor) return Filtration::tensor(j.at("dims").get<std::vector<int>>());
    std::vector<Partition> levels;
    int n = 1;
    for (const Json& level : j.at("partitions")) levels.push_back(partition_from_json(level, n++));
    return kind == FiltrationKind::pinching ? Filtration::pinching(std::move(levels))
                                            : Filtration::diagonal(std::move(levels));
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(std::string("filtration JSON: ") + e.what());
  }
}

Json norm_report_to_json(const NormReport& r) {
  return Json{{"p", r.p},
              {"s_col_p", r.s_col_p},
              {"s_row_p", r.s_row_p},
              {"sigma_col_p", r.sigma_col_p},
              {"sigma_row_p", r.sigma_row_p},
              {"h_diag_p", r.h_diag_p},
              {"hardy_p", r.hardy_p},
              {"h_p", r.h_p},
              {"bmo_col", r.bmo_col},
              {"bmo_row", r.bmo_row},
              {"bmo", r.bmo},
              {"hardy_exact", r.hardy_exact},
              {"h_exact", r.h_exact}};
}

Json suite_to_json(const SuiteResult& s) {
  Json checks = Json::array();
  for (const CheckResult& c : s.checks()) {
    checks.push_back(Json{{"name", c.name},
                          {"observed", number_or_null(c.observed)},
                          {"threshold", number_or_null(c.threshold)},
                          {"pass", c.pass()},
                          {"gating", c.gating},
                          {"worst_trial", c.worst_trial},
                          {"worst_seed", c.worst_seed},
                          {"samples", c.samples}});
  }
  Json excluded = Json::array();
  for (const ExcludedTrial& e : s.excluded()) {
    excluded.push_back(Json{{"trial", e.trial}, {"seed", e.seed}, {"reason", e.reason}});
  }
  return Json{{"suite", s.name()}, {"pass", s.passed()}, {"checks", std::move(checks)},
              {"excluded", std::move(excluded)}};
}

Json constants_to_json(const ConstantsReport& r) {
  Json rows = Json::array();
  for (const RatioRow& row : r.rows) {
    rows.push_back(Json{{"p", row.p},
                        {"ratio_name", row.ratio},
                        {"max", row.max},
                        {"mean", row.mean},
                        {"exact", row.exact},
                        {"trials", row.trials},
                        {"seed", row.seed}});
  }
  Json slopes = Json::object();
  for (const auto& [name, fit] : r.slopes) {
    slopes[name] = Json{{"near_one", optional_number(fit.near_one)},
                        {"large_p", optional_number(fit.large_p)}};
  }
  return Json{{"rows", std::move(rows)}, {"slopes", std::move(slopes)}};
}

Json khintchine_to_json(const KhintchineReport& r) {
  return Json{{"alpha", r.alpha},
              {"beta", r.beta},
              {"min_ratio", number_or_null(r.min_ratio)},
              {"max_ratio", r.max_ratio},
              {"trials", r.trials},
              {"excluded", r.excluded}};
}

void write_constants_csv(std::ostream& os, const ConstantsReport& r) {
  os << "p,ratio_name,max,mean,exact,trials,seed\n";
  for (const RatioRow& row : r.rows) {
    os << fmt::format("{},{},{},{},{},{},{}\n", format_double(row.p), row.ratio,
                      format_double(row.max), format_double(row.mean), row.exact ? "true" : "false",
                      row.trials, row.seed);
  }
}

void write_norms_csv(std::ostream& os, const ConstantsReport& r) {
  os << "trial,seed,p,lp,s_col_p,s_row_p,sigma_col_p,sigma_row_p,h_diag_p,hardy_p,h_p,"
        "bmo_col,bmo_row,bmo,hardy_exact,h_exact\n";
  for (const NormRecord& n : r.norms) {
    const NormReport& x = n.report;
    os << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", n.trial, n.seed,
                      format_double(x.p), format_double(n.lp), format_double(x.s_col_p),
                      format_double(x.s_row_p), format_double(x.sigma_col_p),
                      format_double(x.sigma_row_p), format_double(x.h_diag_p),
                      format_double(x.hardy_p), format_double(x.h_p), format_double(x.bmo_col),
                      format_double(x.bmo_row), format_double(x.bmo),
                      x.hardy_exact ? "true" : "false", x.h_exact ? "true" : "false");
  }
}

void write_suite_csv(std::ostream& os, const SuiteResult& s) {
  os << "suite,check,observed,threshold,pass,gating,worst_trial,worst_seed,samples\n";
  for (const CheckResult& c : s.checks()) {
    os << fmt::format("{},{},{},{},{},{},{},{},{}\n", s.name(), c.name, format_double(c.observed),
                      format_double(c.threshold), c.pass() ? "true" : "false",
                      c.gating ? "true" : "false", c.worst_trial, c.worst_seed, c.samples);
  }
}

}  // namespace ncmart
