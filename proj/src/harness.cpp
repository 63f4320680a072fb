#include "ncmart/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace ncmart {

namespace {

double ratio_or_zero(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double relative_gap(double value, double reference) {
  const double gap = std::abs(value - reference);
  return reference > 0.0 ? gap / reference : gap;
}

void declare_weak_checks(SuiteResult& out, const SuiteTolerances& tol) {
  const double r = tol.operator_residual;
  out.declare("cuculescu.membership", r);
  out.declare("cuculescu.commutation", r);
  out.declare("cuculescu.decreasing", r);
  out.declare("cuculescu.bounded", r);
  out.declare("cuculescu.tail_mass", tol.mass);
  out.declare("layers.disjoint", r);
  out.declare("layers.sum", r);
  out.declare("layers.domination", r);
  out.declare("layers.membership", r);
  out.declare("supports.below_layer", r);
  out.declare("supports.left_support", r);
  out.declare("supports.mass", tol.mass);
  out.declare("h.bound", 2.0 + r);
  out.declare("energy.levelwise", r);
  out.declare("energy.total", r);
  out.declare("abc.exactness", tol.exactness);
  out.declare("abc.adapted", r);
  out.declare("abc.term_a", r);
  out.declare("abc.term_b", r);
  out.declare("abc.term_c", r);
  out.declare("abc.l2", 5.0);
  out.declare("abc.theta", 144.0);
  out.declare("abc.sigma_b", 36.0);
  out.declare("abc.sigma_c", 36.0);
  out.declare("abc.square_identities", r);
  out.declare("abc.centered_sigma", r);
  out.declare("abc.centered_theta", kInfinity, false);
  out.declare("hilbert.p2", tol.hilbert);
}

void declare_regular_checks(SuiteResult& out, double k, const SuiteTolerances& tol) {
  out.declare("yz.exactness", tol.exactness);
  out.declare("yz.martingale", tol.operator_residual);
  out.declare("yz.adapted", tol.operator_residual);
  out.declare("regular.sigma_y", regular_threshold(k));
  out.declare("regular.sigma_z", regular_threshold(k));
}

void declare_bmo_checks(SuiteResult& out, const SuiteTolerances& tol) {
  const double r = tol.operator_residual;
  out.declare("bmo.upper", 1.0 + r);
  out.declare("bmo.reverse", kReverseBmoConstant + r);
  out.declare("bmo.identity", r);
  out.declare("bmo.upper_bound_gap", r);
  out.declare("bmo.sigma", r);
  out.declare("bmo.scalar_ratio", kInfinity, false);
}

// lambda_min(sum E_{n-1}|v_n|^2 - sum E_{n-1}|u_n|^2), column or row.
double conditioned_dominance(const Filtration& f, const std::vector<Operator>& u,
                             const std::vector<Operator>& v, bool row) {
  Operator gap = Operator::zero(u.front().algebra());
  for (std::size_t k = 0; k < u.size(); ++k) {
    const int n = static_cast<int>(k) + 1;
    const Operator du = row ? abs_square_adjoint(u[k]) : abs_square(u[k]);
    const Operator dv = row ? abs_square_adjoint(v[k]) : abs_square(v[k]);
    gap += f.expect_prev(n, dv - du);
  }
  return min_eigenvalue(gap.hermitian_part());
}

std::optional<double> fit_slope(const std::vector<std::pair<double, double>>& pts) {
  std::set<double> xs;
  for (const auto& [x, y] : pts) xs.insert(x);
  if (xs.size() < 2) return std::nullopt;
  const double n = static_cast<double>(pts.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

// ------------------------------------------------------------- ensemble --

Filtration make_filtration(const EnsembleSpec& spec) {
  switch (spec.family) {
    case FiltrationKind::pinching:
      return Filtration::dyadic_pinching(spec.dim, spec.levels);
    case FiltrationKind::tensor:
      return Filtration::dyadic_tensor(spec.dim, spec.levels);
    case FiltrationKind::diagonal:
      return Filtration::dyadic_diagonal(spec.dim, spec.levels);
  }
  throw StructuralError("make_filtration: unknown family");
}

Martingale ensemble_trial(const EnsembleSpec& spec, const Filtration& f, int trial) {
  const std::uint64_t s = trial_seed(spec.seed, static_cast<std::uint64_t>(trial));
  switch (spec.mode) {
    case TrialMode::positive_normalized:
      return random_martingale(f, s, EnsembleMode::positive_normalized);
    case TrialMode::self_adjoint:
      return random_martingale(f, s, EnsembleMode::self_adjoint);
    case TrialMode::k_regular:
      return random_regular_martingale(f, s, spec.k);
  }
  throw StructuralError("ensemble_trial: unknown mode");
}

// --------------------------------------------------------------- result --

void SuiteResult::declare(const std::string& check, double threshold, bool gating) {
  CheckResult& c = find(check);
  c.threshold = threshold;
  c.gating = gating;
}

void SuiteResult::record(const std::string& check, double observed, int trial,
                         std::uint64_t seed) {
  if (std::isnan(observed)) observed = kInfinity;
  CheckResult& c = find(check);
  if (c.samples == 0 || observed > c.observed) {
    c.observed = observed;
    c.worst_trial = trial;
    c.worst_seed = seed;
  }
  ++c.samples;
}

void SuiteResult::exclude(int trial, std::uint64_t seed, std::string reason) {
  excluded_.push_back({trial, seed, std::move(reason)});
}

CheckResult& SuiteResult::find(const std::string& name) {
  for (CheckResult& c : checks_)
    if (c.name == name) return c;
  checks_.push_back(CheckResult{});
  checks_.back().name = name;
  return checks_.back();
}

bool SuiteResult::has(const std::string& name) const {
  return std::any_of(checks_.begin(), checks_.end(),
                     [&](const CheckResult& c) { return c.name == name; });
}

const CheckResult& SuiteResult::check(const std::string& name) const {
  for (const CheckResult& c : checks_)
    if (c.name == name) return c;
  throw StructuralError("suite '" + name_ + "' has no check named '" + name + "'");
}

bool SuiteResult::passed() const {
  return std::all_of(checks_.begin(), checks_.end(), [](const CheckResult& c) { return c.pass(); });
}

const CheckResult* SuiteResult::worst_failure() const {
  const CheckResult* worst = nullptr;
  double worst_excess = 0.0;
  for (const CheckResult& c : checks_) {
    if (c.pass()) continue;
    const double excess = c.observed - c.threshold;
    if (!worst || excess > worst_excess) {
      worst = &c;
      worst_excess = excess;
    }
  }
  return worst;
}

void SuiteResult::merge(const SuiteResult& other) {
  for (const CheckResult& c : other.checks_) checks_.push_back(c);
  excluded_.insert(excluded_.end(), other.excluded_.begin(), other.excluded_.end());
}

// ----------------------------------------------------------- weak suite --

std::vector<double> suite_lambdas(int k_max) {
  std::set<double> grid{1.0, 2.0, 4.0, 8.0, 16.0};
  for (int k = 0; k <= k_max; ++k) grid.insert(std::ldexp(1.0, k));
  return {grid.begin(), grid.end()};
}

void weak_type_checks(const Martingale& m, int trial, std::uint64_t seed,
                      const SuiteTolerances& tol, SuiteResult& out) {
  declare_weak_checks(out, tol);
  auto rec = [&](const std::string& name, double v) { out.record(name, v, trial, seed); };
  const bool zero = op_norm(m.terminal()) == 0.0;

  const std::vector<CuculescuFamily> families = dyadic_families(m);
  const int k_max = static_cast<int>(families.size()) - 1;
  for (double lambda : suite_lambdas(k_max)) {
    const int k = static_cast<int>(std::lround(std::log2(lambda)));
    const CuculescuFamily fam = k <= k_max ? families[k] : cuculescu(m, lambda);
    const CuculescuCheck c = check_cuculescu(m, fam);
    rec("cuculescu.membership", c.membership);
    rec("cuculescu.commutation", c.commutation);
    rec("cuculescu.decreasing", -c.monotone_slack);
    rec("cuculescu.bounded", -c.bounded_slack);
    rec("cuculescu.tail_mass", c.tail_excess);
    if (zero) continue;
    const CompressionEnergy e = compression_energy(m, fam);
    double levelwise = -kInfinity;
    for (int n = 2; n <= m.levels(); ++n) {
      levelwise = std::max(levelwise, e.compressed_difference[n - 1] - e.compression_step[n - 1]);
    }
    if (m.levels() >= 2) rec("energy.levelwise", levelwise);
    rec("energy.total", e.total - 2.0 * lambda);
  }

  const SpectralLayers lay = layers(m, families);
  const LayerCheck lc = check_layers(m, families, lay);
  rec("layers.disjoint", lc.disjointness);
  rec("layers.sum", lc.partition_of_unity);
  rec("layers.domination", -lc.domination_slack);
  rec("layers.membership", lc.membership);

  const SupportFamily sup = supports(m, lay);
  const SupportCheck sc = check_supports(m, lay, sup);
  rec("supports.below_layer", -sc.below_layer_slack);
  rec("supports.left_support", -sc.left_support_slack);
  rec("supports.mass", sc.mass_excess);
  rec("h.bound", std::max(sup.h_sup, sup.h_l2));

  const AdaptedTriple t = abc_decompose(m, lay);
  rec("abc.exactness", abc_exactness_residual(m, t));
  rec("abc.adapted", abc_adaptedness_residual(m, t));
  const TermRatios terms = abc_term_excess(m, t);
  rec("abc.term_a", terms.a);
  rec("abc.term_b", terms.b);
  rec("abc.term_c", terms.c);
  const double x2 = lp_norm(m.terminal(), 2.0);
  rec("abc.l2", ratio_or_zero(abc_l2_report(t, m), x2));
  if (!zero) {
    const WeakReport w = abc_weak_report(t, m);
    rec("abc.theta", w.theta);
    rec("abc.sigma_b", w.sigma_b);
    rec("abc.sigma_c", w.sigma_c);
  } else {
    rec("abc.theta", 0.0);
    rec("abc.sigma_b", 0.0);
    rec("abc.sigma_c", 0.0);
  }
  rec("abc.square_identities", conditioned_square_identities(t, m, lay));

  const Filtration& f = m.filtration();
  const DifferenceTriple d = to_martingale_differences(f, t);
  rec("abc.centered_sigma", std::max(-conditioned_dominance(f, d.column, t.b, false),
                                     -conditioned_dominance(f, d.row, t.c, true)));
  rec("abc.centered_theta", diag_embed_weak_l1(d.diagonal));

  double hilbert = 0.0;
  for (const Operator& s : {s_col(m), s_row(m), sigma_col(m), sigma_row(m)}) {
    hilbert = std::max(hilbert, relative_gap(lp_norm(s, 2.0), x2));
  }
  rec("hilbert.p2", hilbert);
}

SuiteResult run_weak_type_suite(const EnsembleSpec& spec, const SuiteTolerances& tol) {
  SuiteResult out("weak-type");
  declare_weak_checks(out, tol);
  const Filtration f = make_filtration(spec);
  for (int i = 0; i < spec.trials; ++i) {
    const std::uint64_t s = trial_seed(spec.seed, static_cast<std::uint64_t>(i));
    weak_type_checks(ensemble_trial(spec, f, i), i, s, tol, out);
  }
  return out;
}

// -------------------------------------------------------- regular suite --

void regular_checks(const Martingale& m, double k, int trial, std::uint64_t seed,
                    const SuiteTolerances& tol, SuiteResult& out) {
  declare_regular_checks(out, k, tol);
  if (const auto bad = first_irregular_level(m, k)) {
    out.exclude(trial, seed, "not k-regular at level " + std::to_string(*bad));
    return;
  }
  auto rec = [&](const std::string& name, double v) { out.record(name, v, trial, seed); };
  const Filtration& f = m.filtration();
  const MartingalePair pair = yz_decompose(m);

  double exact = 0.0, mart = 0.0, adapted = 0.0;
  for (int n = 1; n <= m.levels(); ++n) {
    const Operator dx = m.difference(n);
    const double scale = op_norm(dx);
    const double r = op_norm(dx - pair.dy[n - 1] - pair.dz[n - 1]);
    exact = std::max(exact, scale > 0.0 ? r / scale : r);
    for (const Operator* u : {&pair.dy[n - 1], &pair.dz[n - 1]}) {
      adapted = std::max(adapted, op_norm(f.expect(n, *u) - *u));
      if (n >= 2) mart = std::max(mart, op_norm(f.expect(n - 1, *u)));
    }
  }
  rec("yz.exactness", exact);
  rec("yz.martingale", mart);
  rec("yz.adapted", adapted);
  if (op_norm(m.terminal()) == 0.0) {
    rec("regular.sigma_y", 0.0);
    rec("regular.sigma_z", 0.0);
    return;
  }
  const RegularWeakReport w = regular_weak_report(m, k, pair);
  rec("regular.sigma_y", w.sigma_y);
  rec("regular.sigma_z", w.sigma_z);
}

SuiteResult run_regular_suite(const EnsembleSpec& spec, const SuiteTolerances& tol) {
  SuiteResult out("regular");
  declare_regular_checks(out, spec.k, tol);
  EnsembleSpec s = spec;
  s.mode = TrialMode::k_regular;
  const Filtration f = make_filtration(s);
  for (int i = 0; i < s.trials; ++i) {
    const std::uint64_t seed = trial_seed(s.seed, static_cast<std::uint64_t>(i));
    regular_checks(ensemble_trial(s, f, i), s.k, i, seed, tol, out);
  }
  return out;
}

// ------------------------------------------------------------ constants --

ConstantsReport estimate_constants(const EnsembleSpec& spec, const std::vector<double>& p_grid) {
  for (double p : p_grid) {
    if (!(p >= 1.0)) throw DomainError("estimate_constants: p must be >= 1, got " + std::to_string(p));
  }
  ConstantsReport report;
  if (p_grid.empty()) return report;

  const std::size_t R = ratio_names().size();
  std::vector<std::vector<double>> max(p_grid.size(), std::vector<double>(R, 0.0));
  std::vector<std::vector<double>> sum(p_grid.size(), std::vector<double>(R, 0.0));
  std::vector<int> counted(p_grid.size(), 0);
  const bool need_candidates =
      std::any_of(p_grid.begin(), p_grid.end(), [](double p) { return p < 2.0; });

  const Filtration f = make_filtration(spec);
  for (int i = 0; i < spec.trials; ++i) {
    const std::uint64_t s = trial_seed(spec.seed, static_cast<std::uint64_t>(i));
    const Martingale m = ensemble_trial(spec, f, i);
    const CandidateSet cands = need_candidates ? constructive_candidates(m) : trivial_candidates(m);
    for (std::size_t j = 0; j < p_grid.size(); ++j) {
      const double p = p_grid[j];
      const NormReport r = norm_report(m, p, cands);
      const double lp = lp_norm(m.terminal(), p);
      report.norms.push_back({i, s, r, lp});
      if (lp == 0.0 || r.hardy_p == 0.0 || r.h_p == 0.0) continue;
      const double H = r.hardy_p, h = r.h_p;
      const double values[] = {H / lp, lp / H, h / lp, lp / h, h / H, H / h};
      for (std::size_t q = 0; q < R; ++q) {
        max[j][q] = std::max(max[j][q], values[q]);
        sum[j][q] += values[q];
      }
      ++counted[j];
    }
  }

  for (std::size_t j = 0; j < p_grid.size(); ++j) {
    for (std::size_t q = 0; q < R; ++q) {
      report.rows.push_back({p_grid[j], ratio_names()[q], max[j][q],
                             counted[j] ? sum[j][q] / counted[j] : 0.0, p_grid[j] >= 2.0,
                             counted[j], spec.seed});
    }
  }
  for (std::size_t q = 0; q < R; ++q) {
    std::vector<std::pair<double, double>> low, high;
    for (std::size_t j = 0; j < p_grid.size(); ++j) {
      const double p = p_grid[j];
      if (max[j][q] <= 0.0) continue;
      const double y = std::log(max[j][q]);
      if (p > 1.0 && p <= 2.0) low.emplace_back(std::log(1.0 / (p - 1.0)), y);
      if (p >= 2.0 && std::isfinite(p)) high.emplace_back(std::log(p), y);
    }
    report.slopes[ratio_names()[q]] = {fit_slope(low), fit_slope(high)};
  }
  return report;
}

// ------------------------------------------------------------------ BMO --

BmoTrial bmo_trial(const IndependentSequence& seq) {
  const Filtration& f = seq.filtration;
  const int N = f.levels();
  const Expectation e = filtration_expectation(f, Level0::scalar);
  Operator a = Operator::zero(f.algebra());
  Operator energy = Operator::zero(f.algebra());
  double sup = 0.0, l2_sq = 0.0;
  for (const Operator& an : seq.elements) {
    a += an;
    energy += Filtration::expect_scalar(abs_square_adjoint(an) + abs_square(an));
    sup = std::max(sup, op_norm(an));
    l2_sq += std::pow(lp_norm(an, 2.0), 2);
  }
  BmoTrial t;
  t.bmo = bmo_norms(a, e, N).bmo;
  t.bound = sup + op_norm(sqrt_psd(energy));
  t.scalar_bound = sup + std::sqrt(l2_sq);
  t.identity_residual = bmo_identity_residual(a, e, N);
  t.upper_bound_gap = t.bmo - bmo_upper_bound(a, e, N);
  t.sigma_slack = bmo_sigma_slack(a, e, N);
  return t;
}

SuiteResult run_bmo_suite(const std::vector<int>& factor_dims, int trials, std::uint64_t seed,
                          const SuiteTolerances& tol) {
  SuiteResult out("bmo");
  declare_bmo_checks(out, tol);
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t s = trial_seed(seed, static_cast<std::uint64_t>(i));
    const BmoTrial t = bmo_trial(independent_sequence(factor_dims, s));
    out.record("bmo.upper", ratio_or_zero(t.bmo, t.bound), i, s);
    out.record("bmo.reverse", ratio_or_zero(t.bound, t.bmo), i, s);
    out.record("bmo.identity", t.identity_residual, i, s);
    out.record("bmo.upper_bound_gap", t.upper_bound_gap, i, s);
    out.record("bmo.sigma", -t.sigma_slack, i, s);
    out.record("bmo.scalar_ratio", ratio_or_zero(t.bmo, t.scalar_bound), i, s);
  }
  return out;
}

// ----------------------------------------------------------- Khintchine --

std::optional<double> khintchine_ratio(const IndependentSequence& seq,
                                       const std::vector<Matrix>& b) {
  if (b.size() != seq.elements.size()) {
    throw StructuralError("khintchine_ratio: need one b_n per a_n");
  }
  const int db = static_cast<int>(b.front().rows());
  const TracialAlgebra balg(db);
  Operator col = Operator::zero(balg), row = Operator::zero(balg);
  for (const Matrix& bn : b) {
    col += Operator(bn.adjoint() * bn, balg);
    row += Operator(bn * bn.adjoint(), balg);
  }
  const double denom = std::sqrt(std::max(op_norm(col), op_norm(row)));
  if (denom == 0.0) return std::nullopt;

  std::vector<int> dims{db};
  const auto& a_dims = seq.filtration.factor_dims();
  dims.insert(dims.end(), a_dims.begin(), a_dims.end());
  const Filtration big = Filtration::tensor(dims);
  Matrix sum = Matrix::Zero(big.dim(), big.dim());
  for (std::size_t n = 0; n < b.size(); ++n) sum += kron(b[n], seq.elements[n].mat());
  const Expectation e = [&big](int n, const Operator& x) { return big.expect(n + 1, x); };
  const double bmo = bmo_norms(Operator(std::move(sum), big.algebra()), e, seq.filtration.levels()).bmo;
  return bmo / denom;
}

KhintchineReport run_khintchine_scenario(const std::vector<int>& factor_dims, int b_dim, int trials,
                                         std::uint64_t seed) {
  if (b_dim <= 0) throw StructuralError("khintchine: b dimension must be positive");
  const IndependentSequence seq = independent_sequence(factor_dims, seed);
  KhintchineReport r;
  r.alpha = kInfinity;
  for (const Operator& a : seq.elements) {
    r.alpha = std::min(r.alpha, lp_norm(a, 2.0));
    r.beta = std::max(r.beta, op_norm(a));
  }
  if (!(r.alpha > 1e-12)) {
    throw DomainError("khintchine: inf |a_n|_2 = 0 (a factor of dimension 1 carries no mean-zero element)");
  }
  for (int i = 0; i < trials; ++i) {
    Rng rng(trial_seed(seed ^ 0x6b68696eULL, static_cast<std::uint64_t>(i)));
    std::vector<Matrix> b;
    for (std::size_t n = 0; n < seq.elements.size(); ++n) b.push_back(gaussian_matrix(b_dim, b_dim, rng));
    const auto ratio = khintchine_ratio(seq, b);
    if (!ratio) {
      ++r.excluded;
      continue;
    }
    r.min_ratio = std::min(r.min_ratio, *ratio);
    r.max_ratio = std::max(r.max_ratio, *ratio);
    ++r.trials;
  }
  return r;
}

}  // namespace ncmart
