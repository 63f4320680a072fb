#include "ncmart/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ncmart {

namespace {

void require_nonempty(const std::vector<Operator>& d, const char* what) {
  if (d.empty()) throw StructuralError(std::string(what) + ": empty sequence");
}

void require_p(double p, const char* what) {
  if (!(p >= 1.0)) throw DomainError(std::string(what) + ": p must be >= 1");
}

Operator conditioned_sum(const Filtration& f, const std::vector<Operator>& d,
                         Operator (*square)(const Operator&)) {
  require_nonempty(d, "conditioned square function");
  Operator acc = Operator::zero(d.front().algebra());
  for (std::size_t k = 0; k < d.size(); ++k) {
    const int n = static_cast<int>(k) + 1;
    acc += f.expect_prev(n, square(d[k]));
  }
  return acc;
}

std::vector<Operator> zeros_like(const std::vector<Operator>& d) {
  std::vector<Operator> z;
  z.reserve(d.size());
  for (const Operator& x : d) z.push_back(Operator::zero(x.algebra()));
  return z;
}

// E(n, .) applied to every entry of a martingale built from x.
std::vector<Operator> levels_of(const Operator& x, const Expectation& e, int levels) {
  std::vector<Operator> v;
  v.reserve(levels + 1);
  for (int n = 0; n <= levels; ++n) v.push_back(e(n, x));
  return v;
}

double column_oscillation(const Operator& a, const Expectation& e, int levels) {
  double worst = 0.0;
  for (int n = 1; n <= levels; ++n) {
    const Operator osc = a - e(n - 1, a);
    worst = std::max(worst, op_norm(e(n, abs_square(osc))));
  }
  return std::sqrt(worst);
}

}  // namespace

Operator column_square(const std::vector<Operator>& d) {
  require_nonempty(d, "column_square");
  Operator acc = Operator::zero(d.front().algebra());
  for (const Operator& x : d) acc += abs_square(x);
  return sqrt_psd(acc);
}

Operator row_square(const std::vector<Operator>& d) {
  require_nonempty(d, "row_square");
  Operator acc = Operator::zero(d.front().algebra());
  for (const Operator& x : d) acc += abs_square_adjoint(x);
  return sqrt_psd(acc);
}

Operator conditioned_column_square(const Filtration& f, const std::vector<Operator>& d) {
  return sqrt_psd(conditioned_sum(f, d, abs_square));
}

Operator conditioned_row_square(const Filtration& f, const std::vector<Operator>& d) {
  return sqrt_psd(conditioned_sum(f, d, abs_square_adjoint));
}

Operator s_col(const Martingale& m) { return column_square(m.differences()); }
Operator s_row(const Martingale& m) { return row_square(m.differences()); }
Operator sigma_col(const Martingale& m) {
  return conditioned_column_square(m.filtration(), m.differences());
}
Operator sigma_row(const Martingale& m) {
  return conditioned_row_square(m.filtration(), m.differences());
}

double diagonal_norm(const std::vector<Operator>& d, double p) {
  require_p(p, "diagonal_norm");
  if (std::isinf(p)) {
    double s = 0.0;
    for (const Operator& x : d) s = std::max(s, op_norm(x));
    return s;
  }
  double acc = 0.0;
  for (const Operator& x : d) acc += std::pow(lp_norm(x, p), p);
  return std::pow(acc, 1.0 / p);
}

double diag_embed_weak_l1(const std::vector<Operator>& d) {
  if (d.empty()) return 0.0;
  std::vector<double> pooled;
  for (const Operator& x : d) {
    const RealVector s = singular_values(x);
    pooled.insert(pooled.end(), s.data(), s.data() + s.size());
  }
  return weak_l1_from_values(std::move(pooled), d.front().algebra().unit_mass());
}

CandidateSet trivial_candidates(const Martingale& m) {
  const std::vector<Operator> dx = m.differences();
  const std::vector<Operator> zero = zeros_like(dx);
  CandidateSet c;
  c.hardy.push_back({"column", dx, zero});
  c.hardy.push_back({"row", zero, dx});
  c.h.push_back({"diagonal", dx, zero, zero});
  c.h.push_back({"column", zero, dx, zero});
  c.h.push_back({"row", zero, zero, dx});
  return c;
}

NormValue hardy_norm(const Martingale& m, double p, const CandidateSet& candidates) {
  require_p(p, "hardy_norm");
  if (p >= 2.0) {
    return {std::max(lp_norm(s_col(m), p), lp_norm(s_row(m), p)), true};
  }
  double best = std::numeric_limits<double>::infinity();
  for (const HardySplit& s : candidates.hardy) {
    best = std::min(best, lp_norm(column_square(s.column), p) + lp_norm(row_square(s.row), p));
  }
  if (candidates.hardy.empty()) throw StructuralError("hardy_norm: no candidate splittings");
  return {best, false};
}

NormValue h_norm(const Martingale& m, double p, const CandidateSet& candidates) {
  require_p(p, "h_norm");
  const Filtration& f = m.filtration();
  if (p >= 2.0) {
    const std::vector<Operator> dx = m.differences();
    const double v = std::max({diagonal_norm(dx, p), lp_norm(sigma_col(m), p),
                               lp_norm(sigma_row(m), p)});
    return {v, true};
  }
  if (candidates.h.empty()) throw StructuralError("h_norm: no candidate triples");
  double best = std::numeric_limits<double>::infinity();
  for (const HTriple& t : candidates.h) {
    const double v = diagonal_norm(t.diagonal, p) +
                     lp_norm(conditioned_column_square(f, t.column), p) +
                     lp_norm(conditioned_row_square(f, t.row), p);
    best = std::min(best, v);
  }
  return {best, false};
}

Expectation filtration_expectation(const Filtration& f, Level0 level0) {
  return [f, level0](int n, const Operator& x) {
    if (n == 0 && level0 == Level0::scalar) return Filtration::expect_scalar(x);
    return f.expect(n, x);
  };
}

BmoNorms bmo_norms(const Operator& a, const Expectation& e, int levels) {
  BmoNorms b;
  b.col = column_oscillation(a, e, levels);
  b.row = column_oscillation(a.adjoint(), e, levels);
  b.bmo = std::max(b.col, b.row);
  return b;
}

BmoNorms bmo_norms(const Operator& a, const Filtration& f, Level0 level0) {
  return bmo_norms(a, filtration_expectation(f, level0), f.levels());
}

double bmo_identity_residual(const Operator& x, const Expectation& e, int levels) {
  const std::vector<Operator> v = levels_of(x, e, levels);
  std::vector<Operator> dx;
  for (int n = 1; n <= levels; ++n) dx.push_back(v[n] - v[n - 1]);

  double worst = 0.0;
  for (int n = 1; n <= levels; ++n) {
    const Operator lhs = e(n, abs_square(v[levels] - v[n - 1]));
    Operator tail = Operator::zero(x.algebra());
    for (int k = n + 1; k <= levels; ++k) tail += e(k - 1, abs_square(dx[k - 1]));
    const Operator rhs = abs_square(dx[n - 1]) + e(n, tail);
    worst = std::max(worst, op_norm(lhs - rhs));
  }
  return worst;
}

namespace {

Operator symmetric_conditioned_sum(const std::vector<Operator>& dx, const Expectation& e) {
  Operator acc = Operator::zero(dx.front().algebra());
  for (std::size_t k = 0; k < dx.size(); ++k) {
    acc += e(static_cast<int>(k), abs_square(dx[k]) + abs_square_adjoint(dx[k]));
  }
  return acc;
}

std::vector<Operator> oscillation_differences(const Operator& x, const Expectation& e, int levels) {
  const std::vector<Operator> v = levels_of(x, e, levels);
  std::vector<Operator> dx;
  for (int n = 1; n <= levels; ++n) dx.push_back(v[n] - v[n - 1]);
  return dx;
}

}  // namespace

double bmo_upper_bound(const Operator& x, const Expectation& e, int levels) {
  const std::vector<Operator> dx = oscillation_differences(x, e, levels);
  return diagonal_norm(dx, kInfinity) + op_norm(sqrt_psd(symmetric_conditioned_sum(dx, e)));
}

double bmo_sigma_slack(const Operator& x, const Expectation& e, int levels) {
  const std::vector<Operator> dx = oscillation_differences(x, e, levels);
  Operator sigma2 = Operator::zero(x.algebra());
  for (std::size_t k = 0; k < dx.size(); ++k) sigma2 += e(static_cast<int>(k), abs_square(dx[k]));
  return min_eigenvalue((symmetric_conditioned_sum(dx, e) - sigma2).hermitian_part());
}

NormReport norm_report(const Martingale& m, double p, const CandidateSet& candidates,
                       Level0 level0) {
  NormReport r;
  r.p = p;
  r.s_col_p = lp_norm(s_col(m), p);
  r.s_row_p = lp_norm(s_row(m), p);
  r.sigma_col_p = lp_norm(sigma_col(m), p);
  r.sigma_row_p = lp_norm(sigma_row(m), p);
  r.h_diag_p = diagonal_norm(m.differences(), p);
  const NormValue hardy = hardy_norm(m, p, candidates);
  const NormValue h = h_norm(m, p, candidates);
  r.hardy_p = hardy.value;
  r.hardy_exact = hardy.exact;
  r.h_p = h.value;
  r.h_exact = h.exact;
  const BmoNorms b = bmo_norms(m.terminal(), m.filtration(), level0);
  r.bmo_col = b.col;
  r.bmo_row = b.row;
  r.bmo = b.bmo;
  return r;
}

}  // namespace ncmart
