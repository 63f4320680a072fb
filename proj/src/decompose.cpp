#include "ncmart/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ncmart {

namespace {

Operator zero_of(const Martingale& m) { return Operator::zero(m.terminal().algebra()); }

void require_positive(const Martingale& m, const char* what) {
  if (!is_positive(m)) {
    throw DomainError(std::string(what) + ": martingale is not positive (use positive_split)");
  }
}

void require_normalized(const Martingale& m, const char* what) {
  const double t = trace(m.terminal()).real();
  if (std::abs(t - 1.0) > tol::num) {
    throw DomainError(std::string(what) + ": needs tau(x_N) = 1, got " + std::to_string(t));
  }
}

// sum_j sum_{i in I(j)} left(i) dx right(j), I(j) = {i <= j} or {i > j}.
enum class Range { at_most, above };

Operator layered_sum(int count, const Operator& dx, Range range,
                     const std::function<Operator(int)>& left,
                     const std::function<const Operator&(int)>& right) {
  Operator acc = Operator::zero(dx.algebra());
  for (int j = 0; j < count; ++j) {
    Operator lsum = Operator::zero(dx.algebra());
    for (int i = 0; i < count; ++i) {
      if ((range == Range::at_most) == (i <= j)) lsum += left(i);
    }
    acc += lsum * dx * right(j);
  }
  return acc;
}

std::vector<Operator> combine(const std::array<std::vector<Operator>, 4>& parts) {
  std::vector<Operator> out = parts[0];
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n] = Operator::zero(out[n].algebra());
    for (int k = 0; k < 4; ++k) out[n] += PositiveSplit::coefficients[k] * parts[k][n];
  }
  return out;
}

double relative(double residual, double scale) { return scale > 0.0 ? residual / scale : residual; }

}  // namespace

// ------------------------------------------------------------- triple --

AdaptedTriple abc_decompose(const Martingale& m) {
  require_positive(m, "abc_decompose");
  return abc_decompose(m, layers(m));
}

AdaptedTriple abc_decompose(const Martingale& m, const SpectralLayers& lay) {
  const int L = lay.layer_count();
  AdaptedTriple t;
  for (int n = 1; n <= m.levels(); ++n) {
    const Operator dx = m.difference(n);
    if (n == 1) {
      auto p1 = [&](int i) -> const Operator& { return lay.p(i, 1).op(); };
      t.a.push_back(zero_of(m));
      t.b.push_back(layered_sum(L, dx, Range::at_most, p1, p1));
      t.c.push_back(layered_sum(L, dx, Range::above, p1, p1));
      continue;
    }
    auto prev = [&](int j) -> const Operator& { return lay.p(j, n - 1).op(); };
    auto gap = [&](int i) { return lay.p(i, n).op() - lay.p(i, n - 1).op() * lay.p(i, n).op(); };
    auto cur = [&](int i) { return lay.p(i, n).op(); };
    auto both = [&](int i) { return lay.p(i, n - 1).op() * lay.p(i, n).op(); };
    t.a.push_back(layered_sum(L, dx, Range::above, gap, prev));
    t.b.push_back(layered_sum(L, dx, Range::at_most, cur, prev));
    t.c.push_back(layered_sum(L, dx, Range::above, both, prev));
  }
  return t;
}

double abc_exactness_residual(const Martingale& m, const AdaptedTriple& t) {
  double worst = 0.0;
  for (int n = 1; n <= m.levels(); ++n) {
    const Operator dx = m.difference(n);
    const Operator r = dx - t.a[n - 1] - t.b[n - 1] - t.c[n - 1];
    worst = std::max(worst, relative(op_norm(r), op_norm(dx)));
  }
  return worst;
}

double abc_adaptedness_residual(const Martingale& m, const AdaptedTriple& t) {
  const Filtration& f = m.filtration();
  double worst = 0.0;
  for (int n = 1; n <= m.levels(); ++n) {
    for (const auto* seq : {&t.a, &t.b, &t.c}) {
      const Operator& u = (*seq)[n - 1];
      worst = std::max(worst, op_norm(f.expect(n, u) - u));
    }
  }
  return worst;
}

TermRatios abc_term_excess(const Martingale& m, const AdaptedTriple& t) {
  TermRatios r{-kInfinity, -kInfinity, -kInfinity};
  for (int n = 1; n <= m.levels(); ++n) {
    const double dx = lp_norm(m.difference(n), 2.0);
    r.a = std::max(r.a, lp_norm(t.a[n - 1], 2.0) - 3.0 * dx);
    r.b = std::max(r.b, lp_norm(t.b[n - 1], 2.0) - dx);
    r.c = std::max(r.c, lp_norm(t.c[n - 1], 2.0) - dx);
  }
  return r;
}

double abc_l2_report(const AdaptedTriple& t, const Martingale& m) {
  (void)m;
  return lp_norm(column_square(t.a), 2.0) + lp_norm(column_square(t.b), 2.0) +
         lp_norm(row_square(t.c), 2.0);
}

WeakReport abc_weak_report(const AdaptedTriple& t, const Martingale& m) {
  require_normalized(m, "abc_weak_report");
  const Filtration& f = m.filtration();
  WeakReport w;
  w.theta = diag_embed_weak_l1(t.a);
  w.sigma_b = weak_l1_norm(conditioned_column_square(f, t.b));
  w.sigma_c = weak_l1_norm(conditioned_row_square(f, t.c));
  return w;
}

double conditioned_square_identities(const AdaptedTriple& t, const Martingale& m, const SpectralLayers& lay) {
  const Filtration& f = m.filtration();
  const int L = lay.layer_count();
  double worst = 0.0;

  // cumulative[k] = sum_{i <= k} p(i), as an independent route to the meets.
  auto cumulative = [&](int n) {
    std::vector<Operator> out;
    Operator acc = zero_of(m);
    for (int i = 0; i < L; ++i) {
      acc += lay.p(i, n).op();
      out.push_back(acc);
    }
    return out;
  };

  for (int n = 1; n <= m.levels(); ++n) {
    const Operator dx = m.difference(n);
    const Operator dxs = dx.adjoint();
    const int prev_level = std::max(n - 1, 1);
    const std::vector<Operator> cum_n = cumulative(n);
    const std::vector<Operator> cum_prev = cumulative(prev_level);
    auto pp = [&](int i) -> const Operator& { return lay.p(i, prev_level).op(); };
    auto pn = [&](int i) -> const Operator& { return lay.p(i, n).op(); };

    // |b_n|^2 side: inner(l, j) = E[dx* (sum_{i <= min(l,j)} p_{i,n}) dx]
    Operator rhs_b = zero_of(m);
    std::vector<Operator> inner_b;
    for (int k = 0; k < L; ++k) {
      Operator v = dxs * cum_n[k] * dx;
      inner_b.push_back(n == 1 ? v : f.expect(n - 1, v));
    }
    for (int l = 0; l < L; ++l)
      for (int j = 0; j < L; ++j) rhs_b += pp(l) * inner_b[std::min(l, j)] * pp(j);
    const Operator sb = abs_square(t.b[n - 1]);
    const Operator lhs_b = n == 1 ? sb : f.expect(n - 1, sb);
    worst = std::max(worst, op_norm(lhs_b - rhs_b));

    // |c_n*|^2 side: sum over l, j >= 1 and i < min(l, j).
    Operator rhs_c = zero_of(m);
    for (int l = 1; l < L; ++l) {
      for (int j = 1; j < L; ++j) {
        const Operator& below = cum_prev[std::min(l, j) - 1];
        if (n == 1) {
          rhs_c += pn(l) * dx * below * dxs * pn(j);
        } else {
          rhs_c += pp(l) * f.expect(n - 1, pn(l) * dx * below * dxs * pn(j)) * pp(j);
        }
      }
    }
    const Operator sc = abs_square_adjoint(t.c[n - 1]);
    const Operator lhs_c = n == 1 ? sc : f.expect(n - 1, sc);
    worst = std::max(worst, op_norm(lhs_c - rhs_c));
  }
  return worst;
}

// --------------------------------------------------------------- pair --

MartingalePair yz_decompose(const Martingale& m) {
  require_positive(m, "yz_decompose");
  return yz_decompose(m, layers(m));
}

MartingalePair yz_decompose(const Martingale& m, const SpectralLayers& lay) {
  const int L = lay.layer_count();
  MartingalePair out;
  for (int n = 1; n <= m.levels(); ++n) {
    const int k = std::max(n - 1, 1);
    const Operator dx = m.difference(n);
    auto p = [&](int i) -> const Operator& { return lay.p(i, k).op(); };
    auto pl = [&](int i) { return lay.p(i, k).op(); };
    out.dy.push_back(layered_sum(L, dx, Range::at_most, pl, p));
    out.dz.push_back(layered_sum(L, dx, Range::above, pl, p));
  }
  return out;
}

RegularWeakReport regular_weak_report(const Martingale& m, double k) {
  require_positive(m, "regular_weak_report");
  return regular_weak_report(m, k, yz_decompose(m));
}

RegularWeakReport regular_weak_report(const Martingale& m, double k, const MartingalePair& pair) {
  require_normalized(m, "regular_weak_report");
  if (const auto bad = first_irregular_level(m, k)) {
    throw DomainError("regular_weak_report: x_" + std::to_string(*bad) + " is not <= " +
                      std::to_string(k) + " x_" + std::to_string(*bad - 1));
  }
  const Filtration& f = m.filtration();
  RegularWeakReport r;
  r.sigma_y = weak_l1_norm(conditioned_column_square(f, pair.dy));
  r.sigma_z = weak_l1_norm(conditioned_row_square(f, pair.dz));
  return r;
}

// -------------------------------------------------------------- split --

PositiveSplit positive_split(const Martingale& m) {
  const Operator& x = m.terminal();
  const Operator re = x.hermitian_part();
  const Operator im = Complex(0.0, -0.5) * (x - x.adjoint());
  const Filtration& f = m.filtration();
  return PositiveSplit{{martingale_from_terminal(positive_part(re), f),
                        martingale_from_terminal(negative_part(re), f),
                        martingale_from_terminal(positive_part(im.hermitian_part()), f),
                        martingale_from_terminal(negative_part(im.hermitian_part()), f)}};
}

DifferenceTriple to_martingale_differences(const Filtration& f, const AdaptedTriple& t) {
  auto center = [&f](const std::vector<Operator>& u) {
    std::vector<Operator> out;
    for (std::size_t k = 0; k < u.size(); ++k) {
      const int n = static_cast<int>(k) + 1;
      out.push_back(n >= 2 ? u[k] - f.expect(n - 1, u[k]) : u[k]);
    }
    return out;
  };
  return {center(t.a), center(t.b), center(t.c)};
}

double centered_theta(const Filtration& f, const AdaptedTriple& t) {
  return diag_embed_weak_l1(to_martingale_differences(f, t).diagonal);
}

AdaptedTriple abc_decompose_general(const Martingale& m) {
  const PositiveSplit split = positive_split(m);
  std::array<std::vector<Operator>, 4> a, b, c;
  for (int k = 0; k < 4; ++k) {
    const AdaptedTriple t = abc_decompose(split.parts[k]);
    a[k] = t.a;
    b[k] = t.b;
    c[k] = t.c;
  }
  return {combine(a), combine(b), combine(c)};
}

MartingalePair yz_decompose_general(const Martingale& m) {
  const PositiveSplit split = positive_split(m);
  std::array<std::vector<Operator>, 4> dy, dz;
  for (int k = 0; k < 4; ++k) {
    const MartingalePair p = yz_decompose(split.parts[k]);
    dy[k] = p.dy;
    dz[k] = p.dz;
  }
  return {combine(dy), combine(dz)};
}

// --------------------------------------------------------------- norms --

CandidateSet constructive_candidates(const Martingale& m) {
  CandidateSet c = trivial_candidates(m);
  const bool positive = is_positive(m);
  const MartingalePair pair = positive ? yz_decompose(m) : yz_decompose_general(m);
  c.hardy.push_back({"yz", pair.dy, pair.dz});
  const AdaptedTriple t = positive ? abc_decompose(m) : abc_decompose_general(m);
  DifferenceTriple d = to_martingale_differences(m.filtration(), t);
  c.h.push_back({"abc", std::move(d.diagonal), std::move(d.column), std::move(d.row)});
  return c;
}

NormValue hardy_norm(const Martingale& m, double p) {
  if (!(p >= 1.0)) throw DomainError("hardy_norm: p must be >= 1");
  return hardy_norm(m, p, p < 2.0 ? constructive_candidates(m) : CandidateSet{});
}

NormValue h_norm(const Martingale& m, double p) {
  if (!(p >= 1.0)) throw DomainError("h_norm: p must be >= 1");
  return h_norm(m, p, p < 2.0 ? constructive_candidates(m) : CandidateSet{});
}

NormReport norm_report(const Martingale& m, double p, Level0 level0) {
  if (!(p >= 1.0)) throw DomainError("norm_report: p must be >= 1");
  return norm_report(m, p, p < 2.0 ? constructive_candidates(m) : CandidateSet{}, level0);
}

}  // namespace ncmart
