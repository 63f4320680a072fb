#include "ncmart/cuculescu.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ncmart {

namespace {

double real_trace(const Operator& x) { return trace(x).real(); }

double l2_norm(const Operator& x) { return lp_norm(x, 2.0); }

Operator compress(const Projection& q, const Operator& x) { return q.op() * x * q.op(); }

void require_positive(const Martingale& m, const char* what) {
  if (!is_positive(m)) {
    throw DomainError(std::string(what) + ": martingale is not positive (use positive_split)");
  }
}

void require_normalized(const Martingale& m, const char* what) {
  const double t = real_trace(m.terminal());
  if (std::abs(t - 1.0) > tol::num) {
    throw DomainError(std::string(what) + ": needs tau(x_N) = 1, got " + std::to_string(t));
  }
}

CuculescuFamily build_family(const Martingale& m, double lambda) {
  const TracialAlgebra alg = m.terminal().algebra();
  CuculescuFamily fam;
  fam.lambda = lambda;
  Projection prev = Projection::identity(alg);
  for (int n = 1; n <= m.levels(); ++n) {
    const Projection cut = spectral_projection(compress(prev, m.value(n)), lambda);
    Projection next(prev.op() - cut.op());
    fam.q.push_back(next);
    prev = std::move(next);
  }
  return fam;
}

}  // namespace

CuculescuFamily cuculescu(const Martingale& m, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("cuculescu: lambda must be positive");
  require_positive(m, "cuculescu");
  return build_family(m, lambda);
}

int dyadic_kmax(const Martingale& m) {
  double top = 0.0;
  for (const Operator& x : m.values()) top = std::max(top, op_norm(x));
  int k = 0;
  // ties within eps_eig count as 2^k >= top, as in spectral_projection
  while (top > std::ldexp(1.0, k) + tol::eig * std::max(1.0, std::ldexp(1.0, k))) ++k;
  return k;
}

std::vector<CuculescuFamily> dyadic_families(const Martingale& m) {
  require_positive(m, "dyadic_families");
  const int k_max = dyadic_kmax(m);
  std::vector<CuculescuFamily> out;
  out.reserve(k_max + 1);
  for (int k = 0; k <= k_max; ++k) out.push_back(build_family(m, std::ldexp(1.0, k)));
  return out;
}

SpectralLayers layers(const Martingale& m) { return layers(m, dyadic_families(m)); }

SpectralLayers layers(const Martingale& m, const std::vector<CuculescuFamily>& families) {
  if (families.empty()) throw StructuralError("layers: no dyadic families");
  const int k_max = static_cast<int>(families.size()) - 1;
  const int levels = m.levels();
  const TracialAlgebra alg = m.terminal().algebra();

  SpectralLayers out;
  out.k_max = k_max;
  out.meet.assign(k_max + 2, {});
  out.meet[k_max + 1].assign(levels, Projection::identity(alg));
  for (int i = k_max; i >= 0; --i) {
    out.meet[i].reserve(levels);
    for (int n = 1; n <= levels; ++n) {
      out.meet[i].push_back(proj_meet(families[i].at(n), out.meet[i + 1][n - 1]));
    }
  }

  out.layer.assign(k_max + 2, {});
  out.layer[0] = out.meet[0];
  for (int i = 1; i <= k_max + 1; ++i) {
    out.layer[i].reserve(levels);
    for (int n = 1; n <= levels; ++n) {
      out.layer[i].emplace_back(out.meet[i][n - 1].op() - out.meet[i - 1][n - 1].op());
    }
  }
  return out;
}

SupportFamily supports(const Martingale& m, const SpectralLayers& lay) {
  const int levels = m.levels();
  const TracialAlgebra alg = m.terminal().algebra();
  SupportFamily out;
  out.r.assign(lay.layer_count(), std::vector<Projection>(levels, Projection::zero(alg)));
  out.h.assign(levels, Operator::zero(alg));

  double l2_sq = 0.0;
  for (int n = 2; n <= levels; ++n) {
    Operator h = Operator::zero(alg);
    for (int i = 0; i < lay.layer_count(); ++i) {
      const Operator& pn = lay.p(i, n).op();
      const Operator gap = pn - lay.p(i, n - 1).op() * pn;
      h += gap;
      if (i >= 1) out.r[i][n - 1] = right_support(gap, 1.0);
    }
    out.h_sup = std::max(out.h_sup, op_norm(h));
    l2_sq += std::pow(l2_norm(h), 2);
    out.h[n - 1] = std::move(h);
  }
  out.h_l2 = std::sqrt(l2_sq);
  return out;
}

CompressionEnergy compression_energy(const Martingale& m, double lambda) {
  return compression_energy(m, cuculescu(m, lambda));
}

CompressionEnergy compression_energy(const Martingale& m, const CuculescuFamily& family) {
  require_normalized(m, "compression_energy");
  const int levels = m.levels();
  CompressionEnergy e;
  e.lambda = family.lambda;
  e.compressed_difference.assign(levels, 0.0);
  e.compression_step.assign(levels, 0.0);

  const Operator first = compress(family.at(1), m.value(1));
  e.first = std::pow(l2_norm(first), 2);
  e.total = e.first;
  Operator prev = first;
  for (int n = 2; n <= levels; ++n) {
    const Operator& qn = family.at(n).op();
    const Operator& qp = family.at(n - 1).op();
    const Operator cur = compress(family.at(n), m.value(n));
    e.compressed_difference[n - 1] = l2_norm(qn * m.difference(n) * qp);
    e.compression_step[n - 1] = l2_norm(cur - prev);
    e.total += std::pow(e.compression_step[n - 1], 2);
    prev = cur;
  }
  return e;
}

CuculescuCheck check_cuculescu(const Martingale& m, const CuculescuFamily& family) {
  const Filtration& f = m.filtration();
  const TracialAlgebra alg = m.terminal().algebra();
  CuculescuCheck c;
  c.monotone_slack = std::numeric_limits<double>::infinity();
  c.bounded_slack = std::numeric_limits<double>::infinity();

  Operator prev = Operator::identity(alg);
  for (int n = 1; n <= m.levels(); ++n) {
    const Operator& q = family.at(n).op();
    const Operator xn = m.value(n);
    c.membership = std::max(c.membership, op_norm(f.expect(n, q) - q));
    const Operator compressed = prev * xn * prev;
    c.commutation = std::max(c.commutation, op_norm(q * compressed - compressed * q));
    c.monotone_slack = std::min(c.monotone_slack, leq_slack(q, prev));
    const Operator top = (q * xn * q).hermitian_part();
    c.bounded_slack = std::min(c.bounded_slack, leq_slack(top, family.lambda * q));
    prev = q;
  }
  c.tail_mass = real_trace(Operator::identity(alg) - prev);
  c.tail_excess = c.tail_mass - lp_norm(m.terminal(), 1.0) / family.lambda;
  return c;
}

LayerCheck check_layers(const Martingale& m, const std::vector<CuculescuFamily>& families,
                        const SpectralLayers& lay) {
  const Filtration& f = m.filtration();
  const TracialAlgebra alg = m.terminal().algebra();
  LayerCheck c;
  c.domination_slack = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= m.levels(); ++n) {
    Operator sum = Operator::zero(alg);
    for (int i = 0; i < lay.layer_count(); ++i) {
      const Operator& pi = lay.p(i, n).op();
      c.membership = std::max(c.membership, op_norm(f.expect(n, pi) - pi));
      for (int j = i + 1; j < lay.layer_count(); ++j) {
        c.disjointness = std::max(c.disjointness, op_norm(pi * lay.p(j, n).op()));
      }
      sum += pi;
      if (i < static_cast<int>(families.size())) {
        c.domination_slack = std::min(c.domination_slack, leq_slack(sum, families[i].at(n).op()));
      }
    }
    c.partition_of_unity =
        std::max(c.partition_of_unity, op_norm(sum - Operator::identity(alg)));
  }
  return c;
}

SupportCheck check_supports(const Martingale& m, const SpectralLayers& lay,
                            const SupportFamily& sup) {
  SupportCheck c;
  c.below_layer_slack = std::numeric_limits<double>::infinity();
  c.left_support_slack = std::numeric_limits<double>::infinity();
  for (int n = 2; n <= m.levels(); ++n) {
    for (int i = 1; i < lay.layer_count(); ++i) {
      const Operator& pn = lay.p(i, n).op();
      c.below_layer_slack = std::min(c.below_layer_slack, leq_slack(sup.r[i][n - 1].op(), pn));
      const Operator gap = pn - lay.p(i, n - 1).op() * pn;
      const Operator left = left_support(gap, 1.0).op();
      const Operator drop = lay.P(i - 1, n - 1).op() - lay.P(i - 1, n).op();
      c.left_support_slack = std::min(c.left_support_slack, leq_slack(left, drop.hermitian_part()));
    }
  }
  if (m.levels() < 2 || lay.layer_count() < 2) {
    c.below_layer_slack = c.left_support_slack = 0.0;
  }

  c.mass_excess = -std::numeric_limits<double>::infinity();
  for (int m0 = 0; m0 <= lay.k_max; ++m0) {
    double mass = 0.0;
    for (int n = 2; n <= m.levels(); ++n)
      for (int i = m0 + 1; i < lay.layer_count(); ++i) mass += real_trace(sup.r[i][n - 1].op());
    c.mass.push_back(mass);
    c.mass_excess = std::max(c.mass_excess, mass - 4.0 * std::ldexp(1.0, -m0));
  }
  return c;
}

}  // namespace ncmart
