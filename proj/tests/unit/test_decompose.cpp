#include <doctest.h>

#include <cmath>

#include "../support/helpers.hpp"
#include "ncmart/decompose.hpp"

using namespace ncmart;
using namespace testing;

namespace {

Martingale dyadic_example() {
  return martingale_from_terminal(Operator::diagonal({4, 0, 0, 0}), Filtration::dyadic_diagonal(4, 3));
}

std::vector<Martingale> positive_ensemble(int count) {
  std::vector<Martingale> out;
  for (const Filtration& f : {Filtration::dyadic_pinching(8, 4), Filtration::dyadic_tensor(8, 4),
                              Filtration::dyadic_diagonal(8, 4), Filtration::tensor({2, 3, 2})})
    for (int s = 1; s <= count; ++s) out.push_back(random_martingale(f, 900 + s, EnsembleMode::positive_normalized));
  return out;
}

}  // namespace

TEST_CASE("triple of a martingale with a single difference") {
  const Filtration f = Filtration::dyadic_tensor(8, 3);
  Rng rng(2);
  const Matrix g = gaussian_matrix(2, 2, rng);
  Operator x = from_matrix(kron(g.adjoint() * g, Matrix::Identity(4, 4)));
  x = (1.0 / trace(x).real()) * x;
  const Martingale m = martingale_from_terminal(x, f);
  const AdaptedTriple t = abc_decompose(m);
  for (int n = 2; n <= 3; ++n) CHECK(op_norm(t.a[n - 1]) < 1e-12);
  CHECK(dist(t.b[0] + t.c[0], m.difference(1)) < 1e-12);
}

TEST_CASE("single layer case") {
  const Filtration f = Filtration::dyadic_pinching(8, 4);
  Operator x = random_martingale(f, 3, EnsembleMode::positive_normalized).terminal();
  x = (0.9 / op_norm(x)) * x;  // stays below 1
  const Martingale m = martingale_from_terminal(x, f);
  const AdaptedTriple t = abc_decompose(m);
  for (int n = 1; n <= 4; ++n) {
    CHECK(op_norm(t.a[n - 1]) < 1e-12);
    CHECK(op_norm(t.c[n - 1]) < 1e-12);
    CHECK(dist(t.b[n - 1], m.difference(n)) < 1e-12);
  }
  CHECK(rel(abc_l2_report(t, m), lp_norm(m.terminal(), 2)) < 1e-10);
  CHECK(conditioned_square_identities(t, m, layers(m)) < 1e-10);
}

TEST_CASE("zero martingale") {
  const Filtration f = Filtration::dyadic_tensor(8, 3);
  const Martingale m = martingale_from_terminal(Operator::zero(f.algebra()), f);
  const AdaptedTriple t = abc_decompose(m);
  CHECK(abc_l2_report(t, m) == 0.0);
  CHECK(conditioned_square_identities(t, m, layers(m)) == 0.0);
  CHECK_THROWS_AS(abc_weak_report(t, m), DomainError);
}

TEST_CASE("non-positive input is rejected") {
  const Filtration f = Filtration::dyadic_pinching(4, 2);
  const Martingale m = martingale_from_terminal(Operator::diagonal({1, -1, 0, 0}), f);
  CHECK_THROWS_AS(abc_decompose(m), DomainError);
  CHECK_THROWS_AS(yz_decompose(m), DomainError);
}

TEST_CASE("dyadic example decomposition") {
  const Martingale m = dyadic_example();
  const SpectralLayers ly = layers(m);
  const AdaptedTriple t = abc_decompose(m, ly);
  CHECK(abc_exactness_residual(m, t) < 1e-14);
  CHECK(conditioned_square_identities(t, m, ly) < 1e-10);
  const WeakReport w = abc_weak_report(t, m);
  const oracle::Classical c = classical(m);
  CHECK(w.theta == doctest::Approx(c.theta()));
  CHECK(w.sigma_b == doctest::Approx(c.sigma_b()));
  CHECK(w.sigma_c == 0.0);
  const RegularWeakReport r = regular_weak_report(m, 2.0);
  CHECK(r.sigma_y <= 356.0);
  CHECK(r.sigma_z <= 356.0);
  CHECK(r.sigma_y == doctest::Approx(c.weak_l1(c.conditioned_square(c.differences()))));
  CHECK(r.sigma_z == 0.0);
  CHECK_THROWS_WITH_AS(regular_weak_report(m, 1.5), doctest::Contains("x_2"), DomainError);
}

TEST_CASE("triple properties on random positive martingales") {
  for (const Martingale& m : positive_ensemble(8)) {
    const SpectralLayers ly = layers(m);
    const AdaptedTriple t = abc_decompose(m, ly);
    CHECK(abc_exactness_residual(m, t) <= 1e-9);
    CHECK(abc_adaptedness_residual(m, t) <= 1e-9);
    const TermRatios r = abc_term_excess(m, t);
    CHECK(r.a <= 1e-10);
    CHECK(r.b <= 1e-10);
    CHECK(r.c <= 1e-10);
    CHECK(abc_l2_report(t, m) <= 5 * lp_norm(m.terminal(), 2));
    CHECK(conditioned_square_identities(t, m, ly) <= 1e-8);
    const WeakReport w = abc_weak_report(t, m);
    CHECK(w.theta <= 144.0);
    CHECK(w.sigma_b <= 36.0);
    CHECK(w.sigma_c <= 36.0);
    // per-term orthogonality bounds checked directly
    for (int n = 1; n <= m.levels(); ++n) {
      const double dx2 = lp_norm(m.difference(n), 2);
      CHECK(lp_norm(t.b[n - 1], 2) <= dx2 + 1e-12);
      CHECK(lp_norm(t.c[n - 1], 2) <= dx2 + 1e-12);
      CHECK(lp_norm(t.a[n - 1], 2) <= 3 * dx2 + 1e-12);
    }
  }
}

TEST_CASE("pair properties on random positive martingales") {
  for (const Martingale& m : positive_ensemble(8)) {
    const MartingalePair yz = yz_decompose(m);
    const Filtration& f = m.filtration();
    for (int n = 1; n <= m.levels(); ++n) {
      CHECK(dist(yz.dy[n - 1] + yz.dz[n - 1], m.difference(n)) < 1e-12);
      CHECK(f.contains(n, yz.dy[n - 1]));
      CHECK(f.contains(n, yz.dz[n - 1]));
      if (n >= 2) {
        CHECK(op_norm(f.expect(n - 1, yz.dy[n - 1])) < 1e-12);
        CHECK(op_norm(f.expect(n - 1, yz.dz[n - 1])) < 1e-12);
      }
    }
  }
}

TEST_CASE("regular report on regular ensembles") {
  for (const Filtration& f : {Filtration::dyadic_pinching(8, 4), Filtration::dyadic_tensor(8, 4)}) {
    for (std::uint64_t s = 1; s <= 8; ++s) {
      const Martingale m = random_regular_martingale(f, s, 2.0);
      const RegularWeakReport r = regular_weak_report(m, 2.0);
      CHECK(r.sigma_y <= regular_threshold(2.0));
      CHECK(r.sigma_z <= regular_threshold(2.0));
    }
  }
  CHECK(regular_threshold(2.0) == 356.0);
  const Filtration f = Filtration::dyadic_pinching(4, 3);
  const Martingale c = martingale_from_terminal(Operator::identity(f.algebra()), f);
  const RegularWeakReport r = regular_weak_report(c, 1.1);
  CHECK(r.sigma_y == doctest::Approx(1.0));
}

TEST_CASE("commutative decompositions match the per-atom oracle") {
  const Filtration f = Filtration::dyadic_diagonal(16, 5);
  for (std::uint64_t s = 1; s <= 10; ++s) {
    const Martingale m = random_martingale(f, s, EnsembleMode::positive_normalized);
    const oracle::Classical c = classical(m);
    const AdaptedTriple t = abc_decompose(m);
    const MartingalePair yz = yz_decompose(m);
    for (int n = 1; n <= 5; ++n) {
      CHECK(diff(t.a[n - 1], c.a(n)) < 1e-10);
      CHECK(diff(t.b[n - 1], c.b(n)) < 1e-10);
      CHECK(diff(t.c[n - 1], c.c(n)) < 1e-10);
      CHECK(diff(yz.dy[n - 1], c.dy(n)) < 1e-10);
      CHECK(diff(yz.dz[n - 1], c.dz(n)) < 1e-10);
    }
    const WeakReport w = abc_weak_report(t, m);
    CHECK(std::abs(w.theta - c.theta()) < 1e-10);
    CHECK(std::abs(w.sigma_b - c.sigma_b()) < 1e-10);
    CHECK(std::abs(w.sigma_c) < 1e-10);
  }
}

TEST_CASE("positive split") {
  const Filtration f = Filtration::dyadic_pinching(4, 2);
  const Martingale pos = martingale_from_terminal(Operator::diagonal({1, 2, 0, 3}), f);
  const PositiveSplit ps = positive_split(pos);
  CHECK(dist(ps.parts[0].terminal(), pos.terminal()) < 1e-14);
  for (int k = 1; k < 4; ++k) CHECK(op_norm(ps.parts[k].terminal()) < 1e-14);

  const Filtration g = Filtration::dyadic_pinching(2, 1);
  const PositiveSplit sa = positive_split(martingale_from_terminal(Operator::diagonal({1, -1}), g));
  CHECK(dist(sa.parts[0].terminal(), Operator::diagonal({1, 0})) < 1e-14);
  CHECK(dist(sa.parts[1].terminal(), Operator::diagonal({0, 1})) < 1e-14);

  for (std::uint64_t s = 1; s <= 10; ++s) {
    const Martingale m = random_martingale(Filtration::dyadic_tensor(8, 3), s, EnsembleMode::general);
    const PositiveSplit p = positive_split(m);
    Operator back = Operator::zero(m.filtration().algebra());
    for (int k = 0; k < 4; ++k) {
      CHECK(is_positive(p.parts[k]));
      back += PositiveSplit::coefficients[k] * p.parts[k].terminal();
    }
    CHECK(dist(back, m.terminal()) < 1e-12);
    // |h1|_1 + |h2|_1 = |Re x|_1 from the eigenvalues
    const Operator re = m.terminal().hermitian_part();
    const RealVector ev = eigh(re).eigenvalues;
    const double l1 = ev.cwiseAbs().sum() / ev.size();
    CHECK(rel(lp_norm(p.parts[0].terminal(), 1) + lp_norm(p.parts[1].terminal(), 1), l1) < 1e-12);
  }
}

TEST_CASE("conversion to martingale differences") {
  const Martingale m = random_martingale(Filtration::dyadic_tensor(8, 4), 5, EnsembleMode::positive_normalized);
  const Filtration& f = m.filtration();
  // martingale differences are left unchanged
  const auto dx = m.differences();
  const DifferenceTriple same = to_martingale_differences(f, AdaptedTriple{dx, dx, dx});
  for (int n = 1; n <= 4; ++n) CHECK(dist(same.diagonal[n - 1], dx[n - 1]) < 1e-13);

  const AdaptedTriple t = abc_decompose(m);
  const DifferenceTriple d = to_martingale_differences(f, t);
  for (int n = 1; n <= 4; ++n) {
    CHECK(dist(d.diagonal[n - 1] + d.column[n - 1] + d.row[n - 1], dx[n - 1]) < 1e-12);
    if (n >= 2) CHECK(op_norm(f.expect(n - 1, d.column[n - 1])) < 1e-12);
  }
  for (double p : {1.0, 1.5, 2.0, 4.0}) {
    CHECK(lp_norm(conditioned_column_square(f, d.column), p) <=
          2 * lp_norm(conditioned_column_square(f, t.b), p) + 1e-12);
    CHECK(lp_norm(conditioned_row_square(f, d.row), p) <= 2 * lp_norm(conditioned_row_square(f, t.c), p) + 1e-12);
  }
  CHECK(centered_theta(f, t) >= 0.0);
}

TEST_CASE("general martingales recombine exactly") {
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const Martingale m = random_martingale(Filtration::dyadic_pinching(8, 3), s, EnsembleMode::general);
    const AdaptedTriple t = abc_decompose_general(m);
    const MartingalePair yz = yz_decompose_general(m);
    for (int n = 1; n <= 3; ++n) {
      CHECK(dist(t.a[n - 1] + t.b[n - 1] + t.c[n - 1], m.difference(n)) < 1e-11);
      CHECK(dist(yz.dy[n - 1] + yz.dz[n - 1], m.difference(n)) < 1e-11);
    }
    CHECK(abc_adaptedness_residual(m, t) < 1e-10);
  }
}

TEST_CASE("constructive candidates tighten the p < 2 bounds") {
  const Martingale m = random_martingale(Filtration::dyadic_tensor(8, 4), 6, EnsembleMode::positive_normalized);
  const CandidateSet c = constructive_candidates(m);
  CHECK(c.hardy.size() == 3);
  CHECK(c.h.size() == 4);
  CHECK(hardy_norm(m, 1.5).value <= hardy_norm(m, 1.5, trivial_candidates(m)).value + 1e-15);
  CHECK(h_norm(m, 1.5).value <= h_norm(m, 1.5, trivial_candidates(m)).value + 1e-15);
  CHECK_THROWS_AS(norm_report(m, 0.5), DomainError);
}
