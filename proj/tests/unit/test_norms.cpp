#include <doctest.h>

#include <cmath>

#include "../support/helpers.hpp"
#include "ncmart/decompose.hpp"

using namespace ncmart;
using namespace testing;

namespace {

std::vector<Martingale> ensemble(EnsembleMode mode, int count) {
  std::vector<Martingale> out;
  const std::vector<Filtration> fs{Filtration::dyadic_pinching(8, 4), Filtration::dyadic_tensor(8, 4),
                                   Filtration::dyadic_diagonal(8, 4), Filtration::tensor({2, 2, 3})};
  for (const Filtration& f : fs)
    for (int s = 1; s <= count; ++s) out.push_back(random_martingale(f, 1000 + s, mode));
  return out;
}

Martingale zero_martingale() {
  const Filtration f = Filtration::dyadic_pinching(4, 3);
  return martingale_from_terminal(Operator::zero(f.algebra()), f);
}

}  // namespace

TEST_CASE("single nonzero difference") {
  const Filtration f = Filtration::tensor({2, 2, 2});
  Rng rng(5);
  const Operator x = from_matrix(kron(gaussian_matrix(2, 2, rng), Matrix::Identity(4, 4)));
  const Martingale m = martingale_from_terminal(x, f);
  CHECK(dist(s_col(m), sqrt_psd(x.adjoint() * x)) < 1e-12);
  // N = 1 convention E_0 = E_1
  CHECK(dist(sigma_col(m), sqrt_psd(f.expect(1, x.adjoint() * x))) < 1e-12);
  for (double p : {2.0, 3.0, 5.0}) {
    const double expected = std::max({lp_norm(x, p), lp_norm(sqrt_psd(f.expect(1, x.adjoint() * x)), p),
                                      lp_norm(sqrt_psd(f.expect(1, x * x.adjoint())), p)});
    CHECK(rel(h_norm(m, p).value, expected) < 1e-12);
  }
}

TEST_CASE("constant martingale conditioned square") {
  const Filtration f = Filtration::dyadic_tensor(8, 3);
  const Martingale m = martingale_from_terminal(-2.0 * Operator::identity(f.algebra()), f);
  CHECK(dist(sigma_col(m), 2.0 * Operator::identity(f.algebra())) < 1e-12);
}

TEST_CASE("commuting self-adjoint martingales have equal column and row squares") {
  const Martingale m = random_martingale(Filtration::dyadic_diagonal(8, 4), 3, EnsembleMode::self_adjoint);
  CHECK(dist(s_col(m), s_row(m)) < 1e-13);
}

TEST_CASE("Hilbert space identities") {
  for (const Martingale& m : ensemble(EnsembleMode::general, 5)) {
    const double x2 = lp_norm(m.terminal(), 2);
    CHECK(rel(lp_norm(s_col(m), 2), x2) < 1e-10);
    CHECK(rel(lp_norm(s_row(m), 2), x2) < 1e-10);
    CHECK(rel(lp_norm(sigma_col(m), 2), x2) < 1e-10);
    CHECK(rel(lp_norm(sigma_row(m), 2), x2) < 1e-10);
    CHECK(rel(hardy_norm(m, 2).value, x2) < 1e-10);
    CHECK(hardy_norm(m, 2).exact);
    CHECK(rel(h_norm(m, 2).value, x2) < 1e-10);
  }
}

TEST_CASE("max semantics for p >= 2") {
  for (const Martingale& m : ensemble(EnsembleMode::general, 3)) {
    for (double p : {2.0, 3.0, 6.0}) {
      const NormValue hp = hardy_norm(m, p), hh = h_norm(m, p);
      CHECK(hp.exact);
      CHECK(hh.exact);
      CHECK(hp.value >= lp_norm(s_col(m), p) - 1e-13);
      CHECK(hp.value >= lp_norm(s_row(m), p) - 1e-13);
      CHECK(hh.value >= lp_norm(sigma_col(m), p) - 1e-13);
      CHECK(hh.value >= lp_norm(sigma_row(m), p) - 1e-13);
      CHECK(hh.value >= diagonal_norm(m.differences(), p) - 1e-13);
    }
  }
}

TEST_CASE("p < 2 values are upper bounds from candidates") {
  for (const Martingale& m : ensemble(EnsembleMode::general, 2)) {
    for (double p : {1.0, 1.5}) {
      const NormValue hp = hardy_norm(m, p), hh = h_norm(m, p);
      CHECK_FALSE(hp.exact);
      CHECK_FALSE(hh.exact);
      CHECK(hp.value <= std::min(lp_norm(s_col(m), p), lp_norm(s_row(m), p)) + 1e-13);
      CHECK(hh.value <= lp_norm(sigma_col(m), p) + 1e-13);
      CHECK(hp.value > 0.0);
    }
  }
}

TEST_CASE("p below one is a domain error") {
  const Martingale m = zero_martingale();
  CHECK_THROWS_AS(hardy_norm(m, 0.9), DomainError);
  CHECK_THROWS_AS(h_norm(m, 0.5), DomainError);
  CHECK_THROWS_AS(diagonal_norm(m.differences(), 0.5), DomainError);
}

TEST_CASE("zero martingale has zero norms") {
  const Martingale m = zero_martingale();
  for (double p : {1.0, 1.5, 2.0, 4.0}) {
    CHECK(hardy_norm(m, p).value == doctest::Approx(0.0));
    CHECK(h_norm(m, p).value == doctest::Approx(0.0));
  }
  CHECK(bmo_norms(m.terminal(), m.filtration()).bmo == 0.0);
}

TEST_CASE("monotone in p") {
  for (const Martingale& m : ensemble(EnsembleMode::general, 2)) {
    const Operator s = s_col(m);
    double prev = 0.0;
    for (double p : {1.0, 1.25, 2.0, 3.0, 8.0, kInfinity}) {
      const double v = lp_norm(s, p);
      CHECK(v >= prev * (1 - 1e-12));
      prev = v;
    }
  }
}

TEST_CASE("classical p = 4 norms match the per-atom oracle") {
  const Filtration f = Filtration::dyadic_diagonal(8, 4);
  for (std::uint64_t s = 1; s <= 10; ++s) {
    const Martingale m = random_martingale(f, s, EnsembleMode::self_adjoint);
    const oracle::Classical c = classical(m);
    CHECK(rel(hardy_norm(m, 4).value, c.hardy_p(4)) < 1e-10);
    CHECK(rel(h_norm(m, 4).value, c.h_p(4)) < 1e-10);
    CHECK(rel(lp_norm(sigma_col(m), 4), c.sigma_p(4)) < 1e-10);
  }
}

TEST_CASE("diagonal embedding weak norm") {
  const Operator x = Operator::diagonal({4, 0, 0, 0});
  CHECK(diag_embed_weak_l1({x}) == doctest::Approx(weak_l1_norm(x)));
  for (int N = 1; N <= 5; ++N) {
    std::vector<Operator> seq(N, x);
    // brute force on the materialized block-diagonal matrix, with the
    // trace normalized on each block
    Matrix big = Matrix::Zero(4 * N, 4 * N);
    for (int k = 0; k < N; ++k) big.block(4 * k, 4 * k, 4, 4) = x.mat();
    const Operator B(big, TracialAlgebra(4 * N));
    CHECK(diag_embed_weak_l1(seq) == doctest::Approx(N * weak_l1_norm(B)));
    CHECK(diag_embed_weak_l1(seq) == doctest::Approx(N));
  }
  std::vector<Operator> zeros(3, Operator::zero(TracialAlgebra(4)));
  CHECK(diag_embed_weak_l1(zeros) == 0.0);
  for (std::uint64_t s = 1; s <= 5; ++s) {
    std::vector<Operator> seq;
    for (int k = 0; k < 3; ++k) seq.push_back(random_operator(5, 10 * s + k));
    Matrix big = Matrix::Zero(15, 15);
    for (int k = 0; k < 3; ++k) big.block(5 * k, 5 * k, 5, 5) = seq[k].mat();
    CHECK(rel(diag_embed_weak_l1(seq), 3 * weak_l1_norm(Operator(big, TracialAlgebra(15)))) < 1e-12);
  }
}

TEST_CASE("BMO conventions") {
  // single level, scalar level 0
  const Filtration f = Filtration::tensor({4});
  for (std::uint64_t s = 1; s <= 5; ++s) {
    Operator a = random_operator(4, s);
    a = a - Filtration::expect_scalar(a);
    const BmoNorms b = bmo_norms(a, f, Level0::scalar);
    CHECK(rel(b.col, op_norm(a)) < 1e-12);
  }
  // a in M_1 and E_0 = E_1: no oscillation at level 1
  const Filtration g = Filtration::dyadic_pinching(4, 2);
  const Operator a1 = g.expect(1, random_operator(4, 8));
  CHECK(bmo_norms(a1, g).bmo < 1e-13);
}

TEST_CASE("BMO identity, upper bound and sigma comparison") {
  for (const Martingale& m : ensemble(EnsembleMode::general, 4)) {
    const Filtration& f = m.filtration();
    for (Level0 l0 : {Level0::same_as_first, Level0::scalar}) {
      const Expectation e = filtration_expectation(f, l0);
      CHECK(bmo_identity_residual(m.terminal(), e, f.levels()) < 1e-12);
      CHECK(bmo_norms(m.terminal(), e, f.levels()).bmo <= bmo_upper_bound(m.terminal(), e, f.levels()) + 1e-12);
      CHECK(bmo_sigma_slack(m.terminal(), e, f.levels()) >= -1e-12);
    }
  }
}

TEST_CASE("BMO identity checked by a direct expansion") {
  const Filtration f = Filtration::dyadic_tensor(8, 3);
  const Martingale m = random_martingale(f, 4, EnsembleMode::general);
  const auto d = m.differences();
  for (int n = 1; n <= 3; ++n) {
    const Operator tail = m.terminal() - m.value(n - 1);
    const Operator lhs = f.expect(n, tail.adjoint() * tail);
    Operator rhs = d[n - 1].adjoint() * d[n - 1];
    for (int k = n + 1; k <= 3; ++k) rhs += f.expect(n, f.expect(k - 1, d[k - 1].adjoint() * d[k - 1]));
    CHECK(dist(lhs, rhs) < 1e-12);
  }
}

TEST_CASE("norm report mirrors its parts") {
  const Martingale m = random_martingale(Filtration::dyadic_tensor(8, 4), 9, EnsembleMode::positive_normalized);
  const NormReport r = norm_report(m, 3.0);
  CHECK(r.s_col_p == doctest::Approx(lp_norm(s_col(m), 3.0)));
  CHECK(r.hardy_p == doctest::Approx(hardy_norm(m, 3.0).value));
  CHECK(r.h_p == doctest::Approx(h_norm(m, 3.0).value));
  CHECK(r.bmo == doctest::Approx(std::max(r.bmo_col, r.bmo_row)));
  CHECK(r.hardy_exact);
  CHECK_FALSE(norm_report(m, 1.5).hardy_exact);
}
