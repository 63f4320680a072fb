#pragma once

// Finite filtrations M_1 ⊆ ... ⊆ M_N of a matrix algebra, their conditional
// expectations, martingales, and seeded random generators.
//
// Three families are supported:
//   pinching  - M_n = block-diagonal matrices for a partition that coarsens
//               as n grows; the last level is the single block (M_N = M_d).
//   tensor    - M_d = M_{d_1} ⊗ ... ⊗ M_{d_N}, M_n = first n factors ⊗ 1.
//   diagonal  - commutative: M_n = diagonal matrices constant on the blocks
//               of a partition that refines as n grows; the last level is
//               all singletons (M_N = diagonal matrices).
//
// Partitions are stored 0-based; JSON uses 1-based indices.

#include <cstdint>
#include <random>
#include <vector>

#include "ncmart/algebra.hpp"

namespace ncmart {

using Block = std::vector<int>;
using Partition = std::vector<Block>;

enum class FiltrationKind { pinching, tensor, diagonal };

class Filtration {
 public:
  static Filtration pinching(std::vector<Partition> levels);
  static Filtration tensor(std::vector<int> factor_dims);
  static Filtration diagonal(std::vector<Partition> levels);

  // Level n has 2^(N-n) contiguous blocks (capped at d); level N is one block.
  static Filtration dyadic_pinching(int dim, int levels);
  // Level n has 2^(n-1) contiguous blocks (capped at d); level N is singletons.
  static Filtration dyadic_diagonal(int dim, int levels);
  // Factor dimensions from the prime factorization of dim, merged or padded
  // with trivial factors to exactly `levels` entries.
  static Filtration dyadic_tensor(int dim, int levels);

  FiltrationKind kind() const { return kind_; }
  int levels() const { return levels_; }
  int dim() const { return dim_; }
  TracialAlgebra algebra() const { return TracialAlgebra(dim_); }
  const std::vector<Partition>& partitions() const { return partitions_; }
  const std::vector<int>& factor_dims() const { return factor_dims_; }

  // E_n for 0 <= n <= N, with E_0 = E_1. DomainError outside that range.
  Operator expect(int n, const Operator& x) const;
  // E_{n-1} with the same convention, i.e. E_{max(n-1, 1)}.
  Operator expect_prev(int n, const Operator& x) const { return expect(n - 1, x); }
  // Scalar expectation tau(x) 1, the trivial subalgebra C1.
  static Operator expect_scalar(const Operator& x);

  // |E_n(x) - x|_inf <= eps * max(1, |x|_inf)
  bool contains(int n, const Operator& x, double eps = tol::num) const;

 private:
  Filtration(FiltrationKind kind, int dim, int levels) : kind_(kind), dim_(dim), levels_(levels) {}

  void require_level(int n) const;
  void require_operator(const Operator& x) const;

  FiltrationKind kind_;
  int dim_;
  int levels_;
  std::vector<Partition> partitions_;
  std::vector<int> factor_dims_;
};

class Martingale {
 public:
  // Values x_1..x_N; use martingale_from_terminal for validated construction.
  Martingale(Filtration filtration, std::vector<Operator> values);

  const Filtration& filtration() const { return filtration_; }
  int levels() const { return static_cast<int>(values_.size()); }
  int dim() const { return filtration_.dim(); }
  // x_n for 1 <= n <= N; x_0 = 0.
  Operator value(int n) const;
  const Operator& terminal() const { return values_.back(); }
  const std::vector<Operator>& values() const { return values_; }
  // dx_n for 1 <= n <= N.
  Operator difference(int n) const;
  // dx_1..dx_N (index n-1).
  std::vector<Operator> differences() const;

 private:
  Filtration filtration_;
  std::vector<Operator> values_;
};

// x_n = E_n(x). DomainError if x does not lie in M_N.
Martingale martingale_from_terminal(const Operator& x, const Filtration& f);

inline std::vector<Operator> differences(const Martingale& m) { return m.differences(); }

bool is_positive(const Martingale& m, double eps = tol::psd);

// First level n >= 2 with x_n not <= k x_{n-1}, if any. DomainError if m is
// not positive.
std::optional<int> first_irregular_level(const Martingale& m, double k);
inline bool is_k_regular(const Martingale& m, double k) {
  return !first_irregular_level(m, k).has_value();
}

// --------------------------------------------------------------- random --

std::uint64_t splitmix64(std::uint64_t x);
// Seed of trial i in a stream: reproducible in isolation.
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial);

using Rng = std::mt19937_64;

// i.i.d. standard complex Gaussian entries (real and imaginary parts of
// variance 1/2).
Matrix gaussian_matrix(int rows, int cols, Rng& rng);

enum class EnsembleMode { positive_normalized, self_adjoint, general };

// positive_normalized: x_N = G*G / tau(G*G); self_adjoint: (G + G*)/2
// scaled to |x|_1 = 1; general: G / |G|_1. G is diagonal for diagonal
// filtrations.
Martingale random_martingale(const Filtration& f, std::uint64_t seed, EnsembleMode mode);

// k-regular positive martingale with tau(x_N) = 1, obtained by mixing a
// positive normalized terminal value with the identity.
Martingale random_regular_martingale(const Filtration& f, std::uint64_t seed, double k);

// --------------------------------------------------------- independence --

struct IndependentSequence {
  Filtration filtration;           // tensor
  std::vector<Operator> elements;  // a_n = 1 ⊗ ... ⊗ g_n ⊗ ... ⊗ 1
  std::vector<Matrix> factors;     // g_n
};

// Random g_n with tr g_n = 0 and |g_n|_inf rescaled into [beta/4, beta].
IndependentSequence independent_sequence(const std::vector<int>& factor_dims, std::uint64_t seed,
                                         double beta = 1.0);

// 1_{before} ⊗ g ⊗ 1_{after} with the given factor position.
Matrix embed_factor(const Matrix& g, const std::vector<int>& factor_dims, int position);

Matrix kron(const Matrix& a, const Matrix& b);

}  // namespace ncmart
