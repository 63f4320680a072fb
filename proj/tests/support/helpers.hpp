#pragma once

#include <cmath>
#include <vector>

#include "classical_oracle.hpp"
#include "ncmart/filtration.hpp"

namespace testing {

using namespace ncmart;

inline Operator from_matrix(const Matrix& m) { return Operator(m, TracialAlgebra(m.rows())); }

inline Operator random_operator(int d, std::uint64_t seed) {
  Rng rng(seed);
  return from_matrix(gaussian_matrix(d, d, rng));
}

inline Operator random_hermitian(int d, std::uint64_t seed) {
  return random_operator(d, seed).hermitian_part();
}

inline double dist(const Operator& a, const Operator& b) { return op_norm(a - b); }

inline oracle::Func atoms(const Operator& x) {
  oracle::Func f(x.dim());
  for (int i = 0; i < x.dim(); ++i) f[i] = x.mat()(i, i).real();
  return f;
}

// Largest entry of |x - diag(f)|, off-diagonal entries included.
inline double diff(const Operator& x, const oracle::Func& f) {
  Matrix m = x.mat();
  for (int i = 0; i < x.dim(); ++i) m(i, i) -= f[i];
  return m.cwiseAbs().maxCoeff();
}

inline oracle::Classical classical(const Martingale& m) {
  std::vector<oracle::Blocks> levels;
  for (const Partition& p : m.filtration().partitions()) levels.push_back(p);
  return oracle::Classical(levels, atoms(m.terminal()));
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace testing
