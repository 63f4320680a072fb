#include "ncmart/filtration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace ncmart {

namespace {

int product(const std::vector<int>& dims, std::size_t from, std::size_t to) {
  int p = 1;
  for (std::size_t k = from; k < to; ++k) p *= dims[k];
  return p;
}

std::vector<int> block_labels(const Partition& partition, int dim) {
  std::vector<int> label(dim, -1);
  for (std::size_t b = 0; b < partition.size(); ++b)
    for (int i : partition[b]) label[i] = static_cast<int>(b);
  return label;
}

int partition_dim(const std::vector<Partition>& levels) {
  if (levels.empty()) throw StructuralError("filtration: at least one level is required");
  int count = 0;
  for (const Block& b : levels.front()) count += static_cast<int>(b.size());
  if (count == 0) throw StructuralError("filtration: empty partition");
  return count;
}

void validate_partition(const Partition& partition, int dim, std::size_t level) {
  std::vector<int> seen(dim, 0);
  for (const Block& b : partition) {
    if (b.empty()) {
      throw StructuralError("filtration level " + std::to_string(level + 1) + ": empty block");
    }
    for (int i : b) {
      if (i < 0 || i >= dim || seen[i]++) {
        throw StructuralError("filtration level " + std::to_string(level + 1) +
                              ": blocks do not partition {1.." + std::to_string(dim) + "}");
      }
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw StructuralError("filtration level " + std::to_string(level + 1) +
                          ": blocks do not cover {1.." + std::to_string(dim) + "}");
  }
}

// Every block of `fine` lies inside a single block of `coarse`.
bool refines(const Partition& fine, const Partition& coarse, int dim) {
  const std::vector<int> label = block_labels(coarse, dim);
  for (const Block& b : fine)
    for (int i : b)
      if (label[i] != label[b.front()]) return false;
  return true;
}

// `count` contiguous, nearly equal blocks of {0..dim-1}.
Partition contiguous_blocks(int dim, int count) {
  Partition p;
  for (int j = 0; j < count; ++j) {
    const int lo = static_cast<int>(static_cast<long>(j) * dim / count);
    const int hi = static_cast<int>(static_cast<long>(j + 1) * dim / count);
    Block b(hi - lo);
    std::iota(b.begin(), b.end(), lo);
    p.push_back(std::move(b));
  }
  return p;
}

int capped_power_of_two(int exponent, int cap) {
  long v = 1;
  for (int k = 0; k < exponent && v < cap; ++k) v *= 2;
  return static_cast<int>(std::min<long>(v, cap));
}

Matrix pinch(const Matrix& x, const std::vector<int>& label) {
  const auto d = x.rows();
  Matrix out = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      if (label[i] == label[j]) out(i, j) = x(i, j);
  return out;
}

Matrix average_diagonal(const Matrix& x, const Partition& partition) {
  const auto d = x.rows();
  Matrix out = Matrix::Zero(d, d);
  for (const Block& b : partition) {
    Complex avg = 0.0;
    for (int i : b) avg += x(i, i);
    avg /= static_cast<double>(b.size());
    for (int i : b) out(i, i) = avg;
  }
  return out;
}

// id on an a x a leading factor, normalized partial trace on the trailing b x b.
Matrix partial_trace_tail(const Matrix& x, int a, int b) {
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  for (int r = 0; r < a; ++r) {
    for (int c = 0; c < a; ++c) {
      Complex acc = 0.0;
      for (int k = 0; k < b; ++k) acc += x(r * b + k, c * b + k);
      acc /= static_cast<double>(b);
      for (int k = 0; k < b; ++k) out(r * b + k, c * b + k) = acc;
    }
  }
  return out;
}

std::vector<int> prime_factors(int n) {
  std::vector<int> f;
  for (int p = 2; p * p <= n; ++p)
    while (n % p == 0) {
      f.push_back(p);
      n /= p;
    }
  if (n > 1) f.push_back(n);
  return f;
}

Operator terminal_for(const Filtration& f, Matrix g, EnsembleMode mode) {
  const TracialAlgebra alg = f.algebra();
  switch (mode) {
    case EnsembleMode::positive_normalized: {
      Operator x(g.adjoint() * g, alg);
      const double t = trace(x).real();
      return t > 0.0 ? (1.0 / t) * x : x;
    }
    case EnsembleMode::self_adjoint: {
      Operator x(0.5 * (g + g.adjoint()), alg);
      const double n1 = lp_norm(x, 1.0);
      return n1 > 0.0 ? (1.0 / n1) * x : x;
    }
    case EnsembleMode::general: {
      Operator x(std::move(g), alg);
      const double n1 = lp_norm(x, 1.0);
      return n1 > 0.0 ? (1.0 / n1) * x : x;
    }
  }
  throw StructuralError("random_martingale: unknown mode");
}

Matrix ambient_gaussian(const Filtration& f, Rng& rng) {
  const int d = f.dim();
  if (f.kind() == FiltrationKind::diagonal) {
    Matrix diag = gaussian_matrix(d, 1, rng);
    return diag.col(0).asDiagonal();
  }
  return gaussian_matrix(d, d, rng);
}

}  // namespace

// ------------------------------------------------------------ filtration --

Filtration Filtration::pinching(std::vector<Partition> levels) {
  const int d = partition_dim(levels);
  for (std::size_t n = 0; n < levels.size(); ++n) validate_partition(levels[n], d, n);
  for (std::size_t n = 0; n + 1 < levels.size(); ++n) {
    if (!refines(levels[n], levels[n + 1], d)) {
      throw StructuralError("pinching filtration: level " + std::to_string(n + 2) +
                            " does not contain level " + std::to_string(n + 1) +
                            " (blocks must merge as n grows)");
    }
  }
  if (levels.back().size() != 1) {
    throw StructuralError("pinching filtration: the last level must be the single block");
  }
  Filtration f(FiltrationKind::pinching, d, static_cast<int>(levels.size()));
  f.partitions_ = std::move(levels);
  return f;
}

Filtration Filtration::diagonal(std::vector<Partition> levels) {
  const int d = partition_dim(levels);
  for (std::size_t n = 0; n < levels.size(); ++n) validate_partition(levels[n], d, n);
  for (std::size_t n = 0; n + 1 < levels.size(); ++n) {
    if (!refines(levels[n + 1], levels[n], d)) {
      throw StructuralError("diagonal filtration: level " + std::to_string(n + 2) +
                            " does not refine level " + std::to_string(n + 1));
    }
  }
  if (static_cast<int>(levels.back().size()) != d) {
    throw StructuralError("diagonal filtration: the last level must be all singletons");
  }
  Filtration f(FiltrationKind::diagonal, d, static_cast<int>(levels.size()));
  f.partitions_ = std::move(levels);
  return f;
}

Filtration Filtration::tensor(std::vector<int> factor_dims) {
  if (factor_dims.empty()) throw StructuralError("tensor filtration: no factors");
  for (int k : factor_dims)
    if (k <= 0) throw StructuralError("tensor filtration: factor dimensions must be positive");
  Filtration f(FiltrationKind::tensor, product(factor_dims, 0, factor_dims.size()),
               static_cast<int>(factor_dims.size()));
  f.factor_dims_ = std::move(factor_dims);
  return f;
}

Filtration Filtration::dyadic_pinching(int dim, int levels) {
  if (dim <= 0 || levels <= 0) throw StructuralError("dyadic_pinching: dim and levels must be positive");
  std::vector<Partition> parts;
  for (int n = 1; n <= levels; ++n) parts.push_back(contiguous_blocks(dim, capped_power_of_two(levels - n, dim)));
  return pinching(std::move(parts));
}

Filtration Filtration::dyadic_diagonal(int dim, int levels) {
  if (dim <= 0 || levels <= 0) throw StructuralError("dyadic_diagonal: dim and levels must be positive");
  std::vector<Partition> parts;
  for (int n = 1; n <= levels; ++n) {
    const int count = n == levels ? dim : capped_power_of_two(n - 1, dim);
    parts.push_back(contiguous_blocks(dim, count));
  }
  return diagonal(std::move(parts));
}

Filtration Filtration::dyadic_tensor(int dim, int levels) {
  if (dim <= 0 || levels <= 0) throw StructuralError("dyadic_tensor: dim and levels must be positive");
  std::vector<int> f = prime_factors(dim);
  while (static_cast<int>(f.size()) > levels) {
    std::sort(f.begin(), f.end());
    f[1] *= f[0];
    f.erase(f.begin());
  }
  std::sort(f.begin(), f.end());
  f.insert(f.begin(), levels - static_cast<int>(f.size()), 1);
  return tensor(std::move(f));
}

void Filtration::require_level(int n) const {
  if (n < 0 || n > levels_) {
    throw DomainError("filtration level " + std::to_string(n) + " out of range 0.." +
                      std::to_string(levels_));
  }
}

void Filtration::require_operator(const Operator& x) const {
  if (x.dim() != dim_) {
    throw StructuralError("filtration of dimension " + std::to_string(dim_) +
                          " applied to operator of dimension " + std::to_string(x.dim()));
  }
}

Operator Filtration::expect(int n, const Operator& x) const {
  require_level(n);
  require_operator(x);
  n = std::max(n, 1);
  switch (kind_) {
    case FiltrationKind::pinching:
      return Operator(pinch(x.mat(), block_labels(partitions_[n - 1], dim_)), x.algebra());
    case FiltrationKind::diagonal:
      return Operator(average_diagonal(x.mat(), partitions_[n - 1]), x.algebra());
    case FiltrationKind::tensor: {
      const int a = product(factor_dims_, 0, n);
      return Operator(partial_trace_tail(x.mat(), a, dim_ / a), x.algebra());
    }
  }
  throw StructuralError("filtration: unknown kind");
}

Operator Filtration::expect_scalar(const Operator& x) {
  return trace(x) * Operator::identity(x.algebra());
}

bool Filtration::contains(int n, const Operator& x, double eps) const {
  const double scale = std::max(1.0, op_norm(x));
  return op_norm(expect(n, x) - x) <= eps * scale;
}

// ------------------------------------------------------------ martingale --

Martingale::Martingale(Filtration filtration, std::vector<Operator> values)
    : filtration_(std::move(filtration)), values_(std::move(values)) {
  if (static_cast<int>(values_.size()) != filtration_.levels()) {
    throw StructuralError("martingale: " + std::to_string(values_.size()) + " values for " +
                          std::to_string(filtration_.levels()) + " levels");
  }
  for (const Operator& x : values_) {
    if (x.dim() != filtration_.dim()) throw StructuralError("martingale: value of wrong dimension");
  }
}

Operator Martingale::value(int n) const {
  if (n < 0 || n > levels()) {
    throw DomainError("martingale level " + std::to_string(n) + " out of range");
  }
  if (n == 0) return Operator::zero(terminal().algebra());
  return values_[n - 1];
}

Operator Martingale::difference(int n) const {
  if (n < 1 || n > levels()) {
    throw DomainError("martingale difference " + std::to_string(n) + " out of range");
  }
  return value(n) - value(n - 1);
}

std::vector<Operator> Martingale::differences() const {
  std::vector<Operator> dx;
  dx.reserve(values_.size());
  for (int n = 1; n <= levels(); ++n) dx.push_back(difference(n));
  return dx;
}

Martingale martingale_from_terminal(const Operator& x, const Filtration& f) {
  if (!f.contains(f.levels(), x)) {
    throw DomainError("martingale_from_terminal: terminal value is not in the top algebra M_N");
  }
  std::vector<Operator> values;
  values.reserve(f.levels());
  for (int n = 1; n <= f.levels(); ++n) values.push_back(f.expect(n, x));
  return Martingale(f, std::move(values));
}

bool is_positive(const Martingale& m, double eps) {
  return std::all_of(m.values().begin(), m.values().end(),
                     [eps](const Operator& x) { return is_positive(x, eps); });
}

std::optional<int> first_irregular_level(const Martingale& m, double k) {
  if (!is_positive(m)) throw DomainError("regularity test needs a positive martingale");
  for (int n = 2; n <= m.levels(); ++n) {
    const Operator xn = m.value(n);
    const double eps = tol::psd * std::max(1.0, op_norm(xn));
    if (!op_leq(xn, k * m.value(n - 1), eps)) return n;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- random --

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) {
  return splitmix64(seed ^ splitmix64(trial));
}

Matrix gaussian_matrix(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  Matrix g(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(r, c) = Complex(re, im);
    }
  return g;
}

Martingale random_martingale(const Filtration& f, std::uint64_t seed, EnsembleMode mode) {
  Rng rng(seed);
  return martingale_from_terminal(terminal_for(f, ambient_gaussian(f, rng), mode), f);
}

Martingale random_regular_martingale(const Filtration& f, std::uint64_t seed, double k) {
  if (!(k > 1.0)) throw DomainError("random_regular_martingale: k must exceed 1");
  Rng rng(seed);
  const Operator g = terminal_for(f, ambient_gaussian(f, rng), EnsembleMode::positive_normalized);
  const Martingale gm = martingale_from_terminal(g, f);

  double t_max = 1.0;
  for (int n = 2; n <= gm.levels(); ++n) {
    const Operator gap = k * gm.value(n - 1) - gm.value(n);
    const double mu = min_eigenvalue(gap.hermitian_part());
    if (mu < 0.0) t_max = std::min(t_max, (k - 1.0) / ((k - 1.0) - mu));
  }
  std::uniform_real_distribution<double> unit(0.5, 1.0);
  const double t = unit(rng) * (1.0 - 1e-6) * t_max;
  const Operator one = Operator::identity(f.algebra());
  return martingale_from_terminal((1.0 - t) * one + t * g, f);
}

// ---------------------------------------------------------- independence --

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix embed_factor(const Matrix& g, const std::vector<int>& factor_dims, int position) {
  if (position < 0 || position >= static_cast<int>(factor_dims.size()) ||
      g.rows() != factor_dims[position] || g.cols() != factor_dims[position]) {
    throw StructuralError("embed_factor: factor does not match position " + std::to_string(position));
  }
  const int before = product(factor_dims, 0, position);
  const int after = product(factor_dims, position + 1, factor_dims.size());
  return kron(kron(Matrix::Identity(before, before), g), Matrix::Identity(after, after));
}

IndependentSequence independent_sequence(const std::vector<int>& factor_dims, std::uint64_t seed,
                                         double beta) {
  Filtration f = Filtration::tensor(factor_dims);
  Rng rng(seed);
  std::uniform_real_distribution<double> scale(0.25, 1.0);
  IndependentSequence seq{f, {}, {}};
  for (std::size_t n = 0; n < factor_dims.size(); ++n) {
    const int dn = factor_dims[n];
    Matrix g = gaussian_matrix(dn, dn, rng);
    g -= (g.trace() / static_cast<double>(dn)) * Matrix::Identity(dn, dn);
    const double s = scale(rng);
    const double norm = dn > 0 && g.norm() > 0.0 ? Eigen::JacobiSVD<Matrix>(g).singularValues()(0) : 0.0;
    if (norm > 0.0) g *= beta * s / norm;
    seq.elements.emplace_back(embed_factor(g, factor_dims, static_cast<int>(n)), f.algebra());
    seq.factors.push_back(std::move(g));
  }
  return seq;
}

}  // namespace ncmart
