#pragma once

// Finite-dimensional tracial *-algebra arithmetic.
//
// Operators are d x d complex matrices bound to a TracialAlgebra that fixes
// the trace normalization: tau = tr/d (normalized, tau(1) = 1) or the plain
// matrix trace (unnormalized, used for auxiliary matrix-unit factors).
//
// Spectral routines (eigendecomposition, functional calculus, spectral
// projections, supports, meets) detect the exact block structure of their
// input from its zero pattern and work block by block, so that an operator
// living in a block-diagonal subalgebra produces results in the same
// subalgebra without rounding leakage between blocks.

#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ncmart/errors.hpp"

namespace ncmart {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Numerical tolerances shared by every module.
namespace tol {
inline constexpr double psd = 1e-9;    // positivity / self-adjointness, relative to max(1, |x|)
inline constexpr double rank = 1e-9;   // singular-value cutoff for supports and meets
inline constexpr double proj = 1e-8;   // projection-hood
inline constexpr double eig = 1e-10;   // spectral boundary ties, relative to max(1, |x|)
inline constexpr double num = 1e-9;    // generic residuals
}  // namespace tol

enum class TraceNormalization { normalized, unnormalized };

class TracialAlgebra {
 public:
  explicit TracialAlgebra(int dim,
                          TraceNormalization normalization = TraceNormalization::normalized);

  int dim() const { return dim_; }
  TraceNormalization normalization() const { return normalization_; }
  bool normalized() const { return normalization_ == TraceNormalization::normalized; }

  // Trace mass carried by one eigenvalue: 1/d or 1.
  double unit_mass() const { return normalized() ? 1.0 / dim_ : 1.0; }

  // Throws StructuralError if m is not dim x dim.
  Complex trace(const Matrix& m) const;

  friend bool operator==(const TracialAlgebra&, const TracialAlgebra&) = default;

 private:
  int dim_;
  TraceNormalization normalization_;
};

class Operator {
 public:
  Operator(Matrix entries, TracialAlgebra algebra);

  static Operator zero(const TracialAlgebra& algebra);
  static Operator identity(const TracialAlgebra& algebra);
  static Operator diagonal(const std::vector<double>& values,
                           TraceNormalization n = TraceNormalization::normalized);

  const Matrix& mat() const { return entries_; }
  const TracialAlgebra& algebra() const { return algebra_; }
  int dim() const { return algebra_.dim(); }

  Operator adjoint() const;
  // (x + x*) / 2
  Operator hermitian_part() const;

  Operator& operator+=(const Operator& other);
  Operator& operator-=(const Operator& other);
  Operator& operator*=(Complex s);

  friend Operator operator+(Operator a, const Operator& b) { return a += b; }
  friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
  friend Operator operator-(Operator a) { return a *= -1.0; }
  friend Operator operator*(Complex s, Operator a) { return a *= s; }
  friend Operator operator*(double s, Operator a) { return a *= s; }
  friend Operator operator*(const Operator& a, const Operator& b);

 private:
  Matrix entries_;
  TracialAlgebra algebra_;
};

// |x|^2 = x* x
Operator abs_square(const Operator& x);
// x x* = |x*|^2
Operator abs_square_adjoint(const Operator& x);

class Projection {
 public:
  // Validates |P^2 - P| <= eps_proj and |P* - P| <= eps_proj; throws DomainError.
  explicit Projection(Operator op);

  static Projection zero(const TracialAlgebra& algebra);
  static Projection identity(const TracialAlgebra& algebra);

  const Operator& op() const { return op_; }
  const Matrix& mat() const { return op_.mat(); }
  int dim() const { return op_.dim(); }
  // Numerical rank, rounded trace of the unnormalized matrix.
  int rank() const;
  // 1 - P
  Projection complement() const;

 private:
  Operator op_;
};

// Eigendecomposition of a self-adjoint operator; eigenvalues ascending.
struct SpectralData {
  RealVector eigenvalues;
  Matrix eigenvectors;
};

// Throws DomainError if x is not self-adjoint within eps_psd.
SpectralData eigh(const Operator& x);

bool is_self_adjoint(const Operator& x, double eps = tol::psd);
bool is_positive(const Operator& x, double eps = tol::psd);

Complex trace(const Operator& x);

// Singular values, descending.
RealVector singular_values(const Operator& x);

// (tau(|x|^p))^{1/p}; p = kInfinity gives the operator norm. DomainError for p < 1.
double lp_norm(const Operator& x, double p);
inline double op_norm(const Operator& x) { return lp_norm(x, kInfinity); }

// The decreasing rearrangement mu_t(x) as a step function.
struct SingularValueFunction {
  struct Step {
    double value;
    double mass;
  };
  std::vector<Step> steps;  // values descending

  double operator()(double t) const;
  // Integral of mu_t over t >= 0, i.e. |x|_1.
  double integral() const;
  double total_mass() const;
};

SingularValueFunction singular_value_function(const Operator& x);

// tau(chi_(lambda, inf)(|x|))
double tail_mass(const Operator& x, double lambda);

// sup_{lambda>0} lambda tau(chi_(lambda, inf)(|x|)), evaluated exactly from
// the sorted singular values.
double weak_l1_norm(const Operator& x);

// Same quasi-norm for a pooled list of singular values, each carrying the
// given mass.
double weak_l1_from_values(std::vector<double> values, double unit_mass);

// Projection onto eigenvectors of self-adjoint x with eigenvalue in (lo, hi].
// Eigenvalues within eps_eig of either endpoint are treated as lying on the
// closed side: a value at lo is excluded, a value at hi is included.
Projection spectral_projection(const Operator& x, double lo, double hi = kInfinity);

// f(x) for self-adjoint x by spectral calculus.
Operator apply_function(const Operator& x, const std::function<double(double)>& f);

// Positive square root; eigenvalues below zero (rounding) are clamped to 0.
Operator sqrt_psd(const Operator& x);
Operator positive_part(const Operator& x);
Operator negative_part(const Operator& x);
Operator modulus(const Operator& x);

double min_eigenvalue(const Operator& x);

// Projection onto range(P) ∩ range(Q): null space of [(1-P); (1-Q)].
Projection proj_meet(const Projection& p, const Projection& q);

// lambda_min(b - a) >= -eps; DomainError for non-self-adjoint input.
bool op_leq(const Operator& a, const Operator& b, double eps = tol::psd);
// lambda_min(b - a), the slack in a <= b.
double leq_slack(const Operator& a, const Operator& b);

// Projection onto range(x*) (right) or range(x) (left). Singular values at
// or below eps_rank * scale count as zero; scale defaults to |x|_inf.
Projection right_support(const Operator& x, std::optional<double> scale = std::nullopt);
Projection left_support(const Operator& x, std::optional<double> scale = std::nullopt);

// Connected components of the symmetric nonzero pattern of m. Exposed for
// tests; spectral routines use it to split block-diagonal inputs.
std::vector<std::vector<int>> block_components(const Matrix& m);

}  // namespace ncmart
