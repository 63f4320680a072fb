#pragma once

// Decompositions of a positive martingale built from its spectral layers:
// the adapted triple dx_n = a_n + b_n + c_n, the martingale pair
// dx_n = dy_n + dz_n for regular martingales, the four-way positive split
// of a general martingale, and the conversion of adapted sequences into
// martingale differences.

#include <array>
#include <vector>

#include "ncmart/cuculescu.hpp"
#include "ncmart/norms.hpp"

namespace ncmart {

struct AdaptedTriple {
  std::vector<Operator> a;  // index n-1
  std::vector<Operator> b;
  std::vector<Operator> c;
};

// DomainError for non-positive input.
AdaptedTriple abc_decompose(const Martingale& m);
AdaptedTriple abc_decompose(const Martingale& m, const SpectralLayers& layers);

// max_n |dx_n - a_n - b_n - c_n|_inf / |dx_n|_inf (absolute where dx_n = 0)
double abc_exactness_residual(const Martingale& m, const AdaptedTriple& t);
// max_n |E_n(u_n) - u_n|_inf over u = a, b, c
double abc_adaptedness_residual(const Martingale& m, const AdaptedTriple& t);

struct TermRatios {
  double a = 0.0;  // max_n |a_n|_2 - 3 |dx_n|_2
  double b = 0.0;  // max_n |b_n|_2 - |dx_n|_2
  double c = 0.0;  // max_n |c_n|_2 - |dx_n|_2
};
TermRatios abc_term_excess(const Martingale& m, const AdaptedTriple& t);

// |a|_{L2(l2_C)} + |b|_{L2(l2_C)} + |c|_{L2(l2_R)}
double abc_l2_report(const AdaptedTriple& t, const Martingale& m);

struct WeakReport {
  double theta = 0.0;    // weak-L1 of sum_n a_n ⊗ e_nn
  double sigma_b = 0.0;  // weak-L1 of (sum_n E_{n-1}|b_n|^2)^{1/2}
  double sigma_c = 0.0;  // weak-L1 of (sum_n E_{n-1}|c_n*|^2)^{1/2}
};

// DomainError unless tau(x_N) = 1.
WeakReport abc_weak_report(const AdaptedTriple& t, const Martingale& m);

// The four conditioned-square identities for b and c; returns the largest
// operator-norm residual.
double conditioned_square_identities(const AdaptedTriple& t, const Martingale& m, const SpectralLayers& layers);

struct MartingalePair {
  std::vector<Operator> dy;  // index n-1
  std::vector<Operator> dz;
};

MartingalePair yz_decompose(const Martingale& m);
MartingalePair yz_decompose(const Martingale& m, const SpectralLayers& layers);

struct RegularWeakReport {
  double sigma_y = 0.0;  // weak-L1 of sigma_C(y)
  double sigma_z = 0.0;  // weak-L1 of sigma_R(z)
};

// DomainError naming the offending level if m is not k-regular, or if
// tau(x_N) != 1.
RegularWeakReport regular_weak_report(const Martingale& m, double k);
RegularWeakReport regular_weak_report(const Martingale& m, double k, const MartingalePair& pair);

inline double regular_threshold(double k) { return 2.0 * (34.0 + 16.0 * (k + 1.0) * (k + 1.0)); }

// x_N = (h1 - h2) + i (h3 - h4), each h_k positive.
struct PositiveSplit {
  std::array<Martingale, 4> parts;
  static constexpr std::array<Complex, 4> coefficients{Complex(1, 0), Complex(-1, 0),
                                                       Complex(0, 1), Complex(0, -1)};
};

PositiveSplit positive_split(const Martingale& m);

struct DifferenceTriple {
  std::vector<Operator> diagonal;  // a_n - E_{n-1} a_n
  std::vector<Operator> column;    // b_n - E_{n-1} b_n
  std::vector<Operator> row;       // c_n - E_{n-1} c_n
};

// The subtraction is applied for n >= 2; level 1 terms are kept as they are.
DifferenceTriple to_martingale_differences(const Filtration& f, const AdaptedTriple& t);

// Weak-L1 of sum_n (a_n - E_{n-1} a_n) ⊗ e_nn, reported without a bound.
double centered_theta(const Filtration& f, const AdaptedTriple& t);

// Adapted triple and martingale pair of a general martingale, obtained by
// decomposing the four positive parts and recombining.
AdaptedTriple abc_decompose_general(const Martingale& m);
MartingalePair yz_decompose_general(const Martingale& m);

// Trivial candidates plus the (y, z) split and the converted triple.
CandidateSet constructive_candidates(const Martingale& m);

NormValue hardy_norm(const Martingale& m, double p);
NormValue h_norm(const Martingale& m, double p);
NormReport norm_report(const Martingale& m, double p, Level0 level0 = Level0::same_as_first);

}  // namespace ncmart
