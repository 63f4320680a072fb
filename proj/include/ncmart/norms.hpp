#pragma once

// Square functions, conditioned square functions, Hardy norms H^p and h^p,
// BMO norms and the weak-L1 norm of a diagonal embedding.
//
// For p >= 2 the Hardy norms are intersections and are computed exactly.
// For p < 2 they are infima over decompositions; we return the smallest
// value over an explicit candidate set, which is an upper bound.

#include <functional>
#include <string>
#include <vector>

#include "ncmart/filtration.hpp"

namespace ncmart {

// (sum |d_k|^2)^{1/2} and (sum |d_k*|^2)^{1/2} for an arbitrary sequence.
Operator column_square(const std::vector<Operator>& d);
Operator row_square(const std::vector<Operator>& d);
// (sum_n E_{n-1}|d_n|^2)^{1/2}, E_0 = E_1; row version with |d_n*|^2.
Operator conditioned_column_square(const Filtration& f, const std::vector<Operator>& d);
Operator conditioned_row_square(const Filtration& f, const std::vector<Operator>& d);

Operator s_col(const Martingale& m);
Operator s_row(const Martingale& m);
Operator sigma_col(const Martingale& m);
Operator sigma_row(const Martingale& m);

// (sum_n |d_n|_p^p)^{1/p}; sup_n |d_n|_inf for p = infinity.
double diagonal_norm(const std::vector<Operator>& d, double p);

// Weak-L1 quasi-norm of sum_n d_n ⊗ e_nn under tau ⊗ tr.
double diag_embed_weak_l1(const std::vector<Operator>& d);

struct NormValue {
  double value = 0.0;
  bool exact = true;
};

// Difference sequences splitting dx. Hardy candidates split dx = y + z with
// y measured by S_C and z by S_R; h candidates split dx = D + C + R.
struct HardySplit {
  std::string label;
  std::vector<Operator> column;
  std::vector<Operator> row;
};
struct HTriple {
  std::string label;
  std::vector<Operator> diagonal;
  std::vector<Operator> column;
  std::vector<Operator> row;
};
struct CandidateSet {
  std::vector<HardySplit> hardy;
  std::vector<HTriple> h;
};

// (x, 0), (0, x) and the all-diagonal / all-column / all-row triples.
CandidateSet trivial_candidates(const Martingale& m);

// p >= 2: max(|S_C|_p, |S_R|_p), exact. p < 2: min over candidates.
NormValue hardy_norm(const Martingale& m, double p, const CandidateSet& candidates);
// p >= 2: max(h_D, |sigma_C|_p, |sigma_R|_p), exact. p < 2: min over candidates.
NormValue h_norm(const Martingale& m, double p, const CandidateSet& candidates);

// ------------------------------------------------------------------ BMO --

// What E_0 means in the BMO oscillation at n = 1.
enum class Level0 { same_as_first, scalar };

// E(n, x) for 0 <= n <= levels.
using Expectation = std::function<Operator(int, const Operator&)>;

Expectation filtration_expectation(const Filtration& f, Level0 level0 = Level0::same_as_first);

struct BmoNorms {
  double col = 0.0;
  double row = 0.0;
  double bmo = 0.0;
};

// col = (max_n |E_n |a - E_{n-1} a|^2|_inf)^{1/2}, row = col of a*.
BmoNorms bmo_norms(const Operator& a, const Expectation& e, int levels);
BmoNorms bmo_norms(const Operator& a, const Filtration& f, Level0 level0 = Level0::same_as_first);

// max_n |E_n|x - x_{n-1}|^2 - |dx_n|^2 - E_n(sum_{k>n} E_{k-1}|dx_k|^2)|_inf
// with x_n = E_n(x) for 0 <= n <= levels and x_levels = x.
double bmo_identity_residual(const Operator& x, const Expectation& e, int levels);

// sup_n |dx_n|_inf + |(sum_n E_{n-1}(|dx_n|^2 + |dx_n*|^2))^{1/2}|_inf
double bmo_upper_bound(const Operator& x, const Expectation& e, int levels);

// lambda_min(sum_n E_{n-1}(|dx_n|^2 + |dx_n*|^2) - sigma_C(x)^2), should be >= 0.
double bmo_sigma_slack(const Operator& x, const Expectation& e, int levels);

// --------------------------------------------------------------- report --

struct NormReport {
  double p = 2.0;
  double s_col_p = 0.0;
  double s_row_p = 0.0;
  double sigma_col_p = 0.0;
  double sigma_row_p = 0.0;
  double h_diag_p = 0.0;
  double hardy_p = 0.0;
  double h_p = 0.0;
  double bmo_col = 0.0;
  double bmo_row = 0.0;
  double bmo = 0.0;
  bool hardy_exact = true;
  bool h_exact = true;
};

NormReport norm_report(const Martingale& m, double p, const CandidateSet& candidates,
                       Level0 level0 = Level0::same_as_first);

}  // namespace ncmart
