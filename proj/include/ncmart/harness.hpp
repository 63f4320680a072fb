#pragma once

// Ensemble runs: inequality suites with fixed thresholds, constant
// measurements over a p-grid, and the BMO / independence scenarios.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ncmart/decompose.hpp"

namespace ncmart {

enum class TrialMode { positive_normalized, self_adjoint, k_regular };

struct EnsembleSpec {
  int dim = 8;
  int levels = 4;
  FiltrationKind family = FiltrationKind::pinching;
  int trials = 200;
  std::uint64_t seed = 7;
  TrialMode mode = TrialMode::positive_normalized;
  double k = 2.0;
};

Filtration make_filtration(const EnsembleSpec& spec);
// Trial i, reproducible in isolation from (spec.seed, i).
Martingale ensemble_trial(const EnsembleSpec& spec, const Filtration& f, int trial);

struct CheckResult {
  std::string name;
  double observed = -kInfinity;  // max over trials
  double threshold = kInfinity;  // observed <= threshold passes
  bool gating = true;            // false: reported only
  int worst_trial = -1;
  std::uint64_t worst_seed = 0;
  int samples = 0;

  bool pass() const { return !gating || observed <= threshold; }
};

struct ExcludedTrial {
  int trial = -1;
  std::uint64_t seed = 0;
  std::string reason;
};

class SuiteResult {
 public:
  explicit SuiteResult(std::string name = {}) : name_(std::move(name)) {}

  // Declares a check so that it is reported even when no trial sampled it.
  void declare(const std::string& check, double threshold, bool gating = true);
  void record(const std::string& check, double observed, int trial, std::uint64_t seed);
  void exclude(int trial, std::uint64_t seed, std::string reason);

  const std::string& name() const { return name_; }
  const std::vector<CheckResult>& checks() const { return checks_; }
  const std::vector<ExcludedTrial>& excluded() const { return excluded_; }
  const CheckResult& check(const std::string& name) const;
  bool has(const std::string& name) const;
  bool passed() const;
  const CheckResult* worst_failure() const;

  void merge(const SuiteResult& other);

 private:
  CheckResult& find(const std::string& name);

  std::string name_;
  std::vector<CheckResult> checks_;
  std::vector<ExcludedTrial> excluded_;
};

// Tolerances for residual-type checks; --tol replaces all of them.
struct SuiteTolerances {
  double operator_residual = 1e-8;  // membership, commutation, slacks, identities
  double exactness = 1e-9;          // relative decomposition residuals
  double mass = 1e-10;              // trace-mass bounds
  double hilbert = 1e-10;           // p = 2 identities, relative

  static SuiteTolerances uniform(double tol) { return {tol, tol, tol, tol}; }
};

// Dyadic-and-fixed lambda grid used by the suite: {1,2,4,8,16} ∪ {2^k : k <= k_max}.
std::vector<double> suite_lambdas(int k_max);

// Checks on one positive normalized martingale; used by the suite and tests.
void weak_type_checks(const Martingale& m, int trial, std::uint64_t seed,
                      const SuiteTolerances& tol, SuiteResult& out);

SuiteResult run_weak_type_suite(const EnsembleSpec& spec, const SuiteTolerances& tol = {});

void regular_checks(const Martingale& m, double k, int trial, std::uint64_t seed,
                    const SuiteTolerances& tol, SuiteResult& out);

SuiteResult run_regular_suite(const EnsembleSpec& spec, const SuiteTolerances& tol = {});

// ------------------------------------------------------------ constants --

inline const std::vector<std::string>& ratio_names() {
  static const std::vector<std::string> names{"alpha", "beta", "delta", "eta", "kappa", "v"};
  return names;
}

struct RatioRow {
  double p = 0.0;
  std::string ratio;
  double max = 0.0;
  double mean = 0.0;
  bool exact = true;
  int trials = 0;
  std::uint64_t seed = 0;
};

struct SlopeFit {
  std::optional<double> near_one;  // log max vs log (p-1)^{-1}, p <= 2
  std::optional<double> large_p;   // log max vs log p, p >= 2
};

struct NormRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  NormReport report;
  double lp = 0.0;
};

struct ConstantsReport {
  std::vector<RatioRow> rows;
  std::map<std::string, SlopeFit> slopes;
  std::vector<NormRecord> norms;
};

// DomainError for p < 1.
ConstantsReport estimate_constants(const EnsembleSpec& spec, const std::vector<double>& p_grid);

// ------------------------------------------------------------------ BMO --

struct BmoTrial {
  double bmo = 0.0;
  double bound = 0.0;         // sup |a_n|_inf + |(sum E(a_n a_n* + a_n* a_n))^{1/2}|_inf
  double scalar_bound = 0.0;  // sup |a_n|_inf + (sum |a_n|_2^2)^{1/2}
  double identity_residual = 0.0;
  double upper_bound_gap = 0.0;  // bmo - (sup |a_n|_inf + conditioned square bound)
  double sigma_slack = 0.0;
};

BmoTrial bmo_trial(const IndependentSequence& seq);

inline const double kReverseBmoConstant = 1.0 + std::sqrt(3.0);

SuiteResult run_bmo_suite(const std::vector<int>& factor_dims, int trials, std::uint64_t seed,
                          const SuiteTolerances& tol = {});

// ----------------------------------------------------------- Khintchine --

// |sum a_n ⊗ b_n|_BMO / max(|(sum b*b)^{1/2}|, |(sum bb*)^{1/2}|) in
// B ⊗ M with the filtration B ⊗ M_n and level 0 equal to B ⊗ 1.
// nullopt if every b_n vanishes.
std::optional<double> khintchine_ratio(const IndependentSequence& seq,
                                       const std::vector<Matrix>& b);

struct KhintchineReport {
  double alpha = 0.0;  // inf |a_n|_2
  double beta = 0.0;   // sup |a_n|_inf
  double min_ratio = kInfinity;
  double max_ratio = 0.0;
  int trials = 0;
  int excluded = 0;
};

// DomainError if inf |a_n|_2 = 0.
KhintchineReport run_khintchine_scenario(const std::vector<int>& factor_dims, int b_dim, int trials,
                                         std::uint64_t seed);

}  // namespace ncmart
