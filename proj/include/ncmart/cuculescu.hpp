#pragma once

// Cuculescu projections of a positive martingale, the dyadic families,
// spectral layers p_{i,n}, support projections r_{i,n}, the operators h_n,
// and checks of the inequalities they satisfy.
//
// Level n is stored at index n - 1 throughout.

#include <vector>

#include "ncmart/filtration.hpp"

namespace ncmart {

struct CuculescuFamily {
  double lambda = 0.0;
  std::vector<Projection> q;  // q_1..q_N

  const Projection& at(int n) const { return q.at(n - 1); }
};

// q_0 = 1, q_n = q_{n-1} - chi_(lambda, inf)(q_{n-1} x_n q_{n-1}).
// DomainError if m is not positive or lambda <= 0.
CuculescuFamily cuculescu(const Martingale& m, double lambda);

// Smallest k >= 0 with 2^k >= max_n |x_n|_inf, ties within eps_eig included.
int dyadic_kmax(const Martingale& m);

// Families at lambda = 2^k for k = 0..k_max.
std::vector<CuculescuFamily> dyadic_families(const Martingale& m);

struct SpectralLayers {
  int k_max = 0;
  // meet[i][n-1] = ∧_{k=i}^{k_max} q_n^(2^k) for i = 0..k_max+1 (the empty
  // meet at i = k_max+1 is 1).
  std::vector<std::vector<Projection>> meet;
  // layer[i][n-1] = p_{i,n} for i = 0..k_max+1.
  std::vector<std::vector<Projection>> layer;

  int layer_count() const { return static_cast<int>(layer.size()); }
  const Projection& p(int i, int n) const { return layer.at(i).at(n - 1); }
  const Projection& P(int i, int n) const { return meet.at(i).at(n - 1); }
};

SpectralLayers layers(const Martingale& m);
SpectralLayers layers(const Martingale& m, const std::vector<CuculescuFamily>& families);

struct SupportFamily {
  // r[i][n-1] = r(p_{i,n} - p_{i,n-1} p_{i,n}) for n >= 2; zero at n = 1 and
  // for i = 0 (not used by the bounds).
  std::vector<std::vector<Projection>> r;
  // h_n = sum_i (p_{i,n} - p_{i,n-1} p_{i,n}) for n >= 2; zero at n = 1.
  std::vector<Operator> h;
  double h_sup = 0.0;  // sup_{n>=2} |h_n|_inf
  double h_l2 = 0.0;   // (sum_{n>=2} |h_n|_2^2)^{1/2}
};

SupportFamily supports(const Martingale& m, const SpectralLayers& layers);

// Compression energy at one lambda.
struct CompressionEnergy {
  double lambda = 0.0;
  // Index n-1 for n >= 2; entries at n = 1 are 0.
  std::vector<double> compressed_difference;  // |q_n dx_n q_{n-1}|_2
  std::vector<double> compression_step;       // |q_n x_n q_n - q_{n-1} x_{n-1} q_{n-1}|_2
  double first = 0.0;                         // |q_1 x_1 q_1|_2^2
  double total = 0.0;                         // first + sum of squared steps
};

// DomainError unless tau(x_N) = 1 (within tol::num).
CompressionEnergy compression_energy(const Martingale& m, double lambda);
CompressionEnergy compression_energy(const Martingale& m, const CuculescuFamily& family);

// ------------------------------------------------------------- checks --

struct CuculescuCheck {
  double membership = 0.0;       // max_n |E_n(q_n) - q_n|_inf
  double commutation = 0.0;      // max_n |[q_n, q_{n-1} x_n q_{n-1}]|_inf
  double monotone_slack = 0.0;   // min_n lambda_min(q_{n-1} - q_n)
  double bounded_slack = 0.0;    // min_n lambda_min(lambda q_n - q_n x_n q_n)
  double tail_mass = 0.0;        // tau(1 - q_N)
  double tail_excess = 0.0;      // tau(1 - q_N) - |x_N|_1 / lambda
};

CuculescuCheck check_cuculescu(const Martingale& m, const CuculescuFamily& family);

struct LayerCheck {
  double disjointness = 0.0;      // max_{n, i != j} |p_{i,n} p_{j,n}|_inf
  double partition_of_unity = 0.0;  // max_n |sum_i p_{i,n} - 1|_inf
  double domination_slack = 0.0;  // min_{n, m0} lambda_min(q_n^(2^m0) - sum_{i<=m0} p_{i,n})
  double membership = 0.0;        // max_{i,n} |E_n(p_{i,n}) - p_{i,n}|_inf
};

LayerCheck check_layers(const Martingale& m, const std::vector<CuculescuFamily>& families,
                        const SpectralLayers& layers);

struct SupportCheck {
  double below_layer_slack = 0.0;  // min lambda_min(p_{i,n} - r_{i,n})
  double left_support_slack = 0.0;  // min lambda_min(P^(i-1)_{n-1} - P^(i-1)_n - l(...))
  // max over m0 = 0..k_max of sum_{n>=2} tau(sum_{i>=m0+1} r_{i,n}) - 4 * 2^-m0
  double mass_excess = 0.0;
  std::vector<double> mass;  // the left-hand side per m0
};

SupportCheck check_supports(const Martingale& m, const SpectralLayers& layers,
                            const SupportFamily& supports);

}  // namespace ncmart
