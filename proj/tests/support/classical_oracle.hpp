#pragma once

// Scalar brute force for martingales on a commutative block-averaging
// filtration. Works on plain vectors indexed by atom; no library code.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

using Func = std::vector<double>;  // one value per atom
using Blocks = std::vector<std::vector<int>>;

// v > lambda, with values within 1e-10 * max(1, |lambda|) of lambda counted
// as equal (the boundary convention of spectral projections).
inline bool above(double v, double lambda) {
  return v > lambda + 1e-10 * std::max(1.0, std::abs(lambda));
}

class Classical {
 public:
  // levels[n-1] partitions the atoms at level n; x is the terminal value.
  Classical(std::vector<Blocks> levels, Func x) : levels_(std::move(levels)), d_(x.size()) {
    const int N = levels_.size();
    for (int n = 1; n <= N; ++n) x_.push_back(expect(n, x));
    for (int n = 1; n <= N; ++n) {
      Func dx(d_);
      for (std::size_t w = 0; w < d_; ++w) dx[w] = x_[n - 1][w] - (n > 1 ? x_[n - 2][w] : 0.0);
      dx_.push_back(dx);
    }
    double top = 0.0;
    for (const Func& f : x_)
      for (double v : f) top = std::max(top, std::abs(v));
    kmax_ = 0;
    while (above(top, std::pow(2.0, kmax_))) ++kmax_;
    Func run(d_, -std::numeric_limits<double>::infinity());
    for (int n = 1; n <= N; ++n) {
      std::vector<int> iota(d_);
      for (std::size_t w = 0; w < d_; ++w) {
        run[w] = std::max(run[w], x_[n - 1][w]);
        int i = 0;
        while (i <= kmax_ && above(run[w], std::pow(2.0, i))) ++i;
        iota[w] = i;
      }
      running_max_.push_back(run);
      iota_.push_back(iota);
    }
  }

  int levels() const { return levels_.size(); }
  std::size_t atoms() const { return d_; }
  int kmax() const { return kmax_; }

  // Block average at level n, with level 0 read as level 1.
  Func expect(int n, const Func& f) const {
    Func out(d_);
    for (const auto& block : levels_.at(std::max(n, 1) - 1)) {
      double s = 0.0;
      for (int w : block) s += f[w];
      for (int w : block) out[w] = s / block.size();
    }
    return out;
  }

  const Func& x(int n) const { return x_.at(n - 1); }
  const Func& dx(int n) const { return dx_.at(n - 1); }
  int iota(int n, std::size_t w) const { return iota_.at(n - 1)[w]; }

  // Indicator of max_{k<=n} x_k <= lambda.
  Func q(double lambda, int n) const {
    Func out(d_);
    for (std::size_t w = 0; w < d_; ++w) out[w] = above(running_max_[n - 1][w], lambda) ? 0.0 : 1.0;
    return out;
  }
  Func p(int i, int n) const {
    Func out(d_);
    for (std::size_t w = 0; w < d_; ++w) out[w] = iota(n, w) == i ? 1.0 : 0.0;
    return out;
  }
  // Atoms entering layer i at level n, n >= 2.
  Func r(int i, int n) const {
    Func out(d_);
    for (std::size_t w = 0; w < d_; ++w) out[w] = iota(n, w) == i && iota(n - 1, w) != i ? 1.0 : 0.0;
    return out;
  }
  Func h(int n) const {
    Func out(d_, 0.0);
    if (n < 2) return out;
    for (std::size_t w = 0; w < d_; ++w) out[w] = iota(n, w) != iota(n - 1, w) ? 1.0 : 0.0;
    return out;
  }

  // dx split by whether the layer index rose at level n; c vanishes.
  Func a(int n) const { return select(n, [&](std::size_t w) { return n > 1 && iota(n, w) > iota(n - 1, w); }); }
  Func b(int n) const { return select(n, [&](std::size_t w) { return n == 1 || iota(n, w) <= iota(n - 1, w); }); }
  Func c(int) const { return Func(d_, 0.0); }
  Func dy(int n) const { return dx(n); }
  Func dz(int) const { return Func(d_, 0.0); }

  // ------------------------------------------------------------ norms --

  double mean(const Func& f) const {
    double s = 0.0;
    for (double v : f) s += v;
    return s / d_;
  }
  double lp(const Func& f, double p) const {
    if (std::isinf(p)) {
      double m = 0.0;
      for (double v : f) m = std::max(m, std::abs(v));
      return m;
    }
    double s = 0.0;
    for (double v : f) s += std::pow(std::abs(v), p);
    return std::pow(s / d_, 1.0 / p);
  }
  // sup over lambda of lambda * (mass of |f| > lambda), scanning every
  // distinct value from just below.
  static double weak_l1(const Func& f, double unit_mass) {
    double best = 0.0;
    for (double v : f) {
      const double lam = std::abs(v);
      std::size_t count = 0;
      for (double u : f) count += std::abs(u) >= lam ? 1 : 0;
      best = std::max(best, lam * count * unit_mass);
    }
    return best;
  }
  double weak_l1(const Func& f) const { return weak_l1(f, 1.0 / d_); }

  Func square(const std::vector<Func>& d) const {
    Func out(d_, 0.0);
    for (const Func& f : d)
      for (std::size_t w = 0; w < d_; ++w) out[w] += f[w] * f[w];
    for (double& v : out) v = std::sqrt(v);
    return out;
  }
  Func conditioned_square(const std::vector<Func>& d) const {
    Func out(d_, 0.0);
    for (std::size_t k = 0; k < d.size(); ++k) {
      Func sq(d_);
      for (std::size_t w = 0; w < d_; ++w) sq[w] = d[k][w] * d[k][w];
      const Func e = expect(static_cast<int>(k), sq);
      for (std::size_t w = 0; w < d_; ++w) out[w] += e[w];
    }
    for (double& v : out) v = std::sqrt(std::max(v, 0.0));
    return out;
  }
  double diagonal(const std::vector<Func>& d, double p) const {
    double s = 0.0;
    for (const Func& f : d) s += std::pow(lp(f, p), p);
    return std::pow(s, 1.0 / p);
  }
  // Subtract E_{n-1} from level n >= 2.
  std::vector<Func> centered(const std::vector<Func>& d) const {
    std::vector<Func> out = d;
    for (std::size_t k = 1; k < d.size(); ++k) {
      const Func e = expect(static_cast<int>(k), d[k]);
      for (std::size_t w = 0; w < d_; ++w) out[k][w] -= e[w];
    }
    return out;
  }

  std::vector<Func> differences() const { return dx_; }
  template <class F>
  std::vector<Func> sequence(F f) const {
    std::vector<Func> out;
    for (int n = 1; n <= levels(); ++n) out.push_back(f(n));
    return out;
  }

  double s_p(double p) const { return lp(square(dx_), p); }
  double sigma_p(double p) const { return lp(conditioned_square(dx_), p); }
  double hardy_p(double p) const { return s_p(p); }
  double h_p(double p) const {
    if (p >= 2.0) return std::max(diagonal(dx_, p), sigma_p(p));
    const auto av = centered(sequence([&](int n) { return a(n); }));
    const auto bv = centered(sequence([&](int n) { return b(n); }));
    const auto cv = centered(sequence([&](int n) { return c(n); }));
    const double abc = diagonal(av, p) + lp(conditioned_square(bv), p) + lp(conditioned_square(cv), p);
    return std::min({diagonal(dx_, p), sigma_p(p), abc});
  }
  double bmo() const {
    const Func& top = x_.back();
    double worst = 0.0;
    for (int n = 1; n <= levels(); ++n) {
      const Func prev = expect(n - 1, top);
      Func osc(d_);
      for (std::size_t w = 0; w < d_; ++w) osc[w] = (top[w] - prev[w]) * (top[w] - prev[w]);
      worst = std::max(worst, lp(expect(n, osc), INFINITY));
    }
    return std::sqrt(worst);
  }

  double theta() const {
    Func pooled;
    for (int n = 1; n <= levels(); ++n) {
      const Func an = a(n);
      pooled.insert(pooled.end(), an.begin(), an.end());
    }
    return weak_l1(pooled, 1.0 / d_);
  }
  double sigma_b() const { return weak_l1(conditioned_square(sequence([&](int n) { return b(n); }))); }

 private:
  template <class Pred>
  Func select(int n, Pred keep) const {
    Func out(d_, 0.0);
    for (std::size_t w = 0; w < d_; ++w)
      if (keep(w)) out[w] = dx(n)[w];
    return out;
  }

  std::vector<Blocks> levels_;
  std::size_t d_;
  std::vector<Func> x_, dx_, running_max_;
  std::vector<std::vector<int>> iota_;
  int kmax_ = 0;
};

}  // namespace oracle
