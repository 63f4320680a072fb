#include "ncmart/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace ncmart {

namespace {

void require_same_algebra(const Operator& a, const Operator& b, const char* what) {
  if (!(a.algebra() == b.algebra())) {
    throw StructuralError(std::string(what) + ": operands belong to different algebras (dim " +
                          std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
  }
}

// Frobenius norm is an upper bound for the operator norm; good enough for
// scale factors and cheap predicates.
double frobenius(const Matrix& m) { return m.norm(); }

double exact_op_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

// Operator-norm test |m| <= bound, trying the cheap Frobenius bound first.
bool op_norm_at_most(const Matrix& m, double bound) {
  if (frobenius(m) <= bound) return true;
  return exact_op_norm(m) <= bound;
}

Matrix submatrix(const Matrix& m, const std::vector<int>& idx) {
  const auto b = static_cast<Eigen::Index>(idx.size());
  Matrix out(b, b);
  for (Eigen::Index r = 0; r < b; ++r)
    for (Eigen::Index c = 0; c < b; ++c) out(r, c) = m(idx[r], idx[c]);
  return out;
}

// Scatter the columns of a block-local basis into full-dimension vectors.
Matrix embed_columns(const Matrix& local, const std::vector<int>& idx, int dim) {
  Matrix out = Matrix::Zero(dim, local.cols());
  for (Eigen::Index r = 0; r < local.rows(); ++r) out.row(idx[r]) = local.row(r);
  return out;
}

// Components of the union of several nonzero patterns.
std::vector<std::vector<int>> joint_components(std::initializer_list<const Matrix*> ms) {
  const int d = static_cast<int>((*ms.begin())->rows());
  Matrix pattern = Matrix::Zero(d, d);
  for (const Matrix* m : ms) pattern += m->cwiseAbs().cast<Complex>();
  return block_components(pattern);
}

Matrix projector_from_basis(const Matrix& basis) {
  if (basis.cols() == 0) return Matrix::Zero(basis.rows(), basis.rows());
  return basis * basis.adjoint();
}

enum class SupportSide { right, left };

Projection support(const Operator& x, std::optional<double> scale, SupportSide side) {
  const int d = x.dim();
  const double s = scale.value_or(op_norm(x));
  if (s <= 0.0) return Projection::zero(x.algebra());
  const double cutoff = tol::rank * s;
  Matrix proj = Matrix::Zero(d, d);
  for (const auto& block : block_components(x.mat())) {
    Matrix local = submatrix(x.mat(), block);
    Eigen::JacobiSVD<Matrix> svd(local, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RealVector& sv = svd.singularValues();
    Eigen::Index kept = 0;
    while (kept < sv.size() && sv(kept) > cutoff) ++kept;
    if (kept == 0) continue;
    const Matrix& vecs = side == SupportSide::right ? svd.matrixV() : svd.matrixU();
    Matrix basis = embed_columns(vecs.leftCols(kept), block, d);
    proj += projector_from_basis(basis);
  }
  return Projection(Operator(std::move(proj), x.algebra()));
}

double spectral_scale(const RealVector& eigenvalues) {
  double s = 1.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) s = std::max(s, std::abs(eigenvalues(i)));
  return s;
}

}  // namespace

// ---------------------------------------------------------------- algebra --

TracialAlgebra::TracialAlgebra(int dim, TraceNormalization normalization)
    : dim_(dim), normalization_(normalization) {
  if (dim <= 0) throw StructuralError("TracialAlgebra: dimension must be positive");
}

Complex TracialAlgebra::trace(const Matrix& m) const {
  if (m.rows() != dim_ || m.cols() != dim_) {
    throw StructuralError("trace: operator is " + std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()) + ", algebra has dimension " +
                          std::to_string(dim_));
  }
  const Complex t = m.trace();
  return normalized() ? t / static_cast<double>(dim_) : t;
}

// --------------------------------------------------------------- operator --

Operator::Operator(Matrix entries, TracialAlgebra algebra)
    : entries_(std::move(entries)), algebra_(algebra) {
  if (entries_.rows() != algebra_.dim() || entries_.cols() != algebra_.dim()) {
    throw StructuralError("Operator: entries are " + std::to_string(entries_.rows()) + "x" +
                          std::to_string(entries_.cols()) + ", algebra has dimension " +
                          std::to_string(algebra_.dim()));
  }
}

Operator Operator::zero(const TracialAlgebra& algebra) {
  return Operator(Matrix::Zero(algebra.dim(), algebra.dim()), algebra);
}

Operator Operator::identity(const TracialAlgebra& algebra) {
  return Operator(Matrix::Identity(algebra.dim(), algebra.dim()), algebra);
}

Operator Operator::diagonal(const std::vector<double>& values, TraceNormalization n) {
  const int d = static_cast<int>(values.size());
  Matrix m = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i) m(i, i) = values[i];
  return Operator(std::move(m), TracialAlgebra(d, n));
}

Operator Operator::adjoint() const { return Operator(entries_.adjoint(), algebra_); }

Operator Operator::hermitian_part() const {
  return Operator(0.5 * (entries_ + entries_.adjoint()), algebra_);
}

Operator& Operator::operator+=(const Operator& other) {
  require_same_algebra(*this, other, "operator+");
  entries_ += other.entries_;
  return *this;
}

Operator& Operator::operator-=(const Operator& other) {
  require_same_algebra(*this, other, "operator-");
  entries_ -= other.entries_;
  return *this;
}

Operator& Operator::operator*=(Complex s) {
  entries_ *= s;
  return *this;
}

Operator operator*(const Operator& a, const Operator& b) {
  require_same_algebra(a, b, "operator*");
  return Operator(a.mat() * b.mat(), a.algebra());
}

Operator abs_square(const Operator& x) { return Operator(x.mat().adjoint() * x.mat(), x.algebra()); }

Operator abs_square_adjoint(const Operator& x) {
  return Operator(x.mat() * x.mat().adjoint(), x.algebra());
}

// ------------------------------------------------------------- projection --

Projection::Projection(Operator op) : op_(std::move(op)) {
  const Matrix& p = op_.mat();
  if (!op_norm_at_most(p - p.adjoint(), tol::proj)) {
    throw DomainError("Projection: operator is not self-adjoint within eps_proj");
  }
  if (!op_norm_at_most(p * p - p, tol::proj)) {
    throw DomainError("Projection: operator is not idempotent within eps_proj");
  }
}

Projection Projection::zero(const TracialAlgebra& algebra) {
  return Projection(Operator::zero(algebra));
}

Projection Projection::identity(const TracialAlgebra& algebra) {
  return Projection(Operator::identity(algebra));
}

int Projection::rank() const { return static_cast<int>(std::lround(mat().trace().real())); }

Projection Projection::complement() const {
  return Projection(Operator::identity(op_.algebra()) - op_);
}

// ---------------------------------------------------------------- spectra --

std::vector<std::vector<int>> block_components(const Matrix& m) {
  const int d = static_cast<int>(m.rows());
  std::vector<int> parent(d);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      if (m(i, j) != Complex(0.0) || m(j, i) != Complex(0.0)) {
        const int a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  std::vector<std::vector<int>> blocks;
  std::vector<int> slot(d, -1);
  for (int i = 0; i < d; ++i) {
    const int root = find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<int>(blocks.size());
      blocks.emplace_back();
    }
    blocks[slot[root]].push_back(i);
  }
  return blocks;
}

bool is_self_adjoint(const Operator& x, double eps) {
  const double scale = std::max(1.0, frobenius(x.mat()));
  return frobenius(x.mat() - x.mat().adjoint()) <= eps * scale;
}

SpectralData eigh(const Operator& x) {
  if (!is_self_adjoint(x)) throw DomainError("eigh: operator is not self-adjoint");
  const int d = x.dim();
  const Matrix h = 0.5 * (x.mat() + x.mat().adjoint());

  std::vector<std::pair<double, Eigen::VectorXcd>> pairs;
  pairs.reserve(d);
  for (const auto& block : block_components(h)) {
    if (block.size() == 1) {
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d);
      v(block[0]) = 1.0;
      pairs.emplace_back(h(block[0], block[0]).real(), std::move(v));
      continue;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(submatrix(h, block));
    Matrix vecs = embed_columns(solver.eigenvectors(), block, d);
    for (Eigen::Index k = 0; k < vecs.cols(); ++k) {
      pairs.emplace_back(solver.eigenvalues()(k), vecs.col(k));
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  SpectralData out{RealVector(d), Matrix(d, d)};
  for (int k = 0; k < d; ++k) {
    out.eigenvalues(k) = pairs[k].first;
    out.eigenvectors.col(k) = pairs[k].second;
  }
  return out;
}

bool is_positive(const Operator& x, double eps) {
  if (!is_self_adjoint(x, eps)) return false;
  const SpectralData s = eigh(x);
  return s.eigenvalues(0) >= -eps * spectral_scale(s.eigenvalues);
}

Complex trace(const Operator& x) { return x.algebra().trace(x.mat()); }

RealVector singular_values(const Operator& x) {
  Eigen::JacobiSVD<Matrix> svd(x.mat());
  return svd.singularValues();
}

double lp_norm(const Operator& x, double p) {
  if (!(p >= 1.0)) throw DomainError("lp_norm: p must be >= 1 (got " + std::to_string(p) + ")");
  const RealVector s = singular_values(x);
  const double top = s.size() > 0 ? s(0) : 0.0;
  if (std::isinf(p) || top == 0.0) return top;
  const double mass = x.algebra().unit_mass();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < s.size(); ++k) acc += mass * std::pow(s(k) / top, p);
  return top * std::pow(acc, 1.0 / p);
}

double SingularValueFunction::operator()(double t) const {
  double cum = 0.0;
  for (const Step& s : steps) {
    cum += s.mass;
    if (t < cum) return s.value;
  }
  return 0.0;
}

double SingularValueFunction::integral() const {
  double acc = 0.0;
  for (const Step& s : steps) acc += s.value * s.mass;
  return acc;
}

double SingularValueFunction::total_mass() const {
  double acc = 0.0;
  for (const Step& s : steps) acc += s.mass;
  return acc;
}

SingularValueFunction singular_value_function(const Operator& x) {
  const RealVector s = singular_values(x);
  SingularValueFunction f;
  f.steps.reserve(s.size());
  for (Eigen::Index k = 0; k < s.size(); ++k) f.steps.push_back({s(k), x.algebra().unit_mass()});
  return f;
}

double tail_mass(const Operator& x, double lambda) {
  const RealVector s = singular_values(x);
  double acc = 0.0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > lambda) acc += x.algebra().unit_mass();
  return acc;
}

double weak_l1_from_values(std::vector<double> values, double unit_mass) {
  std::sort(values.begin(), values.end(), std::greater<>());
  double best = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    best = std::max(best, static_cast<double>(k + 1) * unit_mass * values[k]);
  }
  return best;
}

double weak_l1_norm(const Operator& x) {
  const RealVector s = singular_values(x);
  return weak_l1_from_values(std::vector<double>(s.data(), s.data() + s.size()),
                             x.algebra().unit_mass());
}

Projection spectral_projection(const Operator& x, double lo, double hi) {
  if (!is_self_adjoint(x)) throw DomainError("spectral_projection: operator is not self-adjoint");
  const SpectralData s = eigh(x);
  const double slack = tol::eig * spectral_scale(s.eigenvalues);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < s.eigenvalues.size(); ++k) {
    const double v = s.eigenvalues(k);
    if (v > lo + slack && (std::isinf(hi) || v <= hi + slack)) keep.push_back(k);
  }
  Matrix basis(x.dim(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) basis.col(j) = s.eigenvectors.col(keep[j]);
  return Projection(Operator(projector_from_basis(basis), x.algebra()));
}

Operator apply_function(const Operator& x, const std::function<double(double)>& f) {
  const SpectralData s = eigh(x);
  RealVector fv(s.eigenvalues.size());
  for (Eigen::Index k = 0; k < fv.size(); ++k) fv(k) = f(s.eigenvalues(k));
  Matrix m = s.eigenvectors * fv.cast<Complex>().asDiagonal() * s.eigenvectors.adjoint();
  return Operator(std::move(m), x.algebra());
}

Operator sqrt_psd(const Operator& x) {
  const SpectralData s = eigh(x);
  if (s.eigenvalues(0) < -tol::psd * spectral_scale(s.eigenvalues)) {
    throw DomainError("sqrt_psd: operator has eigenvalue " + std::to_string(s.eigenvalues(0)));
  }
  RealVector fv = s.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  Matrix m = s.eigenvectors * fv.cast<Complex>().asDiagonal() * s.eigenvectors.adjoint();
  return Operator(std::move(m), x.algebra());
}

Operator positive_part(const Operator& x) {
  return apply_function(x, [](double v) { return v > 0.0 ? v : 0.0; });
}

Operator negative_part(const Operator& x) {
  return apply_function(x, [](double v) { return v < 0.0 ? -v : 0.0; });
}

Operator modulus(const Operator& x) { return sqrt_psd(abs_square(x)); }

double min_eigenvalue(const Operator& x) {
  if (!is_self_adjoint(x)) throw DomainError("min_eigenvalue: operator is not self-adjoint");
  return eigh(x).eigenvalues(0);
}

Projection proj_meet(const Projection& p, const Projection& q) {
  if (!(p.op().algebra() == q.op().algebra())) {
    throw StructuralError("proj_meet: projections belong to different algebras");
  }
  const int d = p.dim();
  const Matrix one = Matrix::Identity(d, d);
  const Matrix cp = one - p.mat();
  const Matrix cq = one - q.mat();
  Matrix meet = Matrix::Zero(d, d);
  for (const auto& block : joint_components({&p.mat(), &q.mat()})) {
    const auto b = static_cast<Eigen::Index>(block.size());
    Matrix stacked(2 * b, b);
    stacked.topRows(b) = submatrix(cp, block);
    stacked.bottomRows(b) = submatrix(cq, block);
    Eigen::JacobiSVD<Matrix> svd(stacked, Eigen::ComputeFullV);
    const RealVector& sv = svd.singularValues();
    const double cutoff = tol::rank * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
    std::vector<Eigen::Index> null_cols;
    for (Eigen::Index k = 0; k < b; ++k)
      if (sv(k) <= cutoff) null_cols.push_back(k);
    if (null_cols.empty()) continue;
    Matrix local(b, static_cast<Eigen::Index>(null_cols.size()));
    for (std::size_t j = 0; j < null_cols.size(); ++j) local.col(j) = svd.matrixV().col(null_cols[j]);
    meet += projector_from_basis(embed_columns(local, block, d));
  }
  return Projection(Operator(std::move(meet), p.op().algebra()));
}

double leq_slack(const Operator& a, const Operator& b) {
  if (!is_self_adjoint(a) || !is_self_adjoint(b)) {
    throw DomainError("op_leq: operands must be self-adjoint");
  }
  return min_eigenvalue(b - a);
}

bool op_leq(const Operator& a, const Operator& b, double eps) { return leq_slack(a, b) >= -eps; }

Projection right_support(const Operator& x, std::optional<double> scale) {
  return support(x, scale, SupportSide::right);
}

Projection left_support(const Operator& x, std::optional<double> scale) {
  return support(x, scale, SupportSide::left);
}

}  // namespace ncmart
