#pragma once

// Operators on tensor factors of H_Lambda = (x) H_x and their matrix-free embedding.
//
// Basis convention: a basis index of a layout is the mixed-radix number whose
// digits are the local basis labels of the sites in canonical order, most
// significant digit first.

#include <complex>
#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lppl/errors.hpp"
#include "lppl/lattice.hpp"

namespace lppl {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr std::size_t kDefaultDenseCap = 4096;
inline constexpr double kHermitianTolerance = 1e-12;

/// Site set together with the local dimension d_x of every site.
class TensorLayout {
public:
  TensorLayout() : TensorLayout(SiteSet(1), {}) {}

  TensorLayout(SiteSet sites, std::vector<int> dims) : sites_(std::move(sites)), dims_(std::move(dims)) {
    if (dims_.size() != sites_.size())
      throw DimensionError("TensorLayout: " + std::to_string(dims_.size()) + " local dimensions for " +
                           std::to_string(sites_.size()) + " sites");
    strides_.assign(dims_.size(), 1);
    constexpr auto limit = static_cast<std::size_t>(std::numeric_limits<Eigen::Index>::max());
    dimension_ = 1;
    for (std::size_t i = dims_.size(); i-- > 0;) {
      if (dims_[i] < 1)
        throw DimensionError("TensorLayout: local dimension at " + to_string(sites_[i]) + " must be >= 1");
      strides_[i] = dimension_;
      const auto d = static_cast<std::size_t>(dims_[i]);
      if (dimension_ > limit / d)
        throw DimensionError("TensorLayout: Hilbert space dimension overflows the index range");
      dimension_ *= d;
    }
  }

  static TensorLayout uniform(SiteSet sites, int d) {
    std::vector<int> dims(sites.size(), d);
    return TensorLayout(std::move(sites), std::move(dims));
  }

  const SiteSet& sites() const noexcept { return sites_; }
  const std::vector<int>& dims() const noexcept { return dims_; }
  const std::vector<std::size_t>& strides() const noexcept { return strides_; }
  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return sites_.size(); }

  int local_dim(const Site& x) const {
    auto i = sites_.index_of(x);
    if (i == sites_.size()) throw GeometryError("TensorLayout: site " + to_string(x) + " not in layout");
    return dims_[i];
  }

  /// Layout of a subset, inheriting local dimensions.
  TensorLayout sub_layout(const SiteSet& subset) const {
    if (!subset.is_subset_of(sites_))
      throw GeometryError("sub_layout: " + to_string(subset) + " is not contained in " + to_string(sites_));
    std::vector<int> dims;
    dims.reserve(subset.size());
    for (const auto& x : subset) dims.push_back(local_dim(x));
    return TensorLayout(subset, std::move(dims));
  }

  /// Union of two layouts; shared sites must agree on their local dimension.
  TensorLayout merged(const TensorLayout& other) const {
    SiteSet all = sites_.set_union(other.sites_);
    std::vector<int> dims;
    dims.reserve(all.size());
    for (const auto& x : all) {
      const bool here = sites_.contains(x);
      const bool there = other.sites_.contains(x);
      if (here && there && local_dim(x) != other.local_dim(x))
        throw DimensionError("layouts disagree on the local dimension at " + to_string(x));
      dims.push_back(here ? local_dim(x) : other.local_dim(x));
    }
    return TensorLayout(std::move(all), std::move(dims));
  }

  friend bool operator==(const TensorLayout& a, const TensorLayout& b) {
    return a.sites_ == b.sites_ && a.dims_ == b.dims_;
  }

private:
  SiteSet sites_;
  std::vector<int> dims_;
  std::vector<std::size_t> strides_;
  std::size_t dimension_ = 1;
};

/// Dense operator acting on the tensor factor of its support.
class LocalOperator {
public:
  LocalOperator() : LocalOperator(TensorLayout(), Matrix::Zero(1, 1)) {}

  LocalOperator(TensorLayout layout, Matrix matrix) : layout_(std::move(layout)), matrix_(std::move(matrix)) {
    const auto d = static_cast<Eigen::Index>(layout_.dimension());
    if (matrix_.rows() != d || matrix_.cols() != d)
      throw DimensionError("LocalOperator: matrix is " + std::to_string(matrix_.rows()) + "x" +
                           std::to_string(matrix_.cols()) + " but support " + to_string(layout_.sites()) +
                           " has dimension " + std::to_string(d));
    if (!matrix_.allFinite()) throw ValidationError("LocalOperator: non-finite matrix entries");
  }

  /// Single-site operator.
  LocalOperator(const Site& x, const Matrix& matrix)
      : LocalOperator(TensorLayout(SiteSet::from_sites(x.dimension(), {x}), {static_cast<int>(matrix.rows())}),
                      matrix) {}

  const SiteSet& support() const noexcept { return layout_.sites(); }
  const TensorLayout& layout() const noexcept { return layout_; }
  const Matrix& matrix() const noexcept { return matrix_; }
  std::size_t dimension() const noexcept { return layout_.dimension(); }

  bool is_hermitian(double tol = kHermitianTolerance) const {
    return ((matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() <= tol);
  }

  void require_hermitian(const std::string& what, double tol = kHermitianTolerance) const {
    if (!is_hermitian(tol))
      throw ValidationError(what + " on " + to_string(support()) + " is not Hermitian");
  }

  LocalOperator adjoint() const { return LocalOperator(layout_, matrix_.adjoint()); }
  LocalOperator scaled(Complex c) const { return LocalOperator(layout_, c * matrix_); }

private:
  TensorLayout layout_;
  Matrix matrix_;
};

namespace presets {

inline Matrix identity(int d) { return Matrix::Identity(d, d); }

inline Matrix pauli_x() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = m(1, 0) = 1.0;
  return m;
}

inline Matrix pauli_y() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = Complex(0, -1);
  m(1, 0) = Complex(0, 1);
  return m;
}

// |0> is spin up: sigma_z = diag(1, -1).
inline Matrix pauli_z() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return m;
}

/// sum_k |k><k+1|; on a qubit this is |up><down|.
inline Matrix raising(int d) {
  Matrix m = Matrix::Zero(d, d);
  for (int k = 0; k + 1 < d; ++k) m(k, k + 1) = 1.0;
  return m;
}

inline Matrix lowering(int d) { return raising(d).adjoint(); }

inline Matrix projector(int d, int k) {
  if (k < 0 || k >= d)
    throw ValidationError("projector: level " + std::to_string(k) + " outside [0, " + std::to_string(d) + ")");
  Matrix m = Matrix::Zero(d, d);
  m(k, k) = 1.0;
  return m;
}

/// Resolves pauli_x|pauli_y|pauli_z|raising|lowering|identity|projector_<k>.
inline Matrix by_name(const std::string& name, int d) {
  auto need_qubit = [&] {
    if (d != 2) throw ValidationError("preset '" + name + "' requires local dimension 2");
  };
  if (name == "pauli_x") return need_qubit(), pauli_x();
  if (name == "pauli_y") return need_qubit(), pauli_y();
  if (name == "pauli_z") return need_qubit(), pauli_z();
  if (name == "raising") return raising(d);
  if (name == "lowering") return lowering(d);
  if (name == "identity") return identity(d);
  const std::string prefix = "projector_";
  if (name.rfind(prefix, 0) == 0) {
    const std::string level = name.substr(prefix.size());
    if (level.empty() || level.find_first_not_of("0123456789") != std::string::npos)
      throw ValidationError("bad projector preset '" + name + "'");
    return projector(d, std::stoi(level));
  }
  throw ValidationError("unknown operator preset '" + name + "'");
}

} // namespace presets

namespace detail {

/// Index bookkeeping for applying a dense block on a subset of a layout's factors.
struct FactorPlacement {
  std::vector<std::size_t> offsets;       // full-space offset of every support sub-index
  std::vector<std::size_t> env_strides;   // strides of the non-support factors
  std::vector<int> env_dims;
  std::size_t env_count = 1;

  FactorPlacement(const TensorLayout& full, const SiteSet& support) {
    if (!support.is_subset_of(full.sites()))
      throw GeometryError("support " + to_string(support) + " is not contained in " + to_string(full.sites()));
    std::vector<std::size_t> pos;
    for (const auto& x : support) pos.push_back(full.sites().index_of(x));
    std::size_t sub_dim = 1;
    for (auto p : pos) sub_dim *= static_cast<std::size_t>(full.dims()[p]);
    offsets.assign(sub_dim, 0);
    for (std::size_t s = 0; s < sub_dim; ++s) {
      std::size_t rem = s, off = 0;
      for (std::size_t j = pos.size(); j-- > 0;) {
        const auto d = static_cast<std::size_t>(full.dims()[pos[j]]);
        off += (rem % d) * full.strides()[pos[j]];
        rem /= d;
      }
      offsets[s] = off;
    }
    std::size_t next = 0;
    for (std::size_t i = 0; i < full.size(); ++i) {
      if (next < pos.size() && pos[next] == i) {
        ++next;
        continue;
      }
      env_strides.push_back(full.strides()[i]);
      env_dims.push_back(full.dims()[i]);
      env_count *= static_cast<std::size_t>(full.dims()[i]);
    }
  }

  /// Calls f(base) for every assignment of the environment digits.
  template <class F>
  void for_each_base(F&& f) const {
    std::vector<int> digit(env_dims.size(), 0);
    std::size_t base = 0;
    for (std::size_t n = 0; n < env_count; ++n) {
      f(base);
      for (std::size_t j = env_dims.size(); j-- > 0;) {
        if (++digit[j] < env_dims[j]) {
          base += env_strides[j];
          break;
        }
        base -= static_cast<std::size_t>(env_dims[j] - 1) * env_strides[j];
        digit[j] = 0;
      }
    }
  }
};

} // namespace detail

/// Type-erased linear map on the Hilbert space of a layout, applied matrix-free.
class EmbeddedOperator {
public:
  struct Node {
    virtual ~Node() = default;
    /// out += alpha * Op(in)
    virtual void apply_add(const Vector& in, Vector& out, Complex alpha) const = 0;
  };

  EmbeddedOperator() = default;
  EmbeddedOperator(std::size_t dimension, std::shared_ptr<const Node> node)
      : dimension_(dimension), node_(std::move(node)) {}

  std::size_t dimension() const noexcept { return dimension_; }
  bool is_zero_map() const noexcept { return node_ == nullptr; }

  void apply_add(const Vector& in, Vector& out, Complex alpha = 1.0) const {
    check_size(in);
    check_size(out);
    if (node_) node_->apply_add(in, out, alpha);
  }

  Vector apply(const Vector& in) const {
    Vector out = Vector::Zero(static_cast<Eigen::Index>(dimension_));
    apply_add(in, out);
    return out;
  }

  /// Column-wise application.
  Matrix apply(const Matrix& in) const {
    Matrix out(in.rows(), in.cols());
    for (Eigen::Index c = 0; c < in.cols(); ++c) out.col(c) = apply(Vector(in.col(c)));
    return out;
  }

  /// Dense matrix by application to the canonical basis.
  Matrix to_dense(std::size_t cap = kDefaultDenseCap) const {
    if (dimension_ > cap)
      throw CapacityError("to_dense: dimension " + std::to_string(dimension_) + " exceeds the dense cap " +
                          std::to_string(cap));
    const auto n = static_cast<Eigen::Index>(dimension_);
    Matrix out(n, n);
    Vector e = Vector::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      e(j) = 1.0;
      out.col(j) = apply(e);
      e(j) = 0.0;
    }
    return out;
  }

private:
  void check_size(const Vector& v) const {
    if (static_cast<std::size_t>(v.size()) != dimension_)
      throw DimensionError("EmbeddedOperator: vector of size " + std::to_string(v.size()) +
                           " for an operator of dimension " + std::to_string(dimension_));
  }

  std::size_t dimension_ = 0;
  std::shared_ptr<const Node> node_;
};

namespace detail {

class EmbeddedTermNode final : public EmbeddedOperator::Node {
public:
  EmbeddedTermNode(const TensorLayout& full, const LocalOperator& op)
      : placement_(full, op.support()), block_(op.matrix()) {
    for (const auto& x : op.support())
      if (full.local_dim(x) != op.layout().local_dim(x))
        throw DimensionError("embed: local dimension mismatch at " + to_string(x));
  }

  void apply_add(const Vector& in, Vector& out, Complex alpha) const override {
    const auto& off = placement_.offsets;
    const std::size_t d = off.size();
    std::vector<Complex> gathered(d);
    placement_.for_each_base([&](std::size_t base) {
      for (std::size_t s = 0; s < d; ++s) gathered[s] = in[static_cast<Eigen::Index>(base + off[s])];
      for (std::size_t r = 0; r < d; ++r) {
        Complex acc = 0.0;
        for (std::size_t s = 0; s < d; ++s)
          acc += block_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) * gathered[s];
        out[static_cast<Eigen::Index>(base + off[r])] += alpha * acc;
      }
    });
  }

private:
  FactorPlacement placement_;
  Matrix block_;
};

class SumNode final : public EmbeddedOperator::Node {
public:
  SumNode(std::vector<EmbeddedOperator> terms, std::vector<Complex> coeffs)
      : terms_(std::move(terms)), coeffs_(std::move(coeffs)) {}

  void apply_add(const Vector& in, Vector& out, Complex alpha) const override {
    for (std::size_t i = 0; i < terms_.size(); ++i) terms_[i].apply_add(in, out, alpha * coeffs_[i]);
  }

private:
  std::vector<EmbeddedOperator> terms_;
  std::vector<Complex> coeffs_;
};

class ComposeNode final : public EmbeddedOperator::Node {
public:
  ComposeNode(EmbeddedOperator outer, EmbeddedOperator inner) : outer_(std::move(outer)), inner_(std::move(inner)) {}

  void apply_add(const Vector& in, Vector& out, Complex alpha) const override {
    outer_.apply_add(inner_.apply(in), out, alpha);
  }

private:
  EmbeddedOperator outer_;
  EmbeddedOperator inner_;
};

class RankOneNode final : public EmbeddedOperator::Node {
public:
  RankOneNode(Vector ket, Vector bra) : ket_(std::move(ket)), bra_(std::move(bra)) {}

  void apply_add(const Vector& in, Vector& out, Complex alpha) const override {
    out += (alpha * bra_.dot(in)) * ket_;
  }

private:
  Vector ket_;
  Vector bra_;
};

} // namespace detail

/// op (x) identity on the rest of the layout.
inline EmbeddedOperator embed(const LocalOperator& op, const TensorLayout& layout) {
  return EmbeddedOperator(layout.dimension(), std::make_shared<detail::EmbeddedTermNode>(layout, op));
}

inline EmbeddedOperator zero_operator(std::size_t dimension) { return EmbeddedOperator(dimension, nullptr); }

/// sum_i coeffs[i] * terms[i]; all terms must share one dimension.
inline EmbeddedOperator linear_combination(std::vector<EmbeddedOperator> terms, std::vector<Complex> coeffs) {
  if (terms.size() != coeffs.size()) throw DimensionError("linear_combination: coefficient count mismatch");
  if (terms.empty()) throw DimensionError("linear_combination: no terms");
  const std::size_t dim = terms.front().dimension();
  std::vector<EmbeddedOperator> kept;
  std::vector<Complex> kept_coeffs;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].dimension() != dim) throw DimensionError("linear_combination: mixed dimensions");
    if (terms[i].is_zero_map() || coeffs[i] == Complex(0.0)) continue;
    kept.push_back(std::move(terms[i]));
    kept_coeffs.push_back(coeffs[i]);
  }
  if (kept.empty()) return zero_operator(dim);
  return EmbeddedOperator(dim, std::make_shared<detail::SumNode>(std::move(kept), std::move(kept_coeffs)));
}

inline EmbeddedOperator operator+(const EmbeddedOperator& a, const EmbeddedOperator& b) {
  return linear_combination({a, b}, {1.0, 1.0});
}

inline EmbeddedOperator operator-(const EmbeddedOperator& a, const EmbeddedOperator& b) {
  return linear_combination({a, b}, {1.0, -1.0});
}

/// outer o inner.
inline EmbeddedOperator compose(const EmbeddedOperator& outer, const EmbeddedOperator& inner) {
  if (outer.dimension() != inner.dimension()) throw DimensionError("compose: dimension mismatch");
  if (outer.is_zero_map() || inner.is_zero_map()) return zero_operator(outer.dimension());
  return EmbeddedOperator(outer.dimension(), std::make_shared<detail::ComposeNode>(outer, inner));
}

/// |ket><bra|.
inline EmbeddedOperator rank_one(const Vector& ket, const Vector& bra) {
  if (ket.size() != bra.size()) throw DimensionError("rank_one: vector sizes differ");
  return EmbeddedOperator(static_cast<std::size_t>(ket.size()), std::make_shared<detail::RankOneNode>(ket, bra));
}

/// [K, A] = K A - A K as a composition of appliers.
inline EmbeddedOperator commutator_action(const EmbeddedOperator& k, const LocalOperator& a,
                                          const TensorLayout& layout) {
  if (k.dimension() != layout.dimension()) throw DimensionError("commutator_action: K does not act on the layout");
  const EmbeddedOperator ea = embed(a, layout);
  return compose(k, ea) - compose(ea, k);
}

/// Dense matrix of op (x) identity on a small layout.
inline Matrix embed_dense(const LocalOperator& op, const TensorLayout& layout, std::size_t cap = kDefaultDenseCap) {
  return embed(op, layout).to_dense(cap);
}

/// Tensor product of operators with disjoint supports, on the union support in canonical order.
inline LocalOperator tensor(const LocalOperator& a, const LocalOperator& b, std::size_t cap = kDefaultDenseCap) {
  if (a.support().intersects(b.support()))
    throw GeometryError("tensor: supports " + to_string(a.support()) + " and " + to_string(b.support()) +
                        " overlap");
  const TensorLayout joint = a.layout().merged(b.layout());
  Matrix m = embed_dense(a, joint, cap) * embed_dense(b, joint, cap);
  return LocalOperator(joint, std::move(m));
}

/// Re-expresses op on a larger support (padding with identities).
inline LocalOperator widen(const LocalOperator& op, const TensorLayout& support_layout,
                           std::size_t cap = kDefaultDenseCap) {
  return LocalOperator(support_layout, embed_dense(op, support_layout, cap));
}

/// Largest singular value, via a dense eigensolve of the support block.
inline double operator_norm(const LocalOperator& op, std::size_t cap = kDefaultDenseCap) {
  if (op.dimension() > cap)
    throw CapacityError("operator_norm: support dimension " + std::to_string(op.dimension()) + " exceeds cap");
  if (op.is_hermitian()) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(op.matrix(), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::JacobiSVD<Matrix> svd(op.matrix());
  return svd.singularValues()(0);
}

} // namespace lppl
