#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <type_traits>
#include <utility>
#include <vector>

#include "debias/errors.hpp"

namespace debias {

template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Vector sets are stored one row per item.
template <class Scalar>
using RowMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class Scalar>
using SquareMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// A direction in embedding space. Construction enforces unit L2 norm.
template <class Scalar>
class UnitVectorT {
 public:
  static constexpr Scalar norm_tolerance() {
    return std::is_same_v<Scalar, float> ? Scalar(1e-5) : Scalar(1e-9);
  }

  explicit UnitVectorT(VectorX<Scalar> v) : v_(std::move(v)) {
    if (v_.size() == 0) throw ConfigError("UnitVector: empty vector");
    if (std::abs(v_.norm() - Scalar(1)) > norm_tolerance())
      throw ConfigError("UnitVector: vector is not unit length");
  }

  // Normalizes an arbitrary nonzero vector.
  template <class Derived>
  static UnitVectorT normalized(const Eigen::MatrixBase<Derived>& v) {
    VectorX<Scalar> dense = v;
    const Scalar n = dense.norm();
    if (!(n > Scalar(0)))
      throw DegenerateInputError("UnitVector: cannot normalize a zero vector");
    dense /= n;
    return UnitVectorT(std::move(dense));
  }

  const VectorX<Scalar>& vec() const { return v_; }
  Eigen::Index dim() const { return v_.size(); }
  UnitVectorT negated() const { return UnitVectorT(-v_); }

 private:
  VectorX<Scalar> v_;
};

using UnitVector = UnitVectorT<double>;

// Flips the sign so the largest-magnitude component is positive
// (first such component on magnitude ties). PCA signs are arbitrary;
// canonicalizing keeps downstream argmin selections and reports stable.
template <class Scalar>
void canonicalize_sign(VectorX<Scalar>& v) {
  Eigen::Index arg = 0;
  Scalar best = std::abs(v[0]);
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    const Scalar m = std::abs(v[i]);
    if (m > best) {
      best = m;
      arg = i;
    }
  }
  if (v[arg] < Scalar(0)) v = -v;
}

// Top-k eigenvectors of a symmetric scatter matrix, by descending
// eigenvalue, stable on ties, signs canonicalized.
template <class Scalar>
std::vector<UnitVectorT<Scalar>> top_eigenvectors(
    const SquareMatrix<Scalar>& scatter, Eigen::Index k) {
  const Eigen::Index d = scatter.rows();
  if (scatter.cols() != d) throw DimensionError("top_eigenvectors: scatter must be square");
  if (k < 1 || k > d) throw ConfigError("top_eigenvectors: k out of range");

  Eigen::SelfAdjointEigenSolver<SquareMatrix<Scalar>> solver(scatter);
  if (solver.info() != Eigen::Success)
    throw DegenerateInputError("top_eigenvectors: eigendecomposition did not converge");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index(0));
  const auto& values = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return values[a] > values[b];
  });

  std::vector<UnitVectorT<Scalar>> components;
  components.reserve(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) {
    VectorX<Scalar> v = solver.eigenvectors().col(order[static_cast<std::size_t>(i)]);
    canonicalize_sign(v);
    components.push_back(UnitVectorT<Scalar>(std::move(v)));
  }
  return components;
}

namespace detail {

// Degenerate iff the centered data carries no variation beyond rounding
// noise of the raw data (or is exactly zero).
template <class Scalar>
bool is_degenerate_scatter(Scalar scatter_trace, Scalar raw_squared_norm) {
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  return !(scatter_trace > eps * raw_squared_norm);
}

}  // namespace detail

// Top-k principal components of a point set (rows are points).
// The scatter is formed explicitly and decomposed with a deterministic
// symmetric eigensolver so repeated runs select identical components.
template <class Derived>
std::vector<UnitVectorT<typename Derived::Scalar>> principal_components(
    const Eigen::MatrixBase<Derived>& points, Eigen::Index k, bool center) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = points.rows();
  const Eigen::Index d = points.cols();
  if (n < 2) throw ConfigError("principal_components: need at least 2 vectors");
  if (k < 1 || k > std::min(n, d))
    throw ConfigError("principal_components: require 1 <= k <= min(n, d)");

  RowMatrix<Scalar> x = points;
  const Scalar raw_sq = x.squaredNorm();
  if (center) x.rowwise() -= x.colwise().mean().eval();

  SquareMatrix<Scalar> scatter = x.transpose() * x;
  if (detail::is_degenerate_scatter(scatter.trace(), std::max(raw_sq, Scalar(1))))
    throw DegenerateInputError(
        "principal_components: zero scatter (all points identical after centering)");
  return top_eigenvectors(scatter, k);
}

// w' = w - (u^T w) u. The result is orthogonal to u.
template <class Derived, class Scalar>
VectorX<Scalar> project_out(const Eigen::MatrixBase<Derived>& v,
                            const UnitVectorT<Scalar>& u) {
  if (v.size() != u.dim()) throw DimensionError("project_out: dimension mismatch");
  VectorX<Scalar> out = v;
  out.noalias() -= u.vec() * (u.vec().dot(out));
  return out;
}

// In-place rank-1 removal of u from every row of m.
template <class Scalar>
void remove_component(RowMatrix<Scalar>& m, const UnitVectorT<Scalar>& u) {
  if (m.cols() != u.dim()) throw DimensionError("remove_component: dimension mismatch");
  m.noalias() -= (m * u.vec()) * u.vec().transpose();
}

template <class DerivedA, class DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& v,
                                 const Eigen::MatrixBase<DerivedB>& w) {
  using Scalar = typename DerivedA::Scalar;
  if (v.size() != w.size()) throw DimensionError("cosine: dimension mismatch");
  const Scalar nv = v.norm();
  const Scalar nw = w.norm();
  if (nv == Scalar(0) || nw == Scalar(0))
    throw DegenerateInputError("cosine: zero-norm input");
  const Scalar c = v.dot(w) / (nv * nw);
  return std::clamp(c, Scalar(-1), Scalar(1));
}

}  // namespace debias
