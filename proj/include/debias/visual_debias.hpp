#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <utility>
#include <vector>

#include "debias/embedding.hpp"
#include "debias/errors.hpp"
#include "debias/linalg.hpp"

namespace debias {

// Pre-defined image groups V_1..V_m characterizing one visual bias
// (typically pairs, e.g. one male and one female representation each).
template <class Scalar>
struct PairGroupsT {
  std::vector<RowMatrix<Scalar>> groups;
};

using PairGroups = PairGroupsT<double>;

// The four demographic groups used by Projection Debias.
template <class Scalar>
struct QuadGroupsT {
  RowMatrix<Scalar> female;
  RowMatrix<Scalar> male;
  RowMatrix<Scalar> young;
  RowMatrix<Scalar> old;
};

using QuadGroups = QuadGroupsT<double>;

template <class Scalar>
struct VisualBiasModelT {
  UnitVectorT<Scalar> hard_direction;
  std::array<UnitVectorT<Scalar>, 4> quad_axes;  // female, male, young, old
};

using VisualBiasModel = VisualBiasModelT<double>;

// Visual bias direction: top eigenvector of the group-mean-centered
// scatter VC = sum_i sum_{v in V_i} (v - u_i)(v - u_i)^T / |V_i|,
// u_i the mean of group V_i.
template <class Scalar>
UnitVectorT<Scalar> visual_bias_direction(const PairGroupsT<Scalar>& pairs) {
  if (pairs.groups.empty())
    throw ConfigError("visual_bias_direction: no groups");
  const Eigen::Index d = pairs.groups.front().cols();

  SquareMatrix<Scalar> scatter = SquareMatrix<Scalar>::Zero(d, d);
  Scalar raw_sq = 0;
  for (const auto& group : pairs.groups) {
    if (group.rows() < 1) throw ConfigError("visual_bias_direction: empty group");
    if (group.cols() != d)
      throw DimensionError("visual_bias_direction: group dimension mismatch");
    RowMatrix<Scalar> centered = group;
    centered.rowwise() -= group.colwise().mean();
    scatter.noalias() += centered.transpose() * centered / Scalar(group.rows());
    raw_sq += group.squaredNorm();
  }
  if (detail::is_degenerate_scatter(scatter.trace(), std::max(raw_sq, Scalar(1))))
    throw DegenerateInputError(
        "visual_bias_direction: zero scatter (every group is constant)");
  return std::move(top_eigenvectors(scatter, 1).front());
}

// v~ = v - (VB^T v) VB for every image representation.
template <class Scalar>
EmbeddingSetT<Scalar> visual_hard_debias(const EmbeddingSetT<Scalar>& vectors,
                                         const UnitVectorT<Scalar>& direction) {
  if (vectors.dim() != direction.dim())
    throw DimensionError("visual_hard_debias: dimension mismatch");
  RowMatrix<Scalar> m = vectors.matrix();
  remove_component(m, direction);
  return vectors.with_matrix(std::move(m));
}

// First principal component of each demographic group, in the order
// female, male, young, old.
template <class Scalar>
std::array<UnitVectorT<Scalar>, 4> quad_axes(const QuadGroupsT<Scalar>& quads) {
  auto axis = [](const RowMatrix<Scalar>& group, const char* label) {
    try {
      return std::move(principal_components(group, 1, /*center=*/true).front());
    } catch (const Error& e) {
      throw DegenerateInputError("projection_debias: group '" + std::string(label) +
                                 "' is degenerate: " + e.what());
    }
  };
  return {axis(quads.female, "female"), axis(quads.male, "male"),
          axis(quads.young, "young"), axis(quads.old, "old")};
}

// v^ = v - sum_{i=1..4} u_i (u_i . v), with the four projections
// subtracted as written: the axes are not orthogonalized, so correlated
// axes over-subtract (duplicate axes flip the shared component's sign).
template <class Scalar>
EmbeddingSetT<Scalar> projection_debias_with_axes(
    const EmbeddingSetT<Scalar>& vectors,
    const std::array<UnitVectorT<Scalar>, 4>& axes) {
  RowMatrix<Scalar> m = vectors.matrix();
  const RowMatrix<Scalar> original = m;
  for (const auto& axis : axes) {
    if (axis.dim() != vectors.dim())
      throw DimensionError("projection_debias: axis dimension mismatch");
    m.noalias() -= (original * axis.vec()) * axis.vec().transpose();
  }
  return vectors.with_matrix(std::move(m));
}

template <class Scalar>
EmbeddingSetT<Scalar> projection_debias(const EmbeddingSetT<Scalar>& vectors,
                                        const QuadGroupsT<Scalar>& quads) {
  return projection_debias_with_axes(vectors, quad_axes(quads));
}

template <class Scalar>
VisualBiasModelT<Scalar> fit_visual_bias_model(const PairGroupsT<Scalar>& pairs,
                                               const QuadGroupsT<Scalar>& quads) {
  return VisualBiasModelT<Scalar>{visual_bias_direction(pairs), quad_axes(quads)};
}

}  // namespace debias
