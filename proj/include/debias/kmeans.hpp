#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "debias/errors.hpp"
#include "debias/linalg.hpp"

namespace debias {

struct KMeansParams {
  std::uint64_t seed = 42;
  int restarts = 10;
  int max_iters = 300;
  double tol = 1e-4;
};

namespace detail {

// std::uniform_* distributions are implementation-defined, so draws are
// derived from raw mt19937_64 output to keep results identical across
// standard libraries.
class DeterministicRng {
 public:
  explicit DeterministicRng(std::uint64_t seed) : engine_(seed) {}

  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace detail

// Two-cluster Lloyd's algorithm with k-means++ seeding. Restart r is
// seeded with seed+r; the labeling with the lowest within-cluster sum of
// squares wins, earliest restart on ties. Fully deterministic given
// (points, params).
template <class Derived>
std::vector<int> kmeans2(const Eigen::MatrixBase<Derived>& points_in,
                         const KMeansParams& params) {
  using Scalar = typename Derived::Scalar;
  const RowMatrix<Scalar> points = points_in;
  const Eigen::Index n = points.rows();
  const Eigen::Index d = points.cols();
  if (n < 2) throw ConfigError("kmeans2: need at least 2 vectors");
  if (params.restarts < 1 || params.max_iters < 1)
    throw ConfigError("kmeans2: restarts and max_iters must be positive");

  bool any_distinct = false;
  for (Eigen::Index i = 1; i < n && !any_distinct; ++i)
    any_distinct = points.row(i) != points.row(0);
  if (!any_distinct)
    throw DegenerateInputError("kmeans2: all vectors identical");

  using Vector = VectorX<Scalar>;
  std::vector<int> best_labels;
  double best_wcss = std::numeric_limits<double>::infinity();

  std::vector<int> labels(static_cast<std::size_t>(n));
  std::vector<double> dist0(static_cast<std::size_t>(n));
  for (int r = 0; r < params.restarts; ++r) {
    detail::DeterministicRng rng(params.seed + static_cast<std::uint64_t>(r));

    // k-means++: first center uniform, second proportional to squared
    // distance from the first.
    const Eigen::Index c0 = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sq = static_cast<double>((points.row(i) - points.row(c0)).squaredNorm());
      dist0[static_cast<std::size_t>(i)] = sq;
      total += sq;
    }
    Eigen::Index c1 = -1;
    if (total > 0.0) {
      const double target = rng.uniform01() * total;
      double cum = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        cum += dist0[static_cast<std::size_t>(i)];
        if (cum > target) {
          c1 = i;
          break;
        }
      }
    }
    if (c1 < 0) {
      // Rounding pushed the draw past the last positive weight; fall back
      // to the farthest point, earliest index on ties.
      double far_sq = -1.0;
      for (Eigen::Index i = 0; i < n; ++i)
        if (dist0[static_cast<std::size_t>(i)] > far_sq) {
          far_sq = dist0[static_cast<std::size_t>(i)];
          c1 = i;
        }
    }

    Vector centroid0 = points.row(c0);
    Vector centroid1 = points.row(c1);

    std::fill(labels.begin(), labels.end(), -1);
    for (int iter = 0; iter < params.max_iters; ++iter) {
      bool changed = false;
      Vector sum0 = Vector::Zero(d), sum1 = Vector::Zero(d);
      Eigen::Index n0 = 0, n1 = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double d0 = static_cast<double>((points.row(i).transpose() - centroid0).squaredNorm());
        const double d1 = static_cast<double>((points.row(i).transpose() - centroid1).squaredNorm());
        const int label = d1 < d0 ? 1 : 0;
        if (labels[static_cast<std::size_t>(i)] != label) {
          changed = true;
          labels[static_cast<std::size_t>(i)] = label;
        }
        if (label == 0) {
          sum0 += points.row(i);
          ++n0;
        } else {
          sum1 += points.row(i);
          ++n1;
        }
      }

      // An emptied cluster restarts at the point farthest from the other
      // centroid (earliest index on ties).
      if (n0 == 0 || n1 == 0) {
        const Vector& full = n0 == 0 ? centroid1 : centroid0;
        Eigen::Index far_i = 0;
        double far_sq = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double sq = static_cast<double>((points.row(i).transpose() - full).squaredNorm());
          if (sq > far_sq) {
            far_sq = sq;
            far_i = i;
          }
        }
        if (n0 == 0) {
          centroid0 = points.row(far_i);
        } else {
          centroid1 = points.row(far_i);
        }
        continue;
      }

      Vector next0 = sum0 / static_cast<Scalar>(n0);
      Vector next1 = sum1 / static_cast<Scalar>(n1);
      const double shift = std::max(static_cast<double>((next0 - centroid0).norm()),
                                    static_cast<double>((next1 - centroid1).norm()));
      centroid0.swap(next0);
      centroid1.swap(next1);
      if (!changed || shift <= params.tol) break;
    }

    // Final assignment against the converged centroids.
    double wcss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d0 = static_cast<double>((points.row(i).transpose() - centroid0).squaredNorm());
      const double d1 = static_cast<double>((points.row(i).transpose() - centroid1).squaredNorm());
      labels[static_cast<std::size_t>(i)] = d1 < d0 ? 1 : 0;
      wcss += std::min(d0, d1);
    }
    if (wcss < best_wcss) {
      best_wcss = wcss;
      best_labels = labels;
    }
  }

  return best_labels;
}

// max(acc, 1-acc): two-cluster labels are only meaningful up to a swap.
inline double alignment_accuracy(const std::vector<int>& labels,
                                 const std::vector<int>& truth) {
  if (labels.size() != truth.size() || labels.empty())
    throw DimensionError("alignment_accuracy: label/truth length mismatch");
  std::size_t match = 0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if ((labels[i] != 0) == (truth[i] != 0)) ++match;
  const double acc = static_cast<double>(match) / static_cast<double>(labels.size());
  return std::max(acc, 1.0 - acc);
}

}  // namespace debias
