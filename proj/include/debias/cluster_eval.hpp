#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "debias/bias_spec.hpp"
#include "debias/embedding.hpp"
#include "debias/errors.hpp"
#include "debias/kmeans.hpp"
#include "debias/linalg.hpp"
#include "debias/text_debias.hpp"

namespace debias {

struct ClusterEvalConfig {
  std::vector<Eigen::Index> tops{100, 500, 1000};
  std::uint64_t seed = 42;
  int restarts = 10;
  int max_iters = 300;
  double tol = 1e-4;

  static ClusterEvalConfig text_defaults() { return {}; }
  static ClusterEvalConfig visual_defaults() {
    ClusterEvalConfig cfg;
    cfg.tops = {100, 300, 500};
    return cfg;
  }
};

struct ClusterReportRow {
  Eigen::Index n = 0;
  double accuracy_before = 0.0;
  double accuracy_after = 0.0;
};

// Before/after alignment accuracies per top-N for one bias kind.
struct ClusterReport {
  std::string kind;
  std::vector<ClusterReportRow> rows;  // sorted by n
};

// The paper's evaluation protocol: select the top-N biased tokens by
// cosine to the bias direction of the `before` set (N/2 per pole; pole
// membership is the ground truth), cluster their vectors into two groups
// in each set, and report alignment accuracies. Lower `after` accuracy
// means fewer bias cues survive.
template <class Scalar>
ClusterReport cluster_eval(const EmbeddingSetT<Scalar>& before,
                           const EmbeddingSetT<Scalar>& after,
                           const BiasDefinition& def,
                           const ClusterEvalConfig& cfg) {
  if (cfg.tops.empty()) throw ConfigError("cluster_eval: no top-N values");
  if (cfg.restarts < 1 || cfg.max_iters < 1)
    throw ConfigError("cluster_eval: counts must be positive");
  for (Eigen::Index n : cfg.tops) {
    if (n < 2 || n % 2 != 0)
      throw ConfigError("cluster_eval: top-N values must be even and >= 2");
    if (n > before.size())
      throw ConfigError("cluster_eval: top-N " + std::to_string(n) +
                        " exceeds vocabulary size");
  }

  const auto dir = bias_direction(before, def);

  std::vector<Eigen::Index> tops = cfg.tops;
  std::sort(tops.begin(), tops.end());

  KMeansParams km;
  km.seed = cfg.seed;
  km.restarts = cfg.restarts;
  km.max_iters = cfg.max_iters;
  km.tol = cfg.tol;

  ClusterReport report;
  report.kind = def.kind().name();
  for (Eigen::Index n : tops) {
    const auto pools = pole_indices(before, dir.direction, n / 2);

    RowMatrix<Scalar> mat_before(n, before.dim());
    RowMatrix<Scalar> mat_after(n, after.dim());
    std::vector<int> truth(static_cast<std::size_t>(n));
    Eigen::Index r = 0;
    for (int pole = 0; pole < 2; ++pole) {
      const auto& pool = pole == 0 ? pools.positive : pools.negative;
      for (Eigen::Index idx : pool) {
        mat_before.row(r) = before.row(idx);
        mat_after.row(r) = after.vector_of(before.token(idx)).transpose();
        truth[static_cast<std::size_t>(r)] = pole;
        ++r;
      }
    }

    ClusterReportRow row;
    row.n = n;
    row.accuracy_before = alignment_accuracy(kmeans2(mat_before, km), truth);
    row.accuracy_after = alignment_accuracy(kmeans2(mat_after, km), truth);
    report.rows.push_back(row);
  }
  return report;
}

// Deterministic 2D export: projections onto the top two principal
// components of the centered inputs (the toolkit's substitute for
// stochastic tSNE plots; rendering is external).
template <class Derived>
RowMatrix<typename Derived::Scalar> project_2d(const Eigen::MatrixBase<Derived>& points) {
  using Scalar = typename Derived::Scalar;
  if (points.rows() < 3) throw ConfigError("project_2d: need at least 3 vectors");
  const auto components = principal_components(points, 2, /*center=*/true);

  RowMatrix<Scalar> centered = points;
  centered.rowwise() -= centered.colwise().mean().eval();
  RowMatrix<Scalar> coords(points.rows(), 2);
  coords.col(0) = centered * components[0].vec();
  coords.col(1) = centered * components[1].vec();
  return coords;
}

template <class Scalar>
struct Projection2DT {
  std::vector<std::string> ids;
  RowMatrix<Scalar> coords;  // |ids| x 2
};

using Projection2D = Projection2DT<double>;

template <class Scalar>
Projection2DT<Scalar> project_2d_set(const EmbeddingSetT<Scalar>& set) {
  return Projection2DT<Scalar>{set.tokens(), project_2d(set.matrix())};
}

}  // namespace debias
