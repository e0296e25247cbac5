#pragma once

// Independent brute-force oracles used to freeze expected values. None of
// these call into the library's computation paths: the eigensolver is a
// hand-rolled cyclic Jacobi iteration, PCA forms covariance matrices
// explicitly, and the k-means oracle enumerates every 2-partition.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace oracle {

struct EigenPairs {
  std::vector<double> values;            // descending
  std::vector<Eigen::VectorXd> vectors;  // matching order, unit norm
};

// Cyclic Jacobi eigendecomposition of a symmetric matrix.
inline EigenPairs jacobi_eigen(Eigen::MatrixXd a) {
  const Eigen::Index d = a.rows();
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(d, d);

  auto off_diag_sq = [&]() {
    double s = 0.0;
    for (Eigen::Index p = 0; p < d; ++p)
      for (Eigen::Index q = p + 1; q < d; ++q) s += a(p, q) * a(p, q);
    return s;
  };

  const double scale = std::max(a.norm(), 1e-300);
  for (int sweep = 0; sweep < 200 && off_diag_sq() > 1e-28 * scale * scale; ++sweep) {
    for (Eigen::Index p = 0; p < d; ++p) {
      for (Eigen::Index q = p + 1; q < d; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (Eigen::Index k = 0; k < d; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < d; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < d; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return a(x, x) > a(y, y); });

  EigenPairs out;
  for (Eigen::Index i : order) {
    out.values.push_back(a(i, i));
    out.vectors.push_back(v.col(i).normalized());
  }
  return out;
}

// PCA via explicitly formed scatter + Jacobi. Rows of `points` are samples.
inline std::vector<Eigen::VectorXd> pca(const Eigen::MatrixXd& points, int k,
                                        bool center) {
  Eigen::MatrixXd x = points;
  if (center) x.rowwise() -= x.colwise().mean();
  const Eigen::MatrixXd scatter = x.transpose() * x;
  auto pairs = jacobi_eigen(scatter);
  return std::vector<Eigen::VectorXd>(pairs.vectors.begin(), pairs.vectors.begin() + k);
}

// Equalize step of Hard Debias for one isolated pair, straight from the
// published formula, on L2-normalized inputs:
//   nu = mu - (mu.u)u,  w' = nu + sqrt(1-|nu|^2) * (w_B - mu_B)/|w_B - mu_B|
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> equalize_pair(
    const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& u) {
  const Eigen::VectorXd na = a / a.norm();
  const Eigen::VectorXd nb = b / b.norm();
  const Eigen::VectorXd mu = 0.5 * (na + nb);
  const Eigen::VectorXd nu = mu - mu.dot(u) * u;
  const double s = std::sqrt(std::max(0.0, 1.0 - nu.squaredNorm()));
  const double a_on = na.dot(u) - mu.dot(u);
  const double b_on = nb.dot(u) - mu.dot(u);
  auto dir = [&](double on) { return on > 0 ? 1.0 : (on < 0 ? -1.0 : 0.0); };
  return {nu + s * dir(a_on) * u, nu + s * dir(b_on) * u};
}

// Minimum within-cluster sum of squares over every Lloyd fixed point
// reachable from any nonempty 2-partition of <= ~16 points.
inline double best_two_cluster_wcss(const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  const Eigen::Index d = points.cols();
  double best = std::numeric_limits<double>::infinity();

  std::vector<int> labels(static_cast<std::size_t>(n));
  for (std::uint64_t mask = 1; mask + 1 < (std::uint64_t(1) << n); ++mask) {
    for (Eigen::Index i = 0; i < n; ++i)
      labels[static_cast<std::size_t>(i)] = (mask >> i) & 1u;

    // Lloyd to a fixed point from this partition's centroids.
    for (int iter = 0; iter < 100; ++iter) {
      Eigen::VectorXd c0 = Eigen::VectorXd::Zero(d), c1 = Eigen::VectorXd::Zero(d);
      int n0 = 0, n1 = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (labels[static_cast<std::size_t>(i)] == 0) {
          c0 += points.row(i);
          ++n0;
        } else {
          c1 += points.row(i);
          ++n1;
        }
      }
      if (n0 == 0 || n1 == 0) break;
      c0 /= n0;
      c1 /= n1;
      bool changed = false;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double d0 = (points.row(i).transpose() - c0).squaredNorm();
        const double d1 = (points.row(i).transpose() - c1).squaredNorm();
        const int l = d1 < d0 ? 1 : 0;
        if (l != labels[static_cast<std::size_t>(i)]) {
          labels[static_cast<std::size_t>(i)] = l;
          changed = true;
        }
      }
      if (!changed) break;
    }

    Eigen::VectorXd c0 = Eigen::VectorXd::Zero(d), c1 = Eigen::VectorXd::Zero(d);
    int n0 = 0, n1 = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (labels[static_cast<std::size_t>(i)] == 0) {
        c0 += points.row(i);
        ++n0;
      } else {
        c1 += points.row(i);
        ++n1;
      }
    }
    if (n0 == 0 || n1 == 0) continue;
    c0 /= n0;
    c1 /= n1;
    double wcss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      wcss += labels[static_cast<std::size_t>(i)] == 0
                  ? (points.row(i).transpose() - c0).squaredNorm()
                  : (points.row(i).transpose() - c1).squaredNorm();
    best = std::min(best, wcss);
  }
  return best;
}

}  // namespace oracle
