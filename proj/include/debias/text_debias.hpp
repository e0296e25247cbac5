#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "debias/bias_spec.hpp"
#include "debias/embedding.hpp"
#include "debias/errors.hpp"
#include "debias/kmeans.hpp"
#include "debias/linalg.hpp"

namespace debias {

// No pair of the definition could be resolved against the vocabulary.
struct UnresolvableDefinitionError : Error {
  using Error::Error;
};

// Raised when a sequential multi-bias pipeline aborts partway; carries the
// traces of the stages that completed.
template <class Trace>
struct PipelineErrorT;

template <class Scalar>
struct BiasDirectionT {
  BiasKind kind;
  UnitVectorT<Scalar> direction;
};

using BiasDirection = BiasDirectionT<double>;

struct DoubleHardParams {
  Eigen::Index k_candidates = 20;
  Eigen::Index n_per_pole = 500;
  std::uint64_t kmeans_seed = 42;
  int kmeans_restarts = 10;
  bool skip_equalize = false;
};

// Audit record of one Double-Hard run.
struct DebiasTrace {
  std::string kind;
  std::vector<double> candidate_accuracies;
  std::size_t selected_index = 0;
  std::vector<std::string> pool_positive;
  std::vector<std::string> pool_negative;
  std::uint64_t input_hash = 0;
  std::uint64_t frequency_removed_hash = 0;
  std::uint64_t output_hash = 0;
  DoubleHardParams params;
};

template <>
struct PipelineErrorT<DebiasTrace> : Error {
  PipelineErrorT(std::string failed, std::vector<DebiasTrace> done,
                 const std::string& cause)
      : Error("multi_debias: stage '" + failed + "' failed: " + cause),
        failed_kind(std::move(failed)),
        completed_traces(std::move(done)) {}
  std::string failed_kind;
  std::vector<DebiasTrace> completed_traces;
};

using PipelineError = PipelineErrorT<DebiasTrace>;

// ---------------------------------------------------------------------------
// Pair resolution

template <class Scalar>
struct ResolvedPairT {
  std::string left_phrase;
  std::string right_phrase;
  std::vector<Eigen::Index> left_members;
  std::vector<Eigen::Index> right_members;
  VectorX<Scalar> left_vec;   // raw phrase mean
  VectorX<Scalar> right_vec;  // raw phrase mean
};

template <class Scalar>
struct ResolvedDefinitionT {
  std::vector<ResolvedPairT<Scalar>> pairs;  // pairs with every member in vocab
  std::vector<Eigen::Index> mentioned_rows;  // any member token found, either side
  std::size_t skipped_pairs = 0;             // pairs dropped for missing members
};

namespace detail {

inline std::vector<std::string> phrase_members(std::string_view phrase) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= phrase.size()) {
    const std::size_t sp = phrase.find(' ', pos);
    const auto piece = phrase.substr(
        pos, sp == std::string_view::npos ? std::string_view::npos : sp - pos);
    if (!piece.empty()) out.emplace_back(piece);
    if (sp == std::string_view::npos) break;
    pos = sp + 1;
  }
  return out;
}

// Exact lookup first; uncased GloVe releases need the lowercase fallback
// for capitalized definition entries.
template <class Scalar>
std::optional<Eigen::Index> find_token(const EmbeddingSetT<Scalar>& set,
                                       const std::string& token) {
  if (auto idx = set.index_of(token)) return idx;
  const std::string lower = ascii_lower(token);
  if (lower != token)
    if (auto idx = set.index_of(lower)) return idx;
  return std::nullopt;
}

template <class Scalar>
std::optional<std::vector<Eigen::Index>> resolve_phrase(
    const EmbeddingSetT<Scalar>& set, const std::string& phrase,
    std::vector<Eigen::Index>& mentioned) {
  std::vector<Eigen::Index> members;
  bool complete = true;
  for (const auto& tok : phrase_members(phrase)) {
    if (auto idx = find_token(set, tok)) {
      members.push_back(*idx);
      mentioned.push_back(*idx);
    } else {
      complete = false;
    }
  }
  if (!complete || members.empty()) return std::nullopt;
  return members;
}

template <class Scalar>
VectorX<Scalar> member_mean(const EmbeddingSetT<Scalar>& set,
                            const std::vector<Eigen::Index>& members) {
  VectorX<Scalar> sum = VectorX<Scalar>::Zero(set.dim());
  for (Eigen::Index i : members) sum += set.row(i).transpose();
  return sum / Scalar(members.size());
}

}  // namespace detail

// Resolves a definition's phrases against a vocabulary. Pairs with any
// missing member token are skipped (robustness across embedding releases);
// every member token that does exist is still treated as bias-defining.
template <class Scalar>
ResolvedDefinitionT<Scalar> resolve_pairs(const EmbeddingSetT<Scalar>& set,
                                          const BiasDefinition& def) {
  ResolvedDefinitionT<Scalar> out;
  for (const auto& p : def.pairs()) {
    auto left = detail::resolve_phrase(set, p.left, out.mentioned_rows);
    auto right = detail::resolve_phrase(set, p.right, out.mentioned_rows);
    if (!left || !right) {
      ++out.skipped_pairs;
      continue;
    }
    ResolvedPairT<Scalar> rp;
    rp.left_phrase = p.left;
    rp.right_phrase = p.right;
    rp.left_members = std::move(*left);
    rp.right_members = std::move(*right);
    rp.left_vec = detail::member_mean(set, rp.left_members);
    rp.right_vec = detail::member_mean(set, rp.right_members);
    out.pairs.push_back(std::move(rp));
  }
  std::sort(out.mentioned_rows.begin(), out.mentioned_rows.end());
  out.mentioned_rows.erase(
      std::unique(out.mentioned_rows.begin(), out.mentioned_rows.end()),
      out.mentioned_rows.end());
  return out;
}

namespace detail {

// Stacks the pair-mean-centered pair vectors: rows (a - mu) and (b - mu)
// for each pair, mu the pair mean. The bias direction is the top principal
// component of these rows.
template <class Scalar>
RowMatrix<Scalar> pair_centered_matrix(const ResolvedDefinitionT<Scalar>& resolved,
                                       Eigen::Index dim) {
  RowMatrix<Scalar> stacked(2 * static_cast<Eigen::Index>(resolved.pairs.size()), dim);
  Eigen::Index r = 0;
  for (const auto& p : resolved.pairs) {
    const VectorX<Scalar> mu = (p.left_vec + p.right_vec) / Scalar(2);
    stacked.row(r++) = (p.left_vec - mu).transpose();
    stacked.row(r++) = (p.right_vec - mu).transpose();
  }
  return stacked;
}

}  // namespace detail

namespace detail {

template <class Scalar>
UnitVectorT<Scalar> direction_from_resolved(const ResolvedDefinitionT<Scalar>& resolved,
                                            Eigen::Index dim, const std::string& kind) {
  if (resolved.pairs.empty())
    throw UnresolvableDefinitionError("bias direction (" + kind +
                                      "): no pair could be resolved");
  const auto stacked = pair_centered_matrix(resolved, dim);
  UnitVectorT<Scalar> u =
      std::move(principal_components(stacked, 1, /*center=*/false).front());
  if (resolved.pairs.front().left_vec.dot(u.vec()) < Scalar(0)) u = u.negated();
  return u;
}

}  // namespace detail

// Unit bias axis inferred from the definition's characterizing pairs,
// oriented so the first resolvable pair's left phrase points along it.
template <class Scalar>
BiasDirectionT<Scalar> bias_direction(const EmbeddingSetT<Scalar>& set,
                                      const BiasDefinition& def) {
  const auto resolved = resolve_pairs(set, def);
  return BiasDirectionT<Scalar>{
      def.kind(),
      detail::direction_from_resolved(resolved, set.dim(), def.kind().name())};
}

namespace detail {

// Equalize step of Hard Debias, applied to L2-normalized side vectors.
//
// Definitions expand slash alternatives into several pairs that can share
// a side (e.g. four kin terms each paired with "parent"), so sides are
// equalized jointly per connected family of pairs: every side in a family
// receives the family's common off-direction component and an on-direction
// component of equal magnitude whose sign preserves which side of the
// family mean it was on. For an isolated pair this reduces exactly to the
// classic two-element equalize.
//
// Multi-word sides are written back by moving each member token so the
// phrase mean lands exactly on the equalized target.
template <class Scalar>
void equalize_pairs(RowMatrix<Scalar>& m, const ResolvedDefinitionT<Scalar>& resolved,
                    const UnitVectorT<Scalar>& u) {
  struct Side {
    std::string phrase;
    const std::vector<Eigen::Index>* members;
  };
  std::vector<Side> sides;
  std::vector<std::pair<std::size_t, std::size_t>> pair_sides;
  auto side_index = [&](const std::string& phrase,
                        const std::vector<Eigen::Index>& members) {
    for (std::size_t i = 0; i < sides.size(); ++i)
      if (sides[i].phrase == phrase) return i;
    sides.push_back(Side{phrase, &members});
    return sides.size() - 1;
  };
  for (const auto& p : resolved.pairs)
    pair_sides.emplace_back(side_index(p.left_phrase, p.left_members),
                            side_index(p.right_phrase, p.right_members));

  // Union-find over sides.
  std::vector<std::size_t> parent(sides.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [a, b] : pair_sides) parent[find(a)] = find(b);

  std::vector<std::vector<std::size_t>> families(sides.size());
  for (std::size_t i = 0; i < sides.size(); ++i) families[find(i)].push_back(i);

  const auto& axis = u.vec();
  for (const auto& family : families) {
    if (family.size() < 2) continue;

    // Normalized side means, read before any write.
    std::vector<VectorX<Scalar>> unit_means;
    std::vector<Scalar> raw_norms;
    bool usable = true;
    for (std::size_t s : family) {
      VectorX<Scalar> mean = VectorX<Scalar>::Zero(m.cols());
      for (Eigen::Index row : *sides[s].members) mean += m.row(row).transpose();
      mean /= Scalar(sides[s].members->size());
      const Scalar norm = mean.norm();
      if (!(norm > Scalar(0))) {
        usable = false;
        break;
      }
      raw_norms.push_back(norm);
      unit_means.push_back(mean / norm);
    }
    if (!usable) continue;

    VectorX<Scalar> mu = VectorX<Scalar>::Zero(m.cols());
    for (const auto& um : unit_means) mu += um;
    mu /= Scalar(unit_means.size());
    const Scalar mu_on = mu.dot(axis);
    const VectorX<Scalar> nu = mu - mu_on * axis;
    const Scalar s_on = std::sqrt(std::max(Scalar(0), Scalar(1) - nu.squaredNorm()));

    std::vector<VectorX<Scalar>> snapshots;
    for (std::size_t k = 0; k < family.size(); ++k) {
      const Scalar on = unit_means[k].dot(axis) - mu_on;
      const Scalar sign = on > Scalar(0) ? Scalar(1) : (on < Scalar(0) ? Scalar(-1) : Scalar(0));
      VectorX<Scalar> target = nu + sign * s_on * axis;
      const VectorX<Scalar> delta = target - unit_means[k];
      for (Eigen::Index row : *sides[family[k]].members)
        snapshots.push_back(m.row(row).transpose() / raw_norms[k] + delta);
    }
    std::size_t cursor = 0;
    for (std::size_t k = 0; k < family.size(); ++k)
      for (Eigen::Index row : *sides[family[k]].members)
        m.row(row) = snapshots[cursor++].transpose();
  }
}

template <class Scalar>
EmbeddingSetT<Scalar> hard_debias_with_direction(
    const EmbeddingSetT<Scalar>& set, const ResolvedDefinitionT<Scalar>& resolved,
    const UnitVectorT<Scalar>& u, bool skip_equalize) {
  RowMatrix<Scalar> m = set.matrix();

  // Neutralize: drop the bias component of every non-defining token.
  VectorX<Scalar> coeffs = m * u.vec();
  for (Eigen::Index row : resolved.mentioned_rows) coeffs[row] = Scalar(0);
  m.noalias() -= coeffs * u.vec().transpose();

  if (!skip_equalize) equalize_pairs(m, resolved, u);
  return set.with_matrix(std::move(m));
}

}  // namespace detail

// Hard Debias: project every non-defining token into the subspace
// orthogonal to the inferred bias direction, then (by default) equalize
// the defining pairs on L2-normalized vectors so their off-direction
// components coincide and their on-direction components are opposite.
template <class Scalar>
EmbeddingSetT<Scalar> hard_debias(const EmbeddingSetT<Scalar>& set,
                                  const BiasDefinition& def,
                                  bool skip_equalize = false) {
  const auto resolved = resolve_pairs(set, def);
  const auto u =
      detail::direction_from_resolved(resolved, set.dim(), def.kind().name());
  return detail::hard_debias_with_direction(set, resolved, u, skip_equalize);
}

template <class Scalar>
struct PolePoolsT {
  std::vector<Eigen::Index> positive;
  std::vector<Eigen::Index> negative;
};

// Row indices of the n_per_pole most positively and most negatively
// aligned tokens (cosine to the direction), ties by vocabulary order.
// The pools are disjoint.
template <class Scalar>
PolePoolsT<Scalar> pole_indices(const EmbeddingSetT<Scalar>& set,
                                const UnitVectorT<Scalar>& dir,
                                Eigen::Index n_per_pole) {
  const Eigen::Index n = set.size();
  if (n_per_pole < 1) throw ConfigError("top_biased: n_per_pole must be positive");
  if (2 * n_per_pole > n)
    throw ConfigError("top_biased: 2*n_per_pole exceeds vocabulary size");
  if (set.dim() != dir.dim()) throw DimensionError("top_biased: dimension mismatch");

  VectorX<Scalar> scores = set.matrix() * dir.vec();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar norm = set.row(i).norm();
    scores[i] = norm > Scalar(0) ? scores[i] / norm : Scalar(0);
  }

  std::vector<Eigen::Index> desc(static_cast<std::size_t>(n));
  std::iota(desc.begin(), desc.end(), Eigen::Index(0));
  std::vector<Eigen::Index> asc = desc;
  std::stable_sort(desc.begin(), desc.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return scores[a] > scores[b]; });
  std::stable_sort(asc.begin(), asc.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return scores[a] < scores[b]; });

  PolePoolsT<Scalar> pools;
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < n_per_pole; ++i) {
    pools.positive.push_back(desc[static_cast<std::size_t>(i)]);
    taken[static_cast<std::size_t>(desc[static_cast<std::size_t>(i)])] = 1;
  }
  for (Eigen::Index idx : asc) {
    if (static_cast<Eigen::Index>(pools.negative.size()) == n_per_pole) break;
    if (!taken[static_cast<std::size_t>(idx)]) pools.negative.push_back(idx);
  }
  return pools;
}

// Token-level view of pole_indices.
template <class Scalar>
std::pair<std::vector<std::string>, std::vector<std::string>> top_biased(
    const EmbeddingSetT<Scalar>& set, const BiasDirectionT<Scalar>& dir,
    Eigen::Index n_per_pole) {
  const auto pools = pole_indices(set, dir.direction, n_per_pole);
  std::pair<std::vector<std::string>, std::vector<std::string>> out;
  for (Eigen::Index i : pools.positive) out.first.push_back(set.token(i));
  for (Eigen::Index i : pools.negative) out.second.push_back(set.token(i));
  return out;
}

// Candidate frequency directions: top-k principal components of the
// mean-centered vocabulary.
template <class Scalar>
std::vector<UnitVectorT<Scalar>> candidate_directions(const EmbeddingSetT<Scalar>& set,
                                                      Eigen::Index k_candidates) {
  return principal_components(set.matrix(), k_candidates, /*center=*/true);
}

template <class Scalar>
struct DoubleHardResultT {
  EmbeddingSetT<Scalar> set;
  DebiasTrace trace;
};

using DoubleHardResult = DoubleHardResultT<double>;

// Double-Hard Debias for one bias kind:
//   (a) pools of the top biased tokens per pole,
//   (b) candidate frequency directions from vocabulary PCA,
//   (c)-(e) for each candidate: remove it from pool copies, hard-debias
//       them, cluster into two groups, record alignment accuracy,
// then remove the candidate whose removal clusters worst (argmin, earliest
// index on ties) from the whole vocabulary and hard-debias the result.
template <class Scalar>
DoubleHardResultT<Scalar> double_hard_debias(const EmbeddingSetT<Scalar>& set,
                                             const BiasDefinition& def,
                                             const DoubleHardParams& params) {
  if (params.k_candidates < 1 || params.n_per_pole < 1 || params.kmeans_restarts < 1)
    throw ConfigError("double_hard_debias: counts must be positive");

  DebiasTrace trace;
  trace.kind = def.kind().name();
  trace.params = params;
  trace.input_hash = snapshot_hash(set);

  const auto dir = bias_direction(set, def);
  const auto pools = pole_indices(set, dir.direction, params.n_per_pole);
  const auto candidates = candidate_directions(set, params.k_candidates);

  for (Eigen::Index i : pools.positive) trace.pool_positive.push_back(set.token(i));
  for (Eigen::Index i : pools.negative) trace.pool_negative.push_back(set.token(i));

  const Eigen::Index pool_n = 2 * params.n_per_pole;
  RowMatrix<Scalar> pool0(pool_n, set.dim());
  std::vector<int> truth(static_cast<std::size_t>(pool_n));
  for (Eigen::Index i = 0; i < params.n_per_pole; ++i) {
    pool0.row(i) = set.row(pools.positive[static_cast<std::size_t>(i)]);
    truth[static_cast<std::size_t>(i)] = 0;
    pool0.row(params.n_per_pole + i) = set.row(pools.negative[static_cast<std::size_t>(i)]);
    truth[static_cast<std::size_t>(params.n_per_pole + i)] = 1;
  }

  KMeansParams km;
  km.seed = params.kmeans_seed;
  km.restarts = params.kmeans_restarts;

  for (const auto& candidate : candidates) {
    RowMatrix<Scalar> pool = pool0;
    remove_component(pool, candidate);
    // Hard Debias step on the intermediate-space pool copies: subtract the
    // bias projection along the direction computed in step (a).
    remove_component(pool, dir.direction);

    std::vector<int> labels;
    try {
      labels = kmeans2(pool, km);
    } catch (const DegenerateInputError& e) {
      throw DegenerateInputError(std::string("double_hard_debias: degenerate pool: ") +
                                 e.what());
    }
    trace.candidate_accuracies.push_back(alignment_accuracy(labels, truth));
  }

  const auto min_it = std::min_element(trace.candidate_accuracies.begin(),
                                       trace.candidate_accuracies.end());
  trace.selected_index = static_cast<std::size_t>(
      std::distance(trace.candidate_accuracies.begin(), min_it));

  RowMatrix<Scalar> working = set.matrix();
  remove_component(working, candidates[trace.selected_index]);
  EmbeddingSetT<Scalar> frequency_removed = set.with_matrix(std::move(working));
  trace.frequency_removed_hash = snapshot_hash(frequency_removed);

  EmbeddingSetT<Scalar> out =
      hard_debias(frequency_removed, def, params.skip_equalize);
  trace.output_hash = snapshot_hash(out);
  return {std::move(out), std::move(trace)};
}

template <class Scalar>
struct MultiDebiasResultT {
  EmbeddingSetT<Scalar> set;
  std::vector<DebiasTrace> traces;
};

using MultiDebiasResult = MultiDebiasResultT<double>;

// Sequential multi-bias pipeline: the debiased output of one kind is the
// input of the next. Each stage recomputes its pools and candidates from
// its own input.
template <class Scalar>
MultiDebiasResultT<Scalar> multi_debias(const EmbeddingSetT<Scalar>& set,
                                        const std::vector<BiasDefinition>& defs,
                                        const DoubleHardParams& params) {
  if (defs.empty()) throw ConfigError("multi_debias: no definitions");
  for (std::size_t i = 0; i < defs.size(); ++i)
    for (std::size_t j = i + 1; j < defs.size(); ++j)
      if (defs[i].kind() == defs[j].kind())
        throw ConfigError("multi_debias: duplicate bias kind '" +
                          defs[i].kind().name() + "'");

  std::vector<DebiasTrace> traces;
  traces.reserve(defs.size());
  std::optional<EmbeddingSetT<Scalar>> current(set);
  for (const auto& def : defs) {
    try {
      auto stage = double_hard_debias(*current, def, params);
      current.emplace(std::move(stage.set));
      traces.push_back(std::move(stage.trace));
    } catch (const Error& e) {
      throw PipelineError(def.kind().name(), std::move(traces), e.what());
    }
  }
  return {std::move(*current), std::move(traces)};
}

}  // namespace debias
