#pragma once

// Synthetic corpora with planted bias structure, shared by the unit and
// acceptance suites.
//
// The planted-confound corpus mimics the frequency-twist phenomenon: a
// strong pole-aligned bias axis (e1), plus a confound axis (e3) that is
// pole-aligned among the top-biased tokens while carrying no net e1/e3
// correlation over the whole vocabulary, so the vocabulary PCA keeps one
// candidate cleanly aligned with the confound. Removing that candidate and
// hard-debiasing wipes the pools down to noise; removing any other
// candidate leaves the confound separability intact.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "debias/bias_spec.hpp"
#include "debias/embedding.hpp"
#include "test_support.hpp"

namespace testsup {

struct PlantedCorpus {
  debias::EmbeddingSet set;
  debias::BiasDefinition def;
  Eigen::Index bias_axis = 0;      // e1
  Eigen::Index confound_axis = 2;  // e3
};

// 2,000 tokens in d=20: per pole 3 definition tokens (exactly on the bias
// axis), 497 "strong" tokens (high cosine, pole-aligned confound) and 500
// "weak" tokens (lower cosine, confound scaled to cancel the global e1/e3
// covariance). Noise sigma=0.05 on the remaining axes.
inline PlantedCorpus make_planted_corpus(std::uint64_t seed) {
  const Eigen::Index d = 20;
  const Eigen::Index n_strong = 497;
  const Eigen::Index n_weak = 500;
  const double e1_strong = 1.2;
  const double e1_weak = 0.8;
  const double conf_strong = 0.4;
  // exact cancellation: n_strong*e1_strong*conf_strong == n_weak*e1_weak*conf_weak
  const double conf_weak =
      n_strong * e1_strong * conf_strong / (n_weak * e1_weak);
  const double noise = 0.05;

  Rng rng(seed);
  std::vector<std::string> tokens;
  std::vector<Eigen::VectorXd> rows;

  auto noisy = [&](Eigen::VectorXd base) {
    for (Eigen::Index a = 0; a < d; ++a)
      if (a != 0 && a != 2) base[a] += noise * rng.normal();
    return base;
  };

  std::vector<debias::BiasPair> pairs;
  for (int pole : {+1, -1}) {
    const std::string tag = pole > 0 ? "p" : "n";
    for (int k = 0; k < 3; ++k) {
      // definition tokens: exactly +-e1 plus a tiny pair-specific marker on
      // e2 so the pair means differ while the centered pair diffs stay on e1
      Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
      v[0] = pole;
      v[1] = 0.01 * (k + 1);
      tokens.push_back(tag + "def" + std::to_string(k));
      rows.push_back(v);
    }
    for (Eigen::Index k = 0; k < n_strong; ++k) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
      v[0] = pole * e1_strong;
      v[2] = pole * conf_strong;
      tokens.push_back(tag + "s" + std::to_string(k));
      rows.push_back(noisy(std::move(v)));
    }
    for (Eigen::Index k = 0; k < n_weak; ++k) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
      v[0] = pole * e1_weak;
      v[2] = -pole * conf_weak;
      tokens.push_back(tag + "w" + std::to_string(k));
      rows.push_back(noisy(std::move(v)));
    }
  }
  for (int k = 0; k < 3; ++k)
    pairs.push_back(debias::BiasPair{"pdef" + std::to_string(k),
                                     "ndef" + std::to_string(k)});

  debias::RowMatrix<double> m(static_cast<Eigen::Index>(rows.size()), d);
  for (std::size_t i = 0; i < rows.size(); ++i)
    m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();

  return PlantedCorpus{
      debias::EmbeddingSet(std::move(tokens), std::move(m)),
      debias::BiasDefinition(debias::BiasKind("synth-bias"), std::move(pairs)), 0, 2};
}

// A small vocabulary holding every member token of the five shipped
// definitions plus random filler, for end-to-end pipeline runs.
inline debias::EmbeddingSet make_vocab_with_definition_tokens(
    std::uint64_t seed, Eigen::Index total, Eigen::Index d,
    const std::vector<debias::BiasDefinition>& defs) {
  Rng rng(seed);
  std::vector<std::string> tokens;
  std::set<std::string> seen;
  auto add_phrase = [&](const std::string& phrase) {
    std::string cur;
    for (char c : phrase + " ") {
      if (c == ' ') {
        if (!cur.empty() && seen.insert(cur).second) tokens.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
  };
  for (const auto& def : defs)
    for (const auto& p : def.pairs()) {
      add_phrase(p.left);
      add_phrase(p.right);
    }
  for (Eigen::Index i = 0; tokens.size() < static_cast<std::size_t>(total); ++i) {
    const std::string t = "filler" + std::to_string(i);
    if (seen.insert(t).second) tokens.push_back(t);
  }
  debias::RowMatrix<double> m(total, d);
  for (Eigen::Index i = 0; i < total; ++i)
    m.row(i) = rng.normal_vector(d).transpose();
  return debias::EmbeddingSet(std::move(tokens), std::move(m));
}

struct VisualCorpus {
  debias::EmbeddingSet vectors;      // evaluation set (image IDs)
  debias::RowMatrix<double> female;  // quad groups, spread along e1..e4
  debias::RowMatrix<double> male;
  debias::RowMatrix<double> young;
  debias::RowMatrix<double> old;
  debias::BiasDefinition gender_def;  // image-ID pairs along the gender axis
  debias::BiasDefinition age_def;
  Eigen::VectorXd gender_axis;  // (e1 - e2)/sqrt(2)
  Eigen::VectorXd age_axis;     // (e3 - e4)/sqrt(2)
};

// d=16 visual stand-in: quad groups whose first principal components are
// e1..e4, and an evaluation set biased along (e1-e2) for gender and
// (e3-e4) for age. Projection debias removes every e1..e4 component, so
// both planted signals vanish.
inline VisualCorpus make_visual_corpus(std::uint64_t seed) {
  const Eigen::Index d = 16;
  const Eigen::Index group_size = 40;
  const Eigen::Index n_eval_per_pole = 150;
  Rng rng(seed);

  auto group_along = [&](Eigen::Index axis, double offset_axis_value) {
    debias::RowMatrix<double> g(group_size, d);
    for (Eigen::Index i = 0; i < group_size; ++i) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
      v[axis] = offset_axis_value + 0.5 * (2.0 * double(i) / double(group_size - 1) - 1.0);
      for (Eigen::Index a = 0; a < d; ++a)
        if (a != axis) v[a] += 0.02 * rng.normal();
      g.row(i) = v.transpose();
    }
    return g;
  };

  VisualCorpus out{
      debias::EmbeddingSet({"placeholder"}, debias::RowMatrix<double>::Ones(1, 1)),
      group_along(0, 1.0),
      group_along(1, 1.0),
      group_along(2, -1.0),
      group_along(3, -1.0),
      debias::BiasDefinition(debias::BiasKind("visual-gender"),
                             {{"gf0", "gm0"}, {"gf1", "gm1"}, {"gf2", "gm2"}}),
      debias::BiasDefinition(debias::BiasKind("visual-age"),
                             {{"ay0", "ao0"}, {"ay1", "ao1"}, {"ay2", "ao2"}}),
      Eigen::VectorXd::Zero(d),
      Eigen::VectorXd::Zero(d)};
  out.gender_axis[0] = 1.0 / std::sqrt(2.0);
  out.gender_axis[1] = -1.0 / std::sqrt(2.0);
  out.age_axis[2] = 1.0 / std::sqrt(2.0);
  out.age_axis[3] = -1.0 / std::sqrt(2.0);

  std::vector<std::string> ids;
  std::vector<Eigen::VectorXd> rows;
  for (int k = 0; k < 3; ++k) {
    // definition IDs planted exactly on the poles of each bias axis
    auto plant = [&](const std::string& id, const Eigen::VectorXd& axis, double s) {
      Eigen::VectorXd v = s * axis;
      v[5] = 0.01 * (k + 1);  // marker so IDs are distinct vectors
      ids.push_back(id);
      rows.push_back(v);
    };
    plant("gf" + std::to_string(k), out.gender_axis, 1.0);
    plant("gm" + std::to_string(k), out.gender_axis, -1.0);
    plant("ay" + std::to_string(k), out.age_axis, 1.0);
    plant("ao" + std::to_string(k), out.age_axis, -1.0);
  }
  for (int gp : {+1, -1}) {
    for (int ap : {+1, -1}) {
      for (Eigen::Index i = 0; i < n_eval_per_pole / 2; ++i) {
        Eigen::VectorXd v =
            0.8 * gp * out.gender_axis + 0.8 * ap * out.age_axis;
        for (Eigen::Index a = 0; a < d; ++a) v[a] += 0.05 * rng.normal();
        ids.push_back("img_" + std::string(gp > 0 ? "f" : "m") +
                      std::string(ap > 0 ? "y" : "o") + "_" + std::to_string(i));
        rows.push_back(v);
      }
    }
  }

  debias::RowMatrix<double> m(static_cast<Eigen::Index>(rows.size()), d);
  for (std::size_t i = 0; i < rows.size(); ++i)
    m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  out.vectors = debias::EmbeddingSet(std::move(ids), std::move(m));
  return out;
}

}  // namespace testsup
