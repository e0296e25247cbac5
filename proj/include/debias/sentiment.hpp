#pragma once

#include <Eigen/Dense>
#include <charconv>
#include <cmath>
#include <istream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "debias/bias_spec.hpp"
#include "debias/errors.hpp"
#include "debias/linalg.hpp"

namespace debias {

// Valence ("positive-negative") scores from the NRC-VAD lexicon.
// Lookups are case-folded to lowercase; out-of-vocabulary tokens score the
// neutral default 0.5.
class ValenceLexicon {
 public:
  static constexpr double default_valence = 0.5;

  void insert(const std::string& token, double valence) {
    if (!(valence >= 0.0 && valence <= 1.0))
      throw ConfigError("ValenceLexicon: valence out of [0,1]");
    entries_[detail::ascii_lower(token)] = valence;
  }

  double valence(std::string_view token) const {
    auto it = entries_.find(detail::ascii_lower(token));
    return it == entries_.end() ? default_valence : it->second;
  }

  bool contains(std::string_view token) const {
    return entries_.count(detail::ascii_lower(token)) > 0;
  }

  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, double> entries_;
};

// Parses the published NRC-VAD TSV: a header line, then
// `Word<TAB>Valence<TAB>Arousal<TAB>Dominance`. Only the valence column is
// used; extra columns are ignored. Valences outside [0,1] are rejected.
inline ValenceLexicon load_vad(std::istream& source) {
  ValenceLexicon lex;
  std::string line;
  std::size_t line_no = 0;
  bool header_skipped = false;
  while (std::getline(source, line)) {
    ++line_no;
    detail::strip_cr_inplace(line);
    if (!header_skipped) {
      header_skipped = true;
      continue;
    }
    if (line.empty()) continue;

    const auto fields = detail::split(line, '\t');
    if (fields.size() < 2 || fields[0].empty())
      throw ParseError("expected `Word<TAB>Valence...`", line_no);
    double v = 0.0;
    const char* first = fields[1].data();
    const char* last = first + fields[1].size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
      throw ParseError("malformed valence '" + fields[1] + "'", line_no);
    if (!(v >= 0.0 && v <= 1.0))
      throw ParseError("valence " + fields[1] + " outside [0,1]", line_no);
    lex.insert(fields[0], v);
  }
  return lex;
}

// [V(t_1), ..., V(t_n)] with 0.5 for tokens missing from the lexicon.
inline std::vector<double> valence_sequence(const std::vector<std::string>& tokens,
                                            const ValenceLexicon& lex) {
  std::vector<double> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(lex.valence(t));
  return out;
}

template <class Scalar>
struct GateParamsT {
  VectorX<Scalar> weights;  // W_g, one weight per hidden unit
  Scalar bias = 0;          // b_g
};

using GateParams = GateParamsT<double>;

// g = sigmoid(W_g . h + b_g). Computed with the numerically stable split
// form; saturates to the nearest representable value at extreme inputs.
template <class Scalar>
Scalar sentiment_gate(const VectorX<Scalar>& hidden, const GateParamsT<Scalar>& params) {
  if (hidden.size() != params.weights.size())
    throw DimensionError("sentiment_gate: hidden size does not match weights");
  if (!hidden.allFinite() || !params.weights.allFinite() || !std::isfinite(params.bias))
    throw ConfigError("sentiment_gate: non-finite input");
  const Scalar z = params.weights.dot(hidden) + params.bias;
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

// T = g t + (1-g) S t: blends the token vector with its valence-scaled
// copy under the gate.
template <class Scalar>
VectorX<Scalar> sentiment_enrich(const VectorX<Scalar>& token_vec, Scalar valence,
                                 Scalar gate) {
  if (!(gate >= Scalar(0) && gate <= Scalar(1)))
    throw ConfigError("sentiment_enrich: gate outside [0,1]");
  if (!(valence >= Scalar(0) && valence <= Scalar(1)))
    throw ConfigError("sentiment_enrich: valence outside [0,1]");
  return (gate + (Scalar(1) - gate) * valence) * token_vec;
}

}  // namespace debias
