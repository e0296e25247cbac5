#pragma once

#include <Eigen/Dense>
#include <charconv>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "debias/digest.hpp"
#include "debias/errors.hpp"
#include "debias/linalg.hpp"

namespace debias {

// An ordered vocabulary (words or image IDs) with one vector per token.
// Immutable after construction; operations that "modify" a set build a
// fresh one. Vectors are stored exactly as loaded, never normalized.
template <class Scalar>
class EmbeddingSetT {
 public:
  using Matrix = RowMatrix<Scalar>;
  using Vector = VectorX<Scalar>;

  EmbeddingSetT(std::vector<std::string> tokens, Matrix matrix)
      : tokens_(std::move(tokens)), matrix_(std::move(matrix)) {
    if (tokens_.empty()) throw ConfigError("EmbeddingSet: no tokens");
    if (static_cast<Eigen::Index>(tokens_.size()) != matrix_.rows())
      throw DimensionError("EmbeddingSet: token count does not match matrix rows");
    if (matrix_.cols() < 1) throw DimensionError("EmbeddingSet: dimension must be >= 1");
    if (!matrix_.allFinite())
      throw ConfigError("EmbeddingSet: matrix contains non-finite entries");
    index_.reserve(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (!index_.emplace(tokens_[i], static_cast<Eigen::Index>(i)).second)
        throw ConfigError("EmbeddingSet: duplicate token '" + tokens_[i] + "'");
    }
  }

  Eigen::Index size() const { return matrix_.rows(); }
  Eigen::Index dim() const { return matrix_.cols(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const Matrix& matrix() const { return matrix_; }

  const std::string& token(Eigen::Index i) const {
    return tokens_[static_cast<std::size_t>(i)];
  }

  auto row(Eigen::Index i) const { return matrix_.row(i); }

  std::optional<Eigen::Index> index_of(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? std::nullopt : std::optional<Eigen::Index>(it->second);
  }

  bool contains(std::string_view token) const { return index_of(token).has_value(); }

  Vector vector_of(std::string_view token) const {
    auto idx = index_of(token);
    if (!idx) throw LookupError("unknown token '" + std::string(token) + "'",
                                std::string(token));
    return matrix_.row(*idx);
  }

  // Same vocabulary, new values.
  EmbeddingSetT with_matrix(Matrix m) const { return EmbeddingSetT(tokens_, std::move(m)); }

 private:
  std::vector<std::string> tokens_;
  Matrix matrix_;
  std::unordered_map<std::string, Eigen::Index> index_;
};

using EmbeddingSet = EmbeddingSetT<double>;

template <class Scalar>
struct LoadedEmbeddingsT {
  EmbeddingSetT<Scalar> set;
  std::size_t duplicates_ignored = 0;
};

using LoadedEmbeddings = LoadedEmbeddingsT<double>;

namespace detail {

template <class Scalar>
Scalar parse_value(std::string_view field, std::size_t line_no) {
  Scalar value{};
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw ParseError("malformed float '" + std::string(field) + "'", line_no);
  if (!std::isfinite(value))
    throw ParseError("non-finite value '" + std::string(field) + "'", line_no);
  return value;
}

inline std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace detail

// Reads the whitespace-delimited text format used by pre-trained GloVe
// files and by exported visual feature files: one record per line,
// `token SP v1 SP ... SP vd`. Tokens therefore cannot contain spaces.
// Duplicate tokens keep the first occurrence and are counted, not fatal.
template <class Scalar = double>
LoadedEmbeddingsT<Scalar> load_embeddings(
    std::istream& source, std::optional<Eigen::Index> expected_dim = std::nullopt) {
  if (expected_dim && *expected_dim < 1)
    throw ConfigError("load_embeddings: expected_dim must be positive");

  std::vector<std::string> tokens;
  std::vector<Scalar> values;
  std::unordered_map<std::string, bool> seen;
  std::size_t duplicates = 0;
  Eigen::Index dim = expected_dim.value_or(0);

  std::string raw;
  std::size_t line_no = 0;
  std::vector<Scalar> row;
  while (std::getline(source, raw)) {
    ++line_no;
    std::string_view line = detail::strip_cr(raw);
    if (line.empty()) continue;

    const std::size_t token_end = line.find(' ');
    if (token_end == std::string_view::npos || token_end == 0)
      throw ParseError("expected `token SP v1 ...`", line_no);
    std::string token(line.substr(0, token_end));

    row.clear();
    std::string_view rest = line.substr(token_end + 1);
    while (!rest.empty()) {
      const std::size_t sp = rest.find(' ');
      const std::string_view field =
          sp == std::string_view::npos ? rest : rest.substr(0, sp);
      row.push_back(detail::parse_value<Scalar>(field, line_no));
      if (sp == std::string_view::npos) break;
      rest = rest.substr(sp + 1);
    }

    if (dim == 0) {
      if (row.empty()) throw ParseError("record has no values", line_no);
      dim = static_cast<Eigen::Index>(row.size());
    } else if (static_cast<Eigen::Index>(row.size()) != dim) {
      throw DimensionError("line " + std::to_string(line_no) + ": expected " +
                           std::to_string(dim) + " values, got " +
                           std::to_string(row.size()));
    }

    if (!seen.emplace(token, true).second) {
      ++duplicates;
      continue;
    }
    tokens.push_back(std::move(token));
    values.insert(values.end(), row.begin(), row.end());
  }

  if (tokens.empty()) throw EmptyInputError("load_embeddings: no records in input");

  typename EmbeddingSetT<Scalar>::Matrix m(static_cast<Eigen::Index>(tokens.size()), dim);
  std::copy(values.begin(), values.end(), m.data());
  return {EmbeddingSetT<Scalar>(std::move(tokens), std::move(m)), duplicates};
}

// Writes the same text format back, fixed-point with `precision` fractional
// digits, LF line endings. load(save(set)) preserves token order exactly and
// values to within 10^(1-precision) per coordinate.
template <class Scalar>
void save_embeddings(const EmbeddingSetT<Scalar>& set, std::ostream& sink,
                     int precision = 6) {
  if (precision < 1 || precision > 30)
    throw ConfigError("save_embeddings: precision must be in [1, 30]");
  char buf[64];
  for (Eigen::Index i = 0; i < set.size(); ++i) {
    sink << set.token(i);
    for (Eigen::Index j = 0; j < set.dim(); ++j) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), set.matrix()(i, j),
                                     std::chars_format::fixed, precision);
      if (ec != std::errc()) throw Error("save_embeddings: value formatting failed");
      sink << ' ' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
    }
    sink << '\n';
    if (!sink) throw Error("save_embeddings: write failure");
  }
  sink.flush();
  if (!sink) throw Error("save_embeddings: write failure");
}

// Mean of the member-token vectors of a space-separated phrase.
// Table-style bias definitions contain multi-word entries, which resolve
// through this rather than through multi-word tokens.
template <class Scalar>
VectorX<Scalar> phrase_vector(const EmbeddingSetT<Scalar>& set, std::string_view phrase) {
  VectorX<Scalar> sum = VectorX<Scalar>::Zero(set.dim());
  Eigen::Index count = 0;
  std::size_t pos = 0;
  while (pos <= phrase.size()) {
    const std::size_t sp = phrase.find(' ', pos);
    const std::string_view piece = phrase.substr(
        pos, sp == std::string_view::npos ? std::string_view::npos : sp - pos);
    if (!piece.empty()) {
      sum += set.vector_of(piece);
      ++count;
    }
    if (sp == std::string_view::npos) break;
    pos = sp + 1;
  }
  if (count == 0) throw ConfigError("phrase_vector: empty phrase");
  return sum / Scalar(count);
}

// Audit hash over vocabulary and exact vector bits.
template <class Scalar>
std::uint64_t snapshot_hash(const EmbeddingSetT<Scalar>& set) {
  Fnv1a64 h;
  h.update(static_cast<std::uint64_t>(set.size()));
  h.update(static_cast<std::uint64_t>(set.dim()));
  for (Eigen::Index i = 0; i < set.size(); ++i) {
    h.update(set.token(i));
    h.update(std::string_view("\0", 1));
    for (Eigen::Index j = 0; j < set.dim(); ++j)
      h.update(static_cast<double>(set.matrix()(i, j)));
  }
  return h.digest();
}

}  // namespace debias
