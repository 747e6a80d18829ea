#pragma once

#include <Eigen/Core>
#include <istream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "how/dates.hpp"

namespace how {

// Strips punctuation, lowercases, and collapses whitespace runs to single
// spaces. The punctuation set is ASCII punctuation and symbols plus the
// Latin-1 and General Punctuation blocks (quotes, dashes, ellipses, ...).
// Idempotent: normalize(normalize(x)) == normalize(x).
std::string normalize(std::string_view text);

// Splits normalized text on single spaces; never yields empty tokens.
std::vector<std::string> tokenize(std::string_view text);

// Token -> dense vector map, insertion-ordered so a loaded table can be
// dumped back byte-identically.
struct EmbeddingTable {
  int dimension = 0;
  std::vector<std::string> tokens;
  std::vector<Eigen::VectorXd> vectors;
  std::unordered_map<std::string, int> index;

  // Inserts or overwrites (last wins). Token must be non-empty, free of
  // whitespace, and the vector must match `dimension`.
  void add(std::string token, Eigen::VectorXd vec);
  const Eigen::VectorXd* find(std::string_view token) const;
  std::size_t size() const { return tokens.size(); }
};

// Text vector format: optional "<count> <dim>" first line, then one line
// per token: token followed by `dim` space-separated reals. Dimension is
// inferred from the first data row and enforced afterwards. Duplicate
// tokens keep the last vector; a note is pushed to `warnings` if given.
EmbeddingTable load_embedding_table(std::istream& in,
                                    std::vector<std::string>* warnings = nullptr);

// Serializes a table in the same text format (no header line). Values are
// written in shortest round-trip form, so load(dump(t)) == t exactly.
std::string dump_embedding_table(const EmbeddingTable& table);

struct EncodedHeadline {
  Eigen::MatrixXd matrix;  // pad_length x dimension; rows >= n_tokens are zero
  int n_tokens = 0;        // embedded (in-vocabulary) tokens, <= pad_length
  bool truncated = false;  // in-vocabulary tokens beyond pad_length were cut
};

// Normalizes, tokenizes, drops out-of-vocabulary tokens, then stacks the
// remaining vectors into a zero-padded pad_length x dimension matrix.
EncodedHeadline encode(std::string_view text, const EmbeddingTable& table,
                       int pad_length);

// 1 / (1 + |days between a and b|), in (0, 1].
double delta_date_feature(const Date& a, const Date& b);

// Number of Unicode scalar values in a UTF-8 string (malformed bytes count
// as one each).
long count_codepoints(std::string_view text);

}  // namespace how
