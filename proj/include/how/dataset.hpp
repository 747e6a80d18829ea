#pragma once

#include <string>
#include <vector>

#include "how/corpus.hpp"
#include "how/textprep.hpp"

namespace how {

// Model-ready view of one partition: encoded headlines plus labeled,
// delta-featured pairs indexing into them.
struct PairDataset {
  std::vector<std::string> ids;
  std::vector<EncodedHeadline> encodings;
  std::vector<int> y_mid;

  struct Pair {
    int a = 0;
    int b = 0;
    double delta = 1.0;  // 1 / (1 + delta_days)
    int y_coref = 0;
  };
  std::vector<Pair> pairs;
  long truncated = 0;  // headlines that lost in-vocabulary tokens to padding
};

PairDataset build_pair_dataset(const std::vector<Headline>& headlines,
                               const std::vector<PairExample>& edges,
                               const EmbeddingTable& table, int pad_length);

}  // namespace how
