#include "how/dataset.hpp"

#include <stdexcept>
#include <unordered_map>

namespace how {

PairDataset build_pair_dataset(const std::vector<Headline>& headlines,
                               const std::vector<PairExample>& edges,
                               const EmbeddingTable& table, int pad_length) {
  PairDataset ds;
  ds.ids.reserve(headlines.size());
  ds.encodings.reserve(headlines.size());
  std::unordered_map<std::string, int> index;
  for (const Headline& h : headlines) {
    if (!index.emplace(h.id, int(ds.ids.size())).second) {
      throw std::runtime_error("duplicate headline id '" + h.id + "'");
    }
    ds.ids.push_back(h.id);
    ds.encodings.push_back(encode(h.text, table, pad_length));
    if (ds.encodings.back().truncated) ++ds.truncated;
    ds.y_mid.push_back(h.label == Label::Mid ? 1 : 0);
  }
  ds.pairs.reserve(edges.size());
  for (const PairExample& e : edges) {
    auto ia = index.find(e.id_a);
    auto ib = index.find(e.id_b);
    if (ia == index.end() || ib == index.end()) {
      throw std::runtime_error("edge references unknown headline id '" +
                               (ia == index.end() ? e.id_a : e.id_b) + "'");
    }
    PairDataset::Pair p;
    p.a = ia->second;
    p.b = ib->second;
    p.delta = 1.0 / (1.0 + double(e.delta_days));
    p.y_coref = e.coref ? 1 : 0;
    ds.pairs.push_back(p);
  }
  return ds;
}

}  // namespace how
