#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "how/corpus.hpp"
#include "how/metrics.hpp"

namespace how {

// Predicted coreference graph. Nodes are sorted by id; edges are canonical
// (a < b), deduplicated, sorted, and never self-loops.
struct CorefGraph {
  struct Node {
    std::string id;
    Label label = Label::News;
  };
  struct Edge {
    std::string a;
    std::string b;
    double p_coref = 0.0;
  };
  std::vector<Node> nodes;
  std::vector<Edge> edges;
};

// Keeps every scored headline as a node (isolates included); an edge is
// kept iff p_coref >= tau. Labels are looked up for node shading.
CorefGraph threshold_edges(const std::vector<ScoredRow>& scored,
                           const std::unordered_map<std::string, Label>& labels,
                           double tau);

// Maximal connected sets, ordered by decreasing size then lexicographically
// smallest member; members sorted. Isolates become singletons.
std::vector<std::vector<std::string>> connected_components(const CorefGraph& g);

// Undirected DOT text; MID nodes white-filled, non-MID nodes black-filled.
std::string export_dot(const CorefGraph& g);

// CSV `cluster_id,headline_id` with dense ids following the cluster order.
std::string export_cluster_csv(const std::vector<std::vector<std::string>>& clusters);

}  // namespace how
