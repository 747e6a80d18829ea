#include "how/graph.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "how/csv.hpp"

namespace how {

CorefGraph threshold_edges(const std::vector<ScoredRow>& scored,
                           const std::unordered_map<std::string, Label>& labels,
                           double tau) {
  if (tau < 0.0 || tau > 1.0) throw std::runtime_error("tau must be in [0, 1]");
  std::set<std::string> node_ids;
  std::map<std::pair<std::string, std::string>, double> edge_p;
  for (const ScoredRow& row : scored) {
    const std::string& a = row.score.id_a;
    const std::string& b = row.score.id_b;
    if (a == b) throw std::runtime_error("self-pair on id '" + a + "'");
    node_ids.insert(a);
    node_ids.insert(b);
    if (row.score.p_coref >= tau) {
      auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
      auto [it, inserted] = edge_p.emplace(key, row.score.p_coref);
      if (!inserted) it->second = std::max(it->second, row.score.p_coref);
    }
  }
  CorefGraph g;
  g.nodes.reserve(node_ids.size());
  for (const std::string& id : node_ids) {
    auto it = labels.find(id);
    if (it == labels.end()) {
      throw std::runtime_error("no label known for headline '" + id + "'");
    }
    g.nodes.push_back({id, it->second});
  }
  g.edges.reserve(edge_p.size());
  for (const auto& [key, p] : edge_p) {
    g.edges.push_back({key.first, key.second, p});
  }
  return g;
}

std::vector<std::vector<std::string>> connected_components(const CorefGraph& g) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) index[g.nodes[i].id] = i;

  // Union-find over node indices.
  std::vector<std::size_t> parent(g.nodes.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const CorefGraph::Edge& e : g.edges) {
    auto ia = index.find(e.a);
    auto ib = index.find(e.b);
    if (ia == index.end() || ib == index.end()) {
      throw std::runtime_error("edge endpoint missing from node set");
    }
    std::size_t ra = find(ia->second), rb = find(ib->second);
    if (ra != rb) parent[ra] = rb;
  }
  std::map<std::size_t, std::vector<std::string>> groups;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    groups[find(i)].push_back(g.nodes[i].id);
  }
  std::vector<std::vector<std::string>> clusters;
  clusters.reserve(groups.size());
  for (auto& [_, members] : groups) {
    std::sort(members.begin(), members.end());
    clusters.push_back(std::move(members));
  }
  std::sort(clusters.begin(), clusters.end(),
            [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
              if (a.size() != b.size()) return a.size() > b.size();
              return a.front() < b.front();
            });
  return clusters;
}

namespace {

std::string quote_dot(const std::string& id) {
  std::string out = "\"";
  for (char ch : id) {
    if (ch == '"' || ch == '\\') out.push_back('\\');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::string export_dot(const CorefGraph& g) {
  std::string out = "graph how {\n  node [style=filled];\n";
  for (const CorefGraph::Node& n : g.nodes) {
    out += "  " + quote_dot(n.id);
    if (n.label == Label::Mid) {
      out += " [fillcolor=white];\n";
    } else {
      out += " [fillcolor=black, fontcolor=white];\n";
    }
  }
  for (const CorefGraph::Edge& e : g.edges) {
    out += "  " + quote_dot(e.a) + " -- " + quote_dot(e.b) + ";\n";
  }
  out += "}\n";
  return out;
}

std::string export_cluster_csv(
    const std::vector<std::vector<std::string>>& clusters) {
  std::string out = "cluster_id,headline_id\n";
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    for (const std::string& id : clusters[c]) {
      out += std::to_string(c) + "," + id + "\n";
    }
  }
  return out;
}

}  // namespace how
