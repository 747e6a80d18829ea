#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "how/dates.hpp"
#include "how/textprep.hpp"

namespace how {

enum class Label { Mid, News };
enum class Partition { Training, Validation, Testing };

std::string to_string(Partition p);
std::optional<Partition> partition_from_string(std::string_view s);

// One headline node. mid_id / incident_id are empty when absent; a Mid
// label requires incident_id, a News label forbids both identifiers.
struct Headline {
  std::string id;
  std::string text;
  Date date{};
  Label label = Label::News;
  std::string mid_id;
  std::string incident_id;
  std::optional<Partition> partition;
};

// Unordered headline pair, canonicalized so id_a < id_b.
struct PairExample {
  std::string id_a;
  std::string id_b;
  bool coref = false;
  long delta_days = 0;
};

struct DatasetStats {
  long headlines = 0;
  long mid_headlines = 0;
  long non_mid_headlines = 0;
  long characters = 0;
  long unique_mids = 0;
  long unique_incidents = 0;
  long links = 0;
  long positive_links = 0;
  long negative_links = 0;
  std::map<int, long> word_length_histogram;
  double mean_word_length = 0.0;
};

// --- node / edge list files ------------------------------------------------

// Node list CSV: header `id,text,date,label,mid_id,incident_id,partition`,
// label in {mid,news}, date YYYY-MM-DD, empty strings for absent optionals.
// Every violation is reported with its line number.
std::vector<Headline> parse_node_list(std::istream& in);
std::string write_node_list(const std::vector<Headline>& headlines);

// Edge list CSV: header `id_a,id_b,label`, label in {coref,noncoref}.
struct EdgeRow {
  std::string id_a;
  std::string id_b;
  bool coref = false;
};
std::vector<EdgeRow> parse_edge_list(std::istream& in);
std::string write_edge_list(const std::vector<PairExample>& edges);

// Joins edge rows against the node list: validates endpoints exist, that
// coref rows connect headlines of one incident, and fills delta_days.
std::vector<PairExample> resolve_edges(const std::vector<EdgeRow>& rows,
                                       const std::vector<Headline>& headlines);

// --- partitioning ------------------------------------------------------------

struct PartitionRanges {
  DateRange training{parse_date("1992-01-01"), parse_date("1996-12-31")};
  DateRange validation{parse_date("1997-01-01"), parse_date("1997-12-31")};
  DateRange testing{parse_date("1998-01-01"), parse_date("2001-12-31")};
};

struct PartitionResult {
  std::vector<Headline> training;
  std::vector<Headline> validation;
  std::vector<Headline> testing;
  std::vector<std::string> excluded_ids;  // dated outside every range
};

// Assigns each headline to the unique range containing its date (and sets
// its partition field). Throws if the ranges overlap.
PartitionResult partition_by_date(const std::vector<Headline>& headlines,
                                  const PartitionRanges& ranges);

// --- edge construction -------------------------------------------------------

// Every incident with n headlines contributes its n(n-1)/2 within-incident
// pairs; incidents are visited in first-appearance order.
std::vector<PairExample> positive_edges(const std::vector<Headline>& headlines);

// Draws `count` distinct non-coreferent pairs (endpoints not sharing an
// incident) uniformly without replacement. Deterministic given seed and
// input order. Throws when fewer than `count` such pairs exist.
std::vector<PairExample> sample_negative_pairs(
    const std::vector<Headline>& pool, std::size_t count, std::uint64_t seed);

// ratio x |positives| negative pairs, as above.
std::vector<PairExample> sample_negative_edges(
    const std::vector<PairExample>& positives,
    const std::vector<Headline>& pool, int ratio, std::uint64_t seed);

// --- statistics ---------------------------------------------------------------

// Character counts are Unicode scalar values of the raw text; the word
// histogram uses normalize+tokenize. Throws on dangling edge endpoints.
DatasetStats corpus_stats(const std::vector<Headline>& headlines,
                          const std::vector<PairExample>& edges);

// --- synthetic corpora ---------------------------------------------------------

// Desk-scale corpus with a recoverable signal: each incident's headlines
// draw from a token slice private to that incident, non-incident headlines
// draw from a disjoint background vocabulary, and incident dates cluster
// tightly while background dates spread over the whole span. Token slices
// are a function of the config alone, so corpora generated with different
// seeds share templates and one embedding table covers them all.
struct SynthConfig {
  int n_incidents = 20;
  int headlines_per_incident = 5;
  int n_negatives = 500;  // non-incident headline count
  int vocab_size = 500;
  int embedding_dim = 300;
  int neg_edge_ratio = 5;
  DateRange span{parse_date("1992-01-01"), parse_date("1996-12-31")};
  Partition partition = Partition::Training;
};

struct SynthResult {
  std::vector<Headline> headlines;
  std::vector<PairExample> edges;
  EmbeddingTable table;
};

SynthResult generate_synthetic(const SynthConfig& config, std::uint64_t seed);

}  // namespace how
