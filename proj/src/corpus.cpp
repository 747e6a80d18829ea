#include "how/corpus.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "how/csv.hpp"
#include "how/rng.hpp"

namespace how {

std::string to_string(Partition p) {
  switch (p) {
    case Partition::Training: return "training";
    case Partition::Validation: return "validation";
    case Partition::Testing: return "testing";
  }
  return "";
}

std::optional<Partition> partition_from_string(std::string_view s) {
  if (s == "training") return Partition::Training;
  if (s == "validation") return Partition::Validation;
  if (s == "testing") return Partition::Testing;
  return std::nullopt;
}

namespace {

const char* kNodeHeader = "id,text,date,label,mid_id,incident_id,partition";
const char* kEdgeHeader = "id_a,id_b,label";

[[noreturn]] void fail_at(long line, const std::string& what) {
  throw std::runtime_error("line " + std::to_string(line) + ": " + what);
}

std::string trimmed(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n\v\f");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n\v\f");
  return s.substr(a, b - a + 1);
}

void check_header(csv::Reader& reader, const char* expected,
                  const char* what) {
  std::vector<std::string> fields;
  if (!reader.next(fields)) {
    throw std::runtime_error(std::string(what) + ": empty file, expected header '" +
                             expected + "'");
  }
  std::string joined;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) joined.push_back(',');
    joined += fields[i];
  }
  if (joined != expected) {
    fail_at(reader.record_line(), std::string(what) + ": bad header '" + joined +
                                      "', expected '" + expected + "'");
  }
}

std::unordered_map<std::string, std::size_t> index_by_id(
    const std::vector<Headline>& headlines) {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(headlines.size());
  for (std::size_t i = 0; i < headlines.size(); ++i) {
    if (!index.emplace(headlines[i].id, i).second) {
      throw std::runtime_error("duplicate headline id '" + headlines[i].id + "'");
    }
  }
  return index;
}

bool coreferent(const Headline& a, const Headline& b) {
  return !a.incident_id.empty() && a.incident_id == b.incident_id;
}

PairExample make_pair(const Headline& a, const Headline& b, bool coref) {
  PairExample p;
  if (a.id < b.id) {
    p.id_a = a.id;
    p.id_b = b.id;
  } else {
    p.id_a = b.id;
    p.id_b = a.id;
  }
  p.coref = coref;
  p.delta_days = days_between(a.date, b.date);
  return p;
}

}  // namespace

std::vector<Headline> parse_node_list(std::istream& in) {
  csv::Reader reader(in);
  check_header(reader, kNodeHeader, "node list");
  std::vector<Headline> out;
  std::unordered_set<std::string> seen_ids;
  std::vector<std::string> f;
  while (reader.next(f)) {
    long line = reader.record_line();
    if (f.size() == 1 && f[0].empty()) continue;  // blank line
    if (f.size() != 7) {
      fail_at(line, "expected 7 columns, got " + std::to_string(f.size()));
    }
    Headline h;
    h.id = f[0];
    if (h.id.empty()) fail_at(line, "empty id");
    if (!seen_ids.insert(h.id).second) {
      fail_at(line, "duplicate id '" + h.id + "'");
    }
    h.text = f[1];
    if (trimmed(h.text).empty()) fail_at(line, "empty headline text");
    try {
      h.date = parse_date(f[2]);
    } catch (const std::exception& e) {
      fail_at(line, e.what());
    }
    if (f[3] == "mid") {
      h.label = Label::Mid;
    } else if (f[3] == "news") {
      h.label = Label::News;
    } else {
      fail_at(line, "unknown label '" + f[3] + "', expected mid or news");
    }
    h.mid_id = f[4];
    h.incident_id = f[5];
    if (h.label == Label::Mid && h.incident_id.empty()) {
      fail_at(line, "mid-labeled row '" + h.id + "' is missing incident_id");
    }
    if (h.label == Label::News && !(h.mid_id.empty() && h.incident_id.empty())) {
      fail_at(line, "news-labeled row '" + h.id + "' carries MID identifiers");
    }
    if (!f[6].empty()) {
      h.partition = partition_from_string(f[6]);
      if (!h.partition) fail_at(line, "unknown partition '" + f[6] + "'");
    }
    out.push_back(std::move(h));
  }
  return out;
}

std::string write_node_list(const std::vector<Headline>& headlines) {
  std::string out = std::string(kNodeHeader) + "\n";
  std::vector<std::string> f(7);
  for (const Headline& h : headlines) {
    f[0] = h.id;
    f[1] = h.text;
    f[2] = format_date(h.date);
    f[3] = h.label == Label::Mid ? "mid" : "news";
    f[4] = h.mid_id;
    f[5] = h.incident_id;
    f[6] = h.partition ? to_string(*h.partition) : "";
    csv::append_row(out, f);
  }
  return out;
}

std::vector<EdgeRow> parse_edge_list(std::istream& in) {
  csv::Reader reader(in);
  check_header(reader, kEdgeHeader, "edge list");
  std::vector<EdgeRow> out;
  std::vector<std::string> f;
  while (reader.next(f)) {
    long line = reader.record_line();
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != 3) {
      fail_at(line, "expected 3 columns, got " + std::to_string(f.size()));
    }
    EdgeRow row;
    row.id_a = f[0];
    row.id_b = f[1];
    if (row.id_a.empty() || row.id_b.empty()) fail_at(line, "empty endpoint id");
    if (row.id_a == row.id_b) {
      fail_at(line, "self-pair on id '" + row.id_a + "'");
    }
    if (f[2] == "coref") {
      row.coref = true;
    } else if (f[2] == "noncoref") {
      row.coref = false;
    } else {
      fail_at(line, "unknown edge label '" + f[2] + "'");
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::string write_edge_list(const std::vector<PairExample>& edges) {
  std::string out = std::string(kEdgeHeader) + "\n";
  std::vector<std::string> f(3);
  for (const PairExample& e : edges) {
    f[0] = e.id_a;
    f[1] = e.id_b;
    f[2] = e.coref ? "coref" : "noncoref";
    csv::append_row(out, f);
  }
  return out;
}

std::vector<PairExample> resolve_edges(const std::vector<EdgeRow>& rows,
                                       const std::vector<Headline>& headlines) {
  auto index = index_by_id(headlines);
  std::vector<PairExample> out;
  out.reserve(rows.size());
  for (const EdgeRow& row : rows) {
    auto ia = index.find(row.id_a);
    auto ib = index.find(row.id_b);
    if (ia == index.end() || ib == index.end()) {
      throw std::runtime_error("edge references unknown headline id '" +
                               (ia == index.end() ? row.id_a : row.id_b) + "'");
    }
    const Headline& a = headlines[ia->second];
    const Headline& b = headlines[ib->second];
    if (row.coref && !coreferent(a, b)) {
      throw std::runtime_error("coref edge " + row.id_a + "--" + row.id_b +
                               " joins headlines of different incidents");
    }
    out.push_back(make_pair(a, b, row.coref));
  }
  return out;
}

PartitionResult partition_by_date(const std::vector<Headline>& headlines,
                                  const PartitionRanges& ranges) {
  const DateRange* all[3] = {&ranges.training, &ranges.validation,
                             &ranges.testing};
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      if (all[i]->overlaps(*all[j])) {
        throw std::runtime_error("partition date ranges overlap");
      }
    }
  }
  PartitionResult result;
  for (const Headline& h : headlines) {
    Headline copy = h;
    if (ranges.training.contains(h.date)) {
      copy.partition = Partition::Training;
      result.training.push_back(std::move(copy));
    } else if (ranges.validation.contains(h.date)) {
      copy.partition = Partition::Validation;
      result.validation.push_back(std::move(copy));
    } else if (ranges.testing.contains(h.date)) {
      copy.partition = Partition::Testing;
      result.testing.push_back(std::move(copy));
    } else {
      result.excluded_ids.push_back(h.id);
    }
  }
  return result;
}

std::vector<PairExample> positive_edges(const std::vector<Headline>& headlines) {
  std::vector<std::string> incident_order;
  std::unordered_map<std::string, std::vector<std::size_t>> by_incident;
  for (std::size_t i = 0; i < headlines.size(); ++i) {
    const Headline& h = headlines[i];
    if (h.label != Label::Mid || h.incident_id.empty()) continue;
    auto [it, inserted] = by_incident.try_emplace(h.incident_id);
    if (inserted) incident_order.push_back(h.incident_id);
    it->second.push_back(i);
  }
  std::vector<PairExample> out;
  for (const std::string& incident : incident_order) {
    const auto& members = by_incident[incident];
    for (std::size_t i = 0; i + 1 < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        out.push_back(make_pair(headlines[members[i]], headlines[members[j]], true));
      }
    }
  }
  return out;
}

namespace {

// Count of distinct non-coreferent unordered pairs in the pool.
std::size_t available_negative_pairs(const std::vector<Headline>& pool) {
  std::unordered_map<std::string, std::size_t> incident_sizes;
  for (const Headline& h : pool) {
    if (!h.incident_id.empty()) ++incident_sizes[h.incident_id];
  }
  std::size_t n = pool.size();
  std::size_t total = n * (n - 1) / 2;
  for (const auto& [_, k] : incident_sizes) total -= k * (k - 1) / 2;
  return total;
}

}  // namespace

std::vector<PairExample> sample_negative_pairs(const std::vector<Headline>& pool,
                                               std::size_t count,
                                               std::uint64_t seed) {
  index_by_id(pool);  // id uniqueness check
  std::size_t n = pool.size();
  std::size_t available = n < 2 ? 0 : available_negative_pairs(pool);
  if (count > available) {
    throw std::runtime_error(
        "insufficient pool: requested " + std::to_string(count) +
        " negative pairs but only " + std::to_string(available) + " exist");
  }
  std::vector<PairExample> out;
  out.reserve(count);
  if (count == 0) return out;

  Pcg32 rng(seed);
  // Near-saturated small pools are drawn by enumerating all eligible pairs
  // and taking a partial shuffle; everything else uses rejection sampling.
  if (n <= 4096 && count * 3 >= available * 2) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> eligible;
    eligible.reserve(available);
    for (std::uint32_t i = 0; i + 1 < n; ++i) {
      for (std::uint32_t j = i + 1; j < n; ++j) {
        if (!coreferent(pool[i], pool[j])) eligible.emplace_back(i, j);
      }
    }
    for (std::size_t i = 0; i < count; ++i) {
      std::size_t j = i + rng.bounded(std::uint32_t(eligible.size() - i));
      std::swap(eligible[i], eligible[j]);
      out.push_back(make_pair(pool[eligible[i].first], pool[eligible[i].second],
                              false));
    }
    return out;
  }

  std::set<std::pair<std::uint32_t, std::uint32_t>> chosen;
  while (out.size() < count) {
    std::uint32_t i = rng.bounded(std::uint32_t(n));
    std::uint32_t j = rng.bounded(std::uint32_t(n));
    if (i == j) continue;
    if (i > j) std::swap(i, j);
    if (coreferent(pool[i], pool[j])) continue;
    if (!chosen.emplace(i, j).second) continue;
    out.push_back(make_pair(pool[i], pool[j], false));
  }
  return out;
}

std::vector<PairExample> sample_negative_edges(
    const std::vector<PairExample>& positives, const std::vector<Headline>& pool,
    int ratio, std::uint64_t seed) {
  if (ratio < 1) throw std::runtime_error("negative sampling ratio must be >= 1");
  return sample_negative_pairs(pool, positives.size() * std::size_t(ratio), seed);
}

DatasetStats corpus_stats(const std::vector<Headline>& headlines,
                          const std::vector<PairExample>& edges) {
  auto index = index_by_id(headlines);
  DatasetStats stats;
  std::unordered_set<std::string> mids;
  std::unordered_set<std::string> incidents;
  long word_total = 0;
  for (const Headline& h : headlines) {
    ++stats.headlines;
    if (h.label == Label::Mid) {
      ++stats.mid_headlines;
    } else {
      ++stats.non_mid_headlines;
    }
    stats.characters += count_codepoints(h.text);
    if (!h.mid_id.empty()) mids.insert(h.mid_id);
    if (!h.incident_id.empty()) incidents.insert(h.incident_id);
    int words = int(tokenize(normalize(h.text)).size());
    ++stats.word_length_histogram[words];
    word_total += words;
  }
  stats.unique_mids = long(mids.size());
  stats.unique_incidents = long(incidents.size());
  for (const PairExample& e : edges) {
    if (!index.count(e.id_a) || !index.count(e.id_b)) {
      throw std::runtime_error("edge references unknown headline id '" +
                               (index.count(e.id_a) ? e.id_b : e.id_a) + "'");
    }
    ++stats.links;
    if (e.coref) {
      ++stats.positive_links;
    } else {
      ++stats.negative_links;
    }
  }
  stats.mean_word_length =
      stats.headlines ? double(word_total) / double(stats.headlines) : 0.0;
  return stats;
}

SynthResult generate_synthetic(const SynthConfig& config, std::uint64_t seed) {
  if (config.n_incidents < 1 || config.headlines_per_incident < 1 ||
      config.vocab_size < 2 * config.n_incidents || config.n_negatives < 0 ||
      config.embedding_dim < 1 || config.neg_edge_ratio < 1) {
    throw std::runtime_error("invalid synthetic corpus config");
  }

  // Token slices depend on the config only, never on the seed.
  int slice = std::max(1, config.vocab_size / (2 * config.n_incidents));
  int background_start = slice * config.n_incidents;
  int background_size = config.vocab_size - background_start;

  std::vector<std::string> vocab(config.vocab_size);
  for (int i = 0; i < config.vocab_size; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "w%04d", i);
    vocab[i] = buf;
  }

  Pcg32 master(seed);
  std::uint64_t seed_dates = master.next_u64();
  std::uint64_t seed_texts = master.next_u64();
  std::uint64_t seed_embed = master.next_u64();
  std::uint64_t seed_edges = master.next_u64();
  Pcg32 rng_dates(seed_dates);
  Pcg32 rng_texts(seed_texts);

  long span_days =
      days_between(config.span.last, config.span.first);  // inclusive bounds
  auto day_at = [&](long offset) {
    offset = std::clamp(offset, 0L, span_days);
    return Date{std::chrono::sys_days(config.span.first) +
                std::chrono::days(offset)};
  };
  auto draw_text = [&](int lo_token, int n_tokens) {
    int len = 5 + int(rng_texts.bounded(6));  // 5..10 words
    std::string text;
    for (int w = 0; w < len; ++w) {
      if (w) text.push_back(' ');
      text += vocab[lo_token + int(rng_texts.bounded(std::uint32_t(n_tokens)))];
    }
    return text;
  };

  SynthResult result;
  long counter = 0;
  auto next_id = [&] {
    char buf[24];
    const char* prefix = config.partition == Partition::Training     ? "tr"
                         : config.partition == Partition::Validation ? "va"
                                                                     : "te";
    std::snprintf(buf, sizeof(buf), "%s%05ld", prefix, counter++);
    return std::string(buf);
  };

  for (int inc = 0; inc < config.n_incidents; ++inc) {
    // Incident centers spread evenly across the span so distinct incidents
    // are far apart in time while one incident's headlines stay close.
    long center = (2 * long(inc) + 1) * span_days / (2 * config.n_incidents);
    center += long(rng_dates.bounded(7)) - 3;
    char idbuf[16];
    std::snprintf(idbuf, sizeof(idbuf), "%03d", inc);
    for (int k = 0; k < config.headlines_per_incident; ++k) {
      Headline h;
      h.id = next_id();
      h.date = day_at(center + long(rng_dates.bounded(7)));
      h.label = Label::Mid;
      h.mid_id = std::string("m") + idbuf;
      h.incident_id = std::string("i") + idbuf;
      h.partition = config.partition;
      h.text = draw_text(inc * slice, slice);
      result.headlines.push_back(std::move(h));
    }
  }
  for (int k = 0; k < config.n_negatives; ++k) {
    Headline h;
    h.id = next_id();
    h.date = day_at(long(rng_dates.bounded(std::uint32_t(span_days + 1))));
    h.label = Label::News;
    h.partition = config.partition;
    h.text = draw_text(background_start, std::max(1, background_size));
    result.headlines.push_back(std::move(h));
  }

  result.edges = positive_edges(result.headlines);
  std::size_t want = result.edges.size() * std::size_t(config.neg_edge_ratio);
  // Degenerate configs (no negative headlines, one incident) may not supply
  // the full ratio; take what exists.
  std::size_t available = available_negative_pairs(result.headlines);
  auto negatives = sample_negative_pairs(result.headlines,
                                         std::min(want, available), seed_edges);
  result.edges.insert(result.edges.end(), negatives.begin(), negatives.end());

  Pcg32 rng_embed(seed_embed);
  result.table.dimension = config.embedding_dim;
  for (const std::string& token : vocab) {
    Eigen::VectorXd v(config.embedding_dim);
    for (int d = 0; d < config.embedding_dim; ++d) {
      v[d] = rng_embed.uniform(-0.5, 0.5);
    }
    result.table.add(token, std::move(v));
  }
  return result;
}

}  // namespace how
