#include "how/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "how/csv.hpp"

namespace how {

ConfusionCounts confusion(const std::vector<int>& labels,
                          const std::vector<int>& predictions) {
  if (labels.empty()) throw std::runtime_error("confusion: empty input");
  if (labels.size() != predictions.size()) {
    throw std::runtime_error("confusion: length mismatch");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i]) {
      predictions[i] ? ++c.tp : ++c.fn;
    } else {
      predictions[i] ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

Prf prf1(const ConfusionCounts& c) {
  Prf r;
  r.precision = (c.tp + c.fp) ? double(c.tp) / double(c.tp + c.fp) : 0.0;
  r.recall = (c.tp + c.fn) ? double(c.tp) / double(c.tp + c.fn) : 0.0;
  r.f1 = (r.precision + r.recall) > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  long total = c.tp + c.fp + c.tn + c.fn;
  r.accuracy = total ? double(c.tp + c.tn) / double(total) : 0.0;
  return r;
}

MacroPrf macro_average(const std::vector<MacroPrf>& per_class) {
  if (per_class.empty()) throw std::runtime_error("macro_average: empty input");
  MacroPrf m;
  for (const MacroPrf& c : per_class) {
    m.precision += c.precision;
    m.recall += c.recall;
    m.f1 += c.f1;
  }
  double n = double(per_class.size());
  m.precision /= n;
  m.recall /= n;
  m.f1 /= n;
  return m;
}

MacroPrf binary_macro(const std::vector<int>& labels,
                      const std::vector<int>& predictions) {
  Prf pos = prf1(confusion(labels, predictions));
  std::vector<int> inv_labels(labels.size()), inv_preds(predictions.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    inv_labels[i] = labels[i] ? 0 : 1;
    inv_preds[i] = predictions[i] ? 0 : 1;
  }
  Prf neg = prf1(confusion(inv_labels, inv_preds));
  return macro_average({{pos.precision, pos.recall, pos.f1},
                        {neg.precision, neg.recall, neg.f1}});
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw std::runtime_error("roc_auc: bad input sizes");
  }
  long n_pos = std::accumulate(labels.begin(), labels.end(), 0L);
  long n_neg = long(labels.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw std::runtime_error("roc_auc: needs both classes present");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  // Average ranks over ties, then the Mann-Whitney U statistic.
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    double avg_rank = 0.5 * (double(i + 1) + double(j));
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]]) rank_sum_pos += avg_rank;
    }
    i = j;
  }
  double u = rank_sum_pos - 0.5 * double(n_pos) * double(n_pos + 1);
  return u / (double(n_pos) * double(n_neg));
}

BlancReport blanc(const std::vector<int>& gold, const std::vector<int>& predicted) {
  if (gold.empty()) throw std::runtime_error("blanc: empty pair list");
  BlancReport r;
  r.link = prf1(confusion(gold, predicted));
  std::vector<int> inv_gold(gold.size()), inv_pred(predicted.size());
  for (std::size_t i = 0; i < gold.size(); ++i) {
    inv_gold[i] = gold[i] ? 0 : 1;
    inv_pred[i] = predicted[i] ? 0 : 1;
  }
  r.nonlink = prf1(confusion(inv_gold, inv_pred));
  r.blanc = macro_average({{r.link.precision, r.link.recall, r.link.f1},
                           {r.nonlink.precision, r.nonlink.recall, r.nonlink.f1}});
  return r;
}

std::vector<PairScore> score_pairs(const ModelParams& params,
                                   const PairDataset& ds) {
  // One conv pass per distinct headline, then cheap gate math per pair.
  std::vector<Eigen::VectorXd> hidden(ds.encodings.size());
  std::vector<double> p_mid(ds.encodings.size());
  for (std::size_t i = 0; i < ds.encodings.size(); ++i) {
    hidden[i] = conv_maxpool_traced(ds.encodings[i].matrix, params).hidden;
    p_mid[i] = mid_probability(hidden[i], params);
  }
  std::vector<PairScore> out;
  out.reserve(ds.pairs.size());
  for (const PairDataset::Pair& pair : ds.pairs) {
    PairScore s;
    s.id_a = ds.ids[pair.a];
    s.id_b = ds.ids[pair.b];
    s.p_a = p_mid[pair.a];
    s.p_b = p_mid[pair.b];
    double dot = hidden[pair.a].dot(hidden[pair.b]);
    s.p_coref = coref_gate(s.p_a, s.p_b, dot, pair.delta, params).p_coref;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ScoredRow> join_labels(const std::vector<PairScore>& scores,
                                   const PairDataset& ds) {
  if (scores.size() != ds.pairs.size()) {
    throw std::runtime_error("join_labels: score/pair count mismatch");
  }
  std::vector<ScoredRow> rows;
  rows.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const PairDataset::Pair& pair = ds.pairs[i];
    if (scores[i].id_a != ds.ids[pair.a] || scores[i].id_b != ds.ids[pair.b]) {
      throw std::runtime_error("join_labels: id mismatch at row " +
                               std::to_string(i));
    }
    ScoredRow row;
    row.score = scores[i];
    row.y_a = ds.y_mid[pair.a];
    row.y_b = ds.y_mid[pair.b];
    row.y_coref = pair.y_coref;
    rows.push_back(std::move(row));
  }
  return rows;
}

MetricsReport report_from_rows(const std::vector<ScoredRow>& rows,
                               double threshold) {
  if (rows.empty()) throw std::runtime_error("report: no scored pairs");
  MetricsReport report;
  report.n_scored_pairs = long(rows.size());

  // MID task: first occurrence in slot a wins.
  std::unordered_set<std::string> seen;
  std::vector<double> mid_scores;
  std::vector<int> mid_labels, mid_preds;
  std::vector<double> coref_scores;
  std::vector<int> coref_labels, coref_preds;
  for (const ScoredRow& row : rows) {
    if (row.y_a < 0 || row.y_b < 0 || row.y_coref < 0) {
      throw std::runtime_error("report: rows are missing labels");
    }
    if (seen.insert(row.score.id_a).second) {
      mid_scores.push_back(row.score.p_a);
      mid_labels.push_back(row.y_a);
      mid_preds.push_back(row.score.p_a >= threshold ? 1 : 0);
    }
    coref_scores.push_back(row.score.p_coref);
    coref_labels.push_back(row.y_coref);
    coref_preds.push_back(row.score.p_coref >= threshold ? 1 : 0);
  }
  report.n_scored_headlines = long(mid_labels.size());

  report.mid_positive = prf1(confusion(mid_labels, mid_preds));
  report.mid_auc = roc_auc(mid_scores, mid_labels);
  report.mid_macro = binary_macro(mid_labels, mid_preds);

  report.coref_positive = prf1(confusion(coref_labels, coref_preds));
  report.coref_auc = roc_auc(coref_scores, coref_labels);
  report.coref_blanc = blanc(coref_labels, coref_preds);
  return report;
}

MetricsReport evaluate(const ModelParams& params, const PairDataset& ds,
                       double threshold) {
  return report_from_rows(join_labels(score_pairs(params, ds), ds), threshold);
}

namespace {

nlohmann::ordered_json prf_json(const Prf& p) {
  return {{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}};
}

nlohmann::ordered_json macro_json(const MacroPrf& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
}

std::string real_to_string(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

int parse_label_field(const std::string& s, long line) {
  if (s == "0") return 0;
  if (s == "1") return 1;
  throw std::runtime_error("line " + std::to_string(line) + ": bad label '" +
                           s + "'");
}

double parse_real_field(const std::string& s, long line) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::runtime_error("line " + std::to_string(line) +
                             ": non-numeric value '" + s + "'");
  }
  return v;
}

}  // namespace

std::string report_to_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["mid"] = {{"positive", prf_json(report.mid_positive)},
              {"accuracy", report.mid_positive.accuracy},
              {"auc", report.mid_auc},
              {"macro", macro_json(report.mid_macro)}};
  j["coref"] = {{"positive", prf_json(report.coref_positive)},
                {"accuracy", report.coref_positive.accuracy},
                {"auc", report.coref_auc},
                {"blanc", macro_json(report.coref_blanc.blanc)},
                {"blanc_link", prf_json(report.coref_blanc.link)},
                {"blanc_nonlink", prf_json(report.coref_blanc.nonlink)}};
  j["n_scored_headlines"] = report.n_scored_headlines;
  j["n_scored_pairs"] = report.n_scored_pairs;
  return j.dump(2) + "\n";
}

std::string scores_to_csv(const std::vector<PairScore>& scores) {
  std::string out = "id_a,id_b,p_a,p_b,p_coref\n";
  for (const PairScore& s : scores) {
    csv::append_row(out, {s.id_a, s.id_b, real_to_string(s.p_a),
                          real_to_string(s.p_b), real_to_string(s.p_coref)});
  }
  return out;
}

std::string scored_rows_to_csv(const std::vector<ScoredRow>& rows) {
  std::string out = "id_a,id_b,p_a,p_b,p_coref,y_a,y_b,y_coref\n";
  for (const ScoredRow& r : rows) {
    csv::append_row(out, {r.score.id_a, r.score.id_b, real_to_string(r.score.p_a),
                          real_to_string(r.score.p_b),
                          real_to_string(r.score.p_coref),
                          std::to_string(r.y_a), std::to_string(r.y_b),
                          std::to_string(r.y_coref)});
  }
  return out;
}

std::vector<ScoredRow> parse_scores_csv(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> f;
  if (!reader.next(f)) throw std::runtime_error("scores file is empty");
  bool labeled;
  std::string header;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (i) header.push_back(',');
    header += f[i];
  }
  if (header == "id_a,id_b,p_a,p_b,p_coref,y_a,y_b,y_coref") {
    labeled = true;
  } else if (header == "id_a,id_b,p_a,p_b,p_coref") {
    labeled = false;
  } else {
    throw std::runtime_error("unrecognized scores header '" + header + "'");
  }
  std::vector<ScoredRow> rows;
  while (reader.next(f)) {
    long line = reader.record_line();
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != (labeled ? 8u : 5u)) {
      throw std::runtime_error("line " + std::to_string(line) +
                               ": wrong column count");
    }
    ScoredRow row;
    row.score.id_a = f[0];
    row.score.id_b = f[1];
    row.score.p_a = parse_real_field(f[2], line);
    row.score.p_b = parse_real_field(f[3], line);
    row.score.p_coref = parse_real_field(f[4], line);
    if (labeled) {
      row.y_a = parse_label_field(f[5], line);
      row.y_b = parse_label_field(f[6], line);
      row.y_coref = parse_label_field(f[7], line);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace how
