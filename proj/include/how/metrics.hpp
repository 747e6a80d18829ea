#pragma once

#include <istream>
#include <string>
#include <vector>

#include "how/dataset.hpp"
#include "how/net.hpp"

namespace how {

struct ConfusionCounts {
  long tp = 0;
  long fp = 0;
  long tn = 0;
  long fn = 0;
};

// `true` (1) is the positive class. Throws on empty or mismatched input.
ConfusionCounts confusion(const std::vector<int>& labels,
                          const std::vector<int>& predictions);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
};

// Zero-denominator convention: precision/recall with an empty denominator
// are 0, F1 with precision + recall = 0 is 0.
Prf prf1(const ConfusionCounts& counts);

struct MacroPrf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Unweighted arithmetic mean over classes.
MacroPrf macro_average(const std::vector<MacroPrf>& per_class);

// For a binary task: mean of positive-class stats and the stats computed
// with labels and predictions inverted.
MacroPrf binary_macro(const std::vector<int>& labels,
                      const std::vector<int>& predictions);

// Mann-Whitney rank statistic with tie correction: the probability that a
// random positive outranks a random negative, ties counted half. Throws
// when only one class is present.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct BlancReport {
  Prf link;      // coref as the positive class
  Prf nonlink;   // non-coref as the positive class
  MacroPrf blanc;  // unweighted means of the two
};

BlancReport blanc(const std::vector<int>& gold, const std::vector<int>& predicted);

// --- scoring and reports -----------------------------------------------------

// Scores only; labels are joined afterwards so no gold information can
// reach the scoring stage.
struct PairScore {
  std::string id_a;
  std::string id_b;
  double p_a = 0.0;
  double p_b = 0.0;
  double p_coref = 0.0;
};

std::vector<PairScore> score_pairs(const ModelParams& params,
                                   const PairDataset& ds);

struct ScoredRow {
  PairScore score;
  int y_a = -1;
  int y_b = -1;
  int y_coref = -1;
};

// Positional join of score_pairs output against the dataset's labels.
std::vector<ScoredRow> join_labels(const std::vector<PairScore>& scores,
                                   const PairDataset& ds);

struct MetricsReport {
  Prf mid_positive;
  double mid_auc = 0.0;
  MacroPrf mid_macro;
  Prf coref_positive;
  double coref_auc = 0.0;
  BlancReport coref_blanc;
  long n_scored_headlines = 0;
  long n_scored_pairs = 0;
};

// MID classification is scored once per distinct headline, taking its
// probability from the first row where it appears in slot a; headlines
// never appearing in slot a are not scored. Coreference is scored over
// every row. Hard decisions at `threshold`.
MetricsReport report_from_rows(const std::vector<ScoredRow>& rows,
                               double threshold);

MetricsReport evaluate(const ModelParams& params, const PairDataset& ds,
                       double threshold);

std::string report_to_json(const MetricsReport& report);

// Raw score dump: header id_a,id_b,p_a,p_b,p_coref and, for labeled rows,
// y_a,y_b,y_coref appended.
std::string scores_to_csv(const std::vector<PairScore>& scores);
std::string scored_rows_to_csv(const std::vector<ScoredRow>& rows);

// Accepts both dump layouts; labels are -1 when the file has none.
std::vector<ScoredRow> parse_scores_csv(std::istream& in);

}  // namespace how
