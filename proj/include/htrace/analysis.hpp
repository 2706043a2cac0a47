#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "htrace/corpus.hpp"
#include "htrace/heuristics.hpp"
#include "htrace/stats.hpp"

namespace htrace::analysis {

using heuristics::FeatureTable;
using heuristics::TraceMatrix;
using stats::CorrelationResult;

// A correlation that may have failed its preconditions (constant input,
// too few samples). Exactly one of result / error is set.
struct CorrelationOutcome {
  std::optional<CorrelationResult> result;
  std::string error;
};

struct HeuristicSubset {
  std::string feature_id;
  double k = 100;
  std::set<std::string> member_annotators;
  std::set<std::string> member_examples;
};

// ceil(k/100 * annotators), at least 1, at most annotators.
std::size_t top_count(double k, std::size_t annotators);

// Annotators ordered from most to least heuristic-seeking under the
// feature's orientation; ties by ascending id.
std::vector<std::string> rank_annotators(const TraceMatrix& traces, const std::string& feature_id);

// Throws Error("unknown-feature"), Error("bad-percentile") for k outside (0, 100].
HeuristicSubset heuristic_subset(const corpus::Corpus& corpus, const TraceMatrix& traces,
                                 const std::string& feature_id, double k);

// Examples whose annotator has a row in the trace matrix.
std::vector<const corpus::AnnotationExample*> eligible_examples(const corpus::Corpus& corpus,
                                                                const TraceMatrix& traces);

// Fraction of the given examples the model answers correctly. Throws
// Error("uncovered-examples") if any example lacks a prediction.
double accuracy(std::span<const corpus::AnnotationExample* const> examples,
                const corpus::PredictionSet& predictions);

struct PrecisionPoint {
  double k = 0;
  double precision = 0;
  std::size_t subset_size = 0;
};

struct PrecisionCurve {
  std::string feature_id;
  std::string model_id;
  std::vector<PrecisionPoint> points;
};

PrecisionCurve precision_curve(const corpus::Corpus& corpus, const TraceMatrix& traces,
                               const std::string& feature_id, const corpus::PredictionSet& predictions,
                               const std::vector<double>& k_grid);

// Per trace column: Pearson over annotators of the raw trace value against
// the model's accuracy on that annotator's examples.
std::map<std::string, CorrelationOutcome> annotator_bias_correlation(const TraceMatrix& traces,
                                                                    const corpus::Corpus& corpus,
                                                                    const corpus::PredictionSet& predictions);

// Per example-level feature: Pearson of the example value against the 0/1
// solved indicator over all examples in `corpus`. Examples with a missing
// cell are skipped. Throws Error("annotator-level-feature") for word_overlap
// or pca.
std::map<std::string, CorrelationOutcome> pooled_bias_correlation(const corpus::Corpus& corpus,
                                                                 const FeatureTable& features,
                                                                 const corpus::PredictionSet& predictions,
                                                                 const std::vector<std::string>& feature_ids);

enum class Factor { passage_length, entity, index };
std::string to_string(Factor factor);
Factor parse_factor(const std::string& text);

// Maximal runs of capitalized words, skipping each sentence's first word.
// A run ends at a lowercase word or after a word with trailing punctuation.
int approximate_entity_count(const std::string& passage);

struct InfluencerCell {
  std::string feature_id;
  Factor factor = Factor::passage_length;
  double mean_r = 0;
  int annotators_used = 0;
  int annotators_skipped = 0;
  bool approximate = false;  // entity counts came from the fallback counter
};

// Mean over annotators of the per-annotator Pearson r between the feature
// and the factor. Annotators with fewer than 3 usable examples or a
// constant vector are skipped. Throws Error("no-qualifying-annotators").
InfluencerCell influencer_correlation(const corpus::Corpus& corpus, const FeatureTable& features,
                                      const std::string& feature_id, Factor factor);

struct InfluencerOutcome {
  std::optional<InfluencerCell> cell;
  std::string feature_id;
  Factor factor = Factor::passage_length;
  std::string error;
};

std::vector<InfluencerOutcome> influencer_correlations(const corpus::Corpus& corpus, const FeatureTable& features,
                                                       const std::vector<std::string>& feature_ids);

struct LabelContrast {
  double group_rate = 0;       // percent of group examples carrying the label
  double complement_rate = 0;  // percent of remaining examples
  double difference = 0;       // group_rate - complement_rate, percentage points
};

// Group is given by example ids; the complement is every other corpus
// example. Throws Error("missing-field") when an example has no labels,
// Error("empty-group") / Error("empty-complement").
std::map<std::string, LabelContrast> label_contrast(const corpus::Corpus& corpus,
                                                    const std::set<std::string>& group_examples,
                                                    const std::set<std::string>& label_universe);

std::map<std::string, LabelContrast> qualitative_diff(const corpus::Corpus& corpus, const HeuristicSubset& subset,
                                                      const std::set<std::string>& label_universe);

// Union of all labels present in the corpus.
std::set<std::string> label_universe(const corpus::Corpus& corpus);

}  // namespace htrace::analysis
