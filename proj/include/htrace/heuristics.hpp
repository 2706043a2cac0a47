#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "htrace/corpus.hpp"

namespace htrace::heuristics {

enum class Group { lowtime, loweffort, first_option, serial_position, word_overlap, copying, pca };
enum class Level { example, annotator };

std::string to_string(Group group);

// orientation is +1 when larger values indicate heavier heuristic use.
struct FeatureDescriptor {
  std::string feature_id;
  Group group = Group::lowtime;
  int orientation = 1;
  Level level = Level::example;

  bool operator==(const FeatureDescriptor&) const = default;
};

// Every known feature, in catalog order (lowtime_1..4, loweffort_1..4,
// first_option, serial_position, word_overlap, copying_1..3, pca).
const std::vector<FeatureDescriptor>& feature_catalog();
const FeatureDescriptor& find_feature(const std::string& feature_id);
// Example-level ids only, in catalog order.
std::vector<std::string> example_feature_ids();
// One representative per group: lowtime_4, loweffort_4, first_option,
// serial_position, word_overlap, copying_3.
std::vector<FeatureDescriptor> default_trace_features();
// Resolves ids against the catalog, applying "id=+1"/"id=-1" overrides.
std::vector<FeatureDescriptor> select_features(const std::vector<std::string>& ids,
                                               const std::map<std::string, int>& orientation_overrides = {});

// --- per-example featurizations -------------------------------------------

// (t, ln t, t/l_d, ln(t/l_d)). Throws Error("nonpositive-input").
std::array<double, 4> lowtime_features(double working_time_secs, std::size_t passage_tokens);

struct LowEffort {
  double question_tokens = 0;           // l_q
  double keystroke_words = 0;           // l_k
  double question_option_tokens = 0;    // l_q + l_o
  std::optional<double> output_per_keystroke_word;  // (l_q + l_o) / l_k, absent when l_k == 0
};

// Throws Error("missing-field") when keystrokes were not logged and
// Error("empty-question") when the question has no tokens.
LowEffort loweffort_features(const corpus::AnnotationExample& example);

int first_option_bias(const corpus::AnnotationExample& example);

// Throws Error("empty-answer") when the correct option has no tokens.
int serial_position(const corpus::AnnotationExample& example);

// (lcs(d,q), max normalized lcs over {q, o1..o4}, mean of the same five).
// Options with no tokens contribute 0 and add a warning.
std::array<double, 3> copying_features(const corpus::AnnotationExample& example,
                                       std::vector<std::string>* warnings = nullptr);

// Mean pairwise Jaccard overlap of the questions. Throws
// Error("too-few-examples") with fewer than two questions.
double word_overlap_trace(std::span<const std::string> questions);
double word_overlap_trace(std::span<const corpus::AnnotationExample* const> examples);

struct ExampleFeatureVector {
  std::string example_id;
  std::string annotator_id;
  std::array<std::optional<double>, 4> lowtime;    // absent without working time
  std::array<std::optional<double>, 4> loweffort;  // l_k and ratio absent without keystrokes
  double first_option = 0;
  double serial_position = 0;
  std::array<double, 3> copying{};
  bool has_working_time = false;
  bool has_keystrokes = false;

  // Value of an example-level feature. nullopt marks a cell that is not
  // computable for this example (ratio with an empty keystroke stream).
  // Throws Error("missing-field") when the source field was never recorded
  // and Error("unknown-feature") for ids that are not example-level.
  std::optional<double> value(const std::string& feature_id) const;
};

ExampleFeatureVector featurize_example(const corpus::AnnotationExample& example,
                                       std::vector<std::string>* warnings = nullptr);

struct FeatureTable {
  std::vector<ExampleFeatureVector> rows;  // corpus order
  std::vector<std::string> warnings;

  const ExampleFeatureVector* find(const std::string& example_id) const;
};

// Parallel over examples. Output (rows and warning order) is identical to
// the serial version.
FeatureTable featurize_corpus(const corpus::Corpus& corpus);
FeatureTable featurize_corpus_serial(const corpus::Corpus& corpus);

// --- traces ---------------------------------------------------------------

struct TraceMatrix {
  std::vector<std::string> annotators;  // ascending id
  std::vector<int> example_counts;
  std::vector<FeatureDescriptor> columns;
  std::vector<double> values;  // row-major, annotators x columns
  std::vector<double> column_means;
  std::vector<double> column_sds;  // sample deviation, divisor n-1
  std::vector<bool> zero_variance;
  std::vector<std::string> warnings;

  std::size_t rows() const { return annotators.size(); }
  std::size_t cols() const { return columns.size(); }
  double at(std::size_t row, std::size_t col) const { return values[row * cols() + col]; }
  std::optional<std::size_t> column_index(const std::string& feature_id) const;
  std::optional<std::size_t> row_index(const std::string& annotator_id) const;
  // Throws Error("unknown-feature").
  std::vector<double> column(const std::string& feature_id) const;

  // Recomputes column_means / column_sds / zero_variance.
  void refresh_statistics();
  void append_column(const FeatureDescriptor& descriptor, const std::vector<double>& column_values);
};

// Example-level cells are per-annotator means over computable cells;
// word_overlap is computed per annotator. Annotators with no computable
// cell for some selected feature are left out with a warning.
TraceMatrix build_traces(const corpus::Corpus& corpus, const FeatureTable& features,
                         const std::vector<FeatureDescriptor>& selected);
TraceMatrix build_traces(const corpus::Corpus& corpus, const std::vector<FeatureDescriptor>& selected);

// --- first principal component ---------------------------------------------

struct PcaOptions {
  double tolerance = 1e-12;
  int max_iterations = 10000;
};

struct PcaResult {
  std::vector<std::string> feature_ids;  // columns kept, in matrix order
  std::vector<int> orientations;
  std::vector<double> loadings;          // unit norm, sum >= 0
  double eigenvalue = 0;
  std::vector<double> means;  // of oriented columns
  std::vector<double> sds;
  std::vector<std::string> dropped;  // zero-variance columns
  int iterations = 0;
  std::vector<std::string> warnings;
};

// Columns are multiplied by their orientation, standardized, and the top
// eigenvector of the sample covariance is found by power iteration.
// Throws Error("too-few-rows"), Error("too-few-columns"),
// Error("no-convergence").
PcaResult pca_first_component(const TraceMatrix& matrix, const PcaOptions& options = {});

// Throws Error("column-mismatch") when a fitted column is missing.
std::map<std::string, double> pca_project(const TraceMatrix& matrix, const PcaResult& pca);

// Adds the "pca" column (orientation +1, annotator-level).
void append_pca(TraceMatrix& matrix, const std::map<std::string, double>& scores);

}  // namespace htrace::heuristics
