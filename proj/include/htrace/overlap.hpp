#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "htrace/corpus.hpp"
#include "htrace/parallel.hpp"
#include "htrace/textops.hpp"

namespace htrace::overlap {

inline constexpr std::size_t kFeatureCount = 6;
using FeatureRow = std::array<double, kFeatureCount>;

// Word vectors keyed by normalized token. Norms are cached for cosine
// distance.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dimension) : dimension_(dimension) {}

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return vectors_.size(); }

  // Returns false, keeping the existing vector, when the token is present.
  // Throws Error("dimension-mismatch") on a vector of the wrong length.
  bool insert(const std::string& token, std::vector<double> vector);

  // Unit-length vector, or nullptr for unknown and zero-norm tokens.
  const std::vector<double>* unit(const std::string& token) const;
  const std::vector<double>* raw(const std::string& token) const;

  std::vector<std::string> warnings;

 private:
  struct Entry {
    std::vector<double> raw;
    std::vector<double> unit;  // empty for zero-norm vectors
  };
  std::size_t dimension_ = 0;
  std::unordered_map<std::string, Entry> vectors_;
};

// `token v1 ... vD` per line with an optional `count D` header line.
EmbeddingTable parse_embeddings(std::istream& in);
EmbeddingTable load_embeddings(const std::filesystem::path& path);

struct OverlapFeatureVector {
  double subsequence = 0;        // option occurs contiguously in the context
  double all_words = 0;          // every option token occurs in the context
  double coverage = 0;           // fraction of option tokens in the context
  double log_length_diff = 0;    // ln(1 + |len(context) - len(option)|)
  double mean_min_distance = 0;  // over option tokens, nearest context token
  double max_min_distance = 0;

  FeatureRow as_row() const {
    return {subsequence, all_words, coverage, log_length_diff, mean_min_distance, max_min_distance};
  }
};

// Context (passage tokens followed by question tokens) prepared once and
// reused for all options of an example.
class OverlapContext {
 public:
  OverlapContext(const std::string& passage, const std::string& question, const EmbeddingTable& table);

  // Throws Error("empty-option") if the option has no tokens.
  OverlapFeatureVector features(const std::string& option) const;

 private:
  const EmbeddingTable* table_;
  text::TokenSequence tokens_;
  std::unordered_map<std::string, bool> vocabulary_;  // token -> has a unit vector
  std::vector<const std::vector<double>*> unit_vectors_;
};

OverlapFeatureVector overlap_features(const std::string& passage, const std::string& question,
                                      const std::string& option, const EmbeddingTable& table);

// Four instances per example, label 1 for the correct option.
struct Dataset {
  std::vector<FeatureRow> rows;
  std::vector<double> labels;
};

Dataset extract_instances(const corpus::Corpus& corpus, const EmbeddingTable& table,
                          Execution mode = Execution::parallel);

// Mean binary cross-entropy over standardized rows plus
// ||w||^2 / (2 C N); the bias is not penalized. Parameters are the
// kFeatureCount weights followed by the bias.
class RegularizedLogLoss {
 public:
  RegularizedLogLoss(std::span<const FeatureRow> standardized_rows, std::span<const double> labels, double C);

  double value(std::span<const double> params) const;
  std::vector<double> gradient(std::span<const double> params) const;
  std::size_t size() const { return rows_.size(); }

 private:
  std::span<const FeatureRow> rows_;
  std::span<const double> labels_;
  double C_;
};

struct TrainingOptions {
  double C = 100;
  int max_iterations = 100;
  double gradient_tolerance = 1e-8;
};

struct LogisticModel {
  FeatureRow means{};
  FeatureRow sds{};
  FeatureRow weights{};
  double bias = 0;
  double C = 100;
  int iterations = 0;
  double final_loss = 0;
  double gradient_norm = 0;
  std::vector<double> loss_history;  // loss after each accepted step, starting point first

  FeatureRow standardize(const FeatureRow& row) const;
  double probability(const FeatureRow& row) const;
};

// Full-batch gradient descent with backtracking line search. Starts from
// zero weights and the bias at the log-odds of the label base rate.
// Throws Error("degenerate-labels") if only one class is present.
LogisticModel train_logistic(const Dataset& data, const TrainingOptions& options = {});
LogisticModel train_overlap_model(const corpus::Corpus& corpus, const EmbeddingTable& table,
                                  const TrainingOptions& options = {});

struct ModelPrediction {
  std::string example_id;
  std::array<double, corpus::kOptionCount> probabilities{};
  int predicted_index = 0;
};

// First index of the maximum.
int argmax_lowest(std::span<const double> values);

ModelPrediction predict_overlap(const LogisticModel& model, const corpus::AnnotationExample& example,
                                const EmbeddingTable& table);

corpus::PredictionSet export_predictions(const LogisticModel& model, const corpus::Corpus& corpus,
                                         const EmbeddingTable& table, Execution mode = Execution::parallel);

void write_model(std::ostream& out, const LogisticModel& model);
LogisticModel read_model(std::istream& in);
void save_model(const std::filesystem::path& path, const LogisticModel& model);
LogisticModel load_model(const std::filesystem::path& path);

}  // namespace htrace::overlap
