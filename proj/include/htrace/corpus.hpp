#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace htrace::corpus {

inline constexpr int kOptionCount = 4;

// One collected multiple-choice item. Options are kept in the order the
// annotator typed them; correct_index refers to that order.
struct AnnotationExample {
  std::string example_id;
  std::string annotator_id;
  std::string passage;
  std::string question;
  std::vector<std::string> options;
  int correct_index = 0;
  std::optional<double> working_time_secs;
  std::optional<std::string> keystrokes;
  int sequence_index = 1;
  std::optional<int> entity_count;
  std::optional<bool> valid;
  std::optional<std::set<std::string>> qualitative_labels;

  bool operator==(const AnnotationExample&) const = default;
};

struct Corpus {
  std::vector<AnnotationExample> examples;
  std::map<std::string, std::string> metadata;

  bool operator==(const Corpus&) const = default;

  // Annotator ids in ascending order.
  std::vector<std::string> annotators() const;
  // Examples grouped per annotator, each group in corpus order.
  std::map<std::string, std::vector<const AnnotationExample*>> by_annotator() const;
  const AnnotationExample* find(const std::string& example_id) const;
};

struct PredictionSet {
  std::string model_id;
  std::map<std::string, int> entries;
  std::map<std::string, std::array<double, kOptionCount>> scores;
  std::vector<std::string> warnings;

  std::optional<int> predicted(const std::string& example_id) const;
};

enum class TestId { crt3, crt7, verbal };

std::string to_string(TestId id);
TestId parse_test_id(const std::string& text);
int item_count(TestId id);

struct SurveyResponse {
  std::string annotator_id;
  TestId test_id = TestId::crt7;
  std::vector<std::string> answers;
};

struct Issue {
  std::string example_id;
  std::string rule;
  std::string message;
};

struct ValidationReport {
  std::vector<Issue> errors;
  std::vector<Issue> warnings;

  bool ok() const { return errors.empty(); }
};

// Line-delimited JSON readers. Blank lines are skipped; line numbers in
// errors are 1-based physical lines.
Corpus parse_corpus(std::istream& in);
Corpus load_corpus(const std::filesystem::path& path);
void write_corpus(std::ostream& out, const Corpus& corpus);
void save_corpus(const std::filesystem::path& path, const Corpus& corpus);
std::string to_json_line(const AnnotationExample& example);

ValidationReport validate_corpus(const Corpus& corpus);
// Throws Error("invalid-corpus") when the report carries errors.
void require_valid(const ValidationReport& report);

Corpus filter_eligible(const Corpus& corpus, int min_examples = 5, bool drop_invalid = true);

PredictionSet parse_predictions(std::istream& in);
PredictionSet load_predictions(const std::filesystem::path& path);
void write_predictions(std::ostream& out, const PredictionSet& predictions);

std::vector<SurveyResponse> parse_surveys(std::istream& in);
std::vector<SurveyResponse> load_surveys(const std::filesystem::path& path);

}  // namespace htrace::corpus
