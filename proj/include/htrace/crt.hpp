#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "htrace/analysis.hpp"
#include "htrace/corpus.hpp"

namespace htrace::analysis {

using corpus::TestId;

// Accepted answers for one item: numeric values (compared against the first
// number in the answer) and keyword phrases (matched as contiguous tokens).
struct CrtItem {
  std::vector<double> numbers;
  std::vector<std::string> keywords;

  bool operator==(const CrtItem&) const = default;
};

struct CrtKey {
  TestId test_id = TestId::crt7;
  std::vector<CrtItem> items;

  bool operator==(const CrtKey&) const = default;
};

struct CrtScore {
  std::string annotator_id;
  TestId test_id = TestId::crt7;
  int correct_count = 0;
  int item_count = 0;
  double accuracy = 0;
};

// Keys for crt7 and verbal; crt3 is the first three crt7 items.
std::vector<CrtKey> default_crt_keys();
std::vector<CrtKey> parse_crt_keys(std::istream& in);
std::vector<CrtKey> load_crt_keys(const std::filesystem::path& path);
void write_crt_keys(std::ostream& out, std::span<const CrtKey> keys);
// Looks up the key, deriving crt3 from crt7 when absent. Throws
// Error("missing-key").
CrtKey key_for(std::span<const CrtKey> keys, TestId test_id);

// Trimmed, lowercased, currency symbols and commas removed.
std::string normalize_answer(std::string_view answer);
bool answer_matches(std::string_view answer, const CrtItem& item);

// Throws Error("test-mismatch").
CrtScore score_crt(const corpus::SurveyResponse& response, const CrtKey& key);

corpus::SurveyResponse derive_crt3(const corpus::SurveyResponse& crt7_response);

// Scores every response; each crt7 response also yields a crt3 score.
std::vector<CrtScore> score_surveys(std::span<const corpus::SurveyResponse> responses,
                                    std::span<const CrtKey> keys);

struct CrtCorrelation {
  std::string feature_id;
  TestId test_id = TestId::crt7;
  CorrelationOutcome outcome;
};

// Per (trace column, test present in scores): Pearson of the raw trace
// value against CRT accuracy over annotators present in both.
std::vector<CrtCorrelation> crt_trace_correlations(std::span<const CrtScore> scores, const TraceMatrix& traces);

}  // namespace htrace::analysis
