#include "htrace/corpus.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "htrace/error.hpp"
#include "htrace/textops.hpp"

namespace htrace::corpus {
namespace {

using nlohmann::json;

constexpr int kMinPassageTokens = 50;
constexpr int kMaxPassageTokens = 250;

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("unreadable-file", "cannot open " + path.string());
  return in;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

[[noreturn]] void malformed(std::size_t line_no, const std::string& why) {
  throw Error("malformed-line", "line " + std::to_string(line_no) + ": " + why);
}

json parse_line(const std::string& line, std::size_t line_no) {
  try {
    auto j = json::parse(line);
    if (!j.is_object()) malformed(line_no, "record is not a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    malformed(line_no, e.what());
  }
}

template <typename T>
T required(const json& j, const char* key, std::size_t line_no) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) malformed(line_no, std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    malformed(line_no, std::string("field '") + key + "' has the wrong type");
  }
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* key, std::size_t line_no) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    malformed(line_no, std::string("field '") + key + "' has the wrong type");
  }
}

AnnotationExample example_from_json(const json& j, std::size_t line_no) {
  AnnotationExample e;
  e.example_id = required<std::string>(j, "example_id", line_no);
  e.annotator_id = required<std::string>(j, "annotator_id", line_no);
  e.passage = required<std::string>(j, "passage", line_no);
  e.question = required<std::string>(j, "question", line_no);
  e.options = required<std::vector<std::string>>(j, "options", line_no);
  e.correct_index = required<int>(j, "correct_index", line_no);
  e.sequence_index = required<int>(j, "sequence_index", line_no);
  e.working_time_secs = optional_field<double>(j, "working_time_secs", line_no);
  e.keystrokes = optional_field<std::string>(j, "keystrokes", line_no);
  e.entity_count = optional_field<int>(j, "entity_count", line_no);
  e.valid = optional_field<bool>(j, "valid", line_no);
  if (auto labels = optional_field<std::vector<std::string>>(j, "qualitative_labels", line_no)) {
    e.qualitative_labels = std::set<std::string>(labels->begin(), labels->end());
  }
  if (e.entity_count && *e.entity_count < 0) malformed(line_no, "entity_count is negative");
  return e;
}

json example_to_json(const AnnotationExample& e) {
  json j;
  j["example_id"] = e.example_id;
  j["annotator_id"] = e.annotator_id;
  j["passage"] = e.passage;
  j["question"] = e.question;
  j["options"] = e.options;
  j["correct_index"] = e.correct_index;
  j["sequence_index"] = e.sequence_index;
  if (e.working_time_secs) j["working_time_secs"] = *e.working_time_secs;
  if (e.keystrokes) j["keystrokes"] = *e.keystrokes;
  if (e.entity_count) j["entity_count"] = *e.entity_count;
  if (e.valid) j["valid"] = *e.valid;
  if (e.qualitative_labels) {
    j["qualitative_labels"] =
        std::vector<std::string>(e.qualitative_labels->begin(), e.qualitative_labels->end());
  }
  return j;
}

}  // namespace

std::vector<std::string> Corpus::annotators() const {
  std::vector<std::string> ids;
  for (const auto& [id, _] : by_annotator()) ids.push_back(id);
  return ids;
}

std::map<std::string, std::vector<const AnnotationExample*>> Corpus::by_annotator() const {
  std::map<std::string, std::vector<const AnnotationExample*>> groups;
  for (const auto& e : examples) groups[e.annotator_id].push_back(&e);
  return groups;
}

const AnnotationExample* Corpus::find(const std::string& example_id) const {
  for (const auto& e : examples) {
    if (e.example_id == example_id) return &e;
  }
  return nullptr;
}

std::optional<int> PredictionSet::predicted(const std::string& example_id) const {
  auto it = entries.find(example_id);
  if (it == entries.end()) return std::nullopt;
  return it->second;
}

std::string to_string(TestId id) {
  switch (id) {
    case TestId::crt3: return "crt3";
    case TestId::crt7: return "crt7";
    case TestId::verbal: return "verbal";
  }
  return "?";
}

TestId parse_test_id(const std::string& text) {
  if (text == "crt3") return TestId::crt3;
  if (text == "crt7") return TestId::crt7;
  if (text == "verbal") return TestId::verbal;
  throw Error("unknown-test-id", "unknown test_id '" + text + "'");
}

int item_count(TestId id) {
  switch (id) {
    case TestId::crt3: return 3;
    case TestId::crt7: return 7;
    case TestId::verbal: return 9;
  }
  return 0;
}

Corpus parse_corpus(std::istream& in) {
  Corpus corpus;
  std::map<std::string, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    auto example = example_from_json(parse_line(line, line_no), line_no);
    auto [it, inserted] = seen.emplace(example.example_id, line_no);
    if (!inserted) {
      throw Error("duplicate-id", "example_id '" + example.example_id + "' on lines " +
                                      std::to_string(it->second) + " and " +
                                      std::to_string(line_no));
    }
    corpus.examples.push_back(std::move(example));
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_corpus(in);
}

std::string to_json_line(const AnnotationExample& example) {
  return example_to_json(example).dump();
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& e : corpus.examples) out << to_json_line(e) << '\n';
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("unwritable-file", "cannot write " + path.string());
  write_corpus(out, corpus);
}

ValidationReport validate_corpus(const Corpus& corpus) {
  ValidationReport report;
  auto error = [&](const AnnotationExample& e, std::string rule, std::string msg) {
    report.errors.push_back({e.example_id, std::move(rule), std::move(msg)});
  };
  auto warn = [&](const AnnotationExample& e, std::string rule, std::string msg) {
    report.warnings.push_back({e.example_id, std::move(rule), std::move(msg)});
  };

  std::set<std::string> ids;
  std::set<std::pair<std::string, int>> sequence_slots;
  for (const auto& e : corpus.examples) {
    if (!ids.insert(e.example_id).second) error(e, "duplicate-id", "example_id repeated");
    if (static_cast<int>(e.options.size()) != kOptionCount) {
      error(e, "options-count",
            "expected 4 options, found " + std::to_string(e.options.size()));
    }
    for (std::size_t i = 0; i < e.options.size(); ++i) {
      if (e.options[i].empty()) error(e, "option-empty", "option " + std::to_string(i) + " is empty");
    }
    if (e.correct_index < 0 || e.correct_index >= kOptionCount) {
      error(e, "correct-index", "correct_index " + std::to_string(e.correct_index) + " outside [0,3]");
    }
    if (e.working_time_secs && !(*e.working_time_secs > 0.0)) {
      error(e, "working-time", "working_time_secs must be positive");
    }
    if (e.sequence_index < 1) {
      error(e, "sequence-index", "sequence_index must be >= 1");
    } else if (!sequence_slots.emplace(e.annotator_id, e.sequence_index).second) {
      error(e, "sequence-index",
            "sequence_index " + std::to_string(e.sequence_index) + " repeated for annotator " +
                e.annotator_id);
    }

    const auto passage_tokens = static_cast<int>(text::tokenize(e.passage).size());
    if (passage_tokens < kMinPassageTokens || passage_tokens > kMaxPassageTokens) {
      warn(e, "passage-length",
           "passage has " + std::to_string(passage_tokens) + " tokens, outside [50, 250]");
    }
    if (!e.keystrokes || e.keystrokes->empty()) {
      warn(e, "keystrokes-empty", "no keystrokes logged");
    }
  }
  return report;
}

void require_valid(const ValidationReport& report) {
  if (report.ok()) return;
  const auto& first = report.errors.front();
  throw Error("invalid-corpus", std::to_string(report.errors.size()) + " validation error(s); first: " +
                                    first.example_id + " " + first.rule + ": " + first.message);
}

Corpus filter_eligible(const Corpus& corpus, int min_examples, bool drop_invalid) {
  Corpus kept;
  kept.metadata = corpus.metadata;
  std::map<std::string, int> counts;
  for (const auto& e : corpus.examples) {
    if (drop_invalid && e.valid.has_value() && !*e.valid) continue;
    kept.examples.push_back(e);
    ++counts[e.annotator_id];
  }
  std::erase_if(kept.examples,
                [&](const AnnotationExample& e) { return counts[e.annotator_id] < min_examples; });
  return kept;
}

PredictionSet parse_predictions(std::istream& in) {
  PredictionSet set;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    auto j = parse_line(line, line_no);
    auto id = required<std::string>(j, "example_id", line_no);
    auto model = required<std::string>(j, "model_id", line_no);
    auto index = required<int>(j, "predicted_index", line_no);
    if (index < 0 || index >= kOptionCount) {
      throw Error("prediction-range", "line " + std::to_string(line_no) + ": predicted_index " +
                                          std::to_string(index) + " outside [0,3]");
    }
    if (set.model_id.empty()) {
      set.model_id = model;
    } else if (model != set.model_id) {
      throw Error("model-id-mismatch", "line " + std::to_string(line_no) + ": model_id '" + model +
                                           "' differs from '" + set.model_id + "'");
    }
    if (set.entries.count(id)) {
      set.warnings.push_back("line " + std::to_string(line_no) + ": duplicate example_id '" + id +
                             "', later entry wins");
    }
    set.entries[id] = index;
    if (auto scores = optional_field<std::vector<double>>(j, "scores", line_no)) {
      if (static_cast<int>(scores->size()) != kOptionCount) {
        malformed(line_no, "scores must have 4 entries");
      }
      std::array<double, kOptionCount> s{};
      std::copy(scores->begin(), scores->end(), s.begin());
      set.scores[id] = s;
    } else {
      set.scores.erase(id);
    }
  }
  return set;
}

PredictionSet load_predictions(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_predictions(in);
}

void write_predictions(std::ostream& out, const PredictionSet& predictions) {
  for (const auto& [id, index] : predictions.entries) {
    json j;
    j["example_id"] = id;
    j["model_id"] = predictions.model_id;
    j["predicted_index"] = index;
    if (auto it = predictions.scores.find(id); it != predictions.scores.end()) {
      j["scores"] = std::vector<double>(it->second.begin(), it->second.end());
    }
    out << j.dump() << '\n';
  }
}

std::vector<SurveyResponse> parse_surveys(std::istream& in) {
  std::vector<SurveyResponse> responses;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    auto j = parse_line(line, line_no);
    SurveyResponse r;
    r.annotator_id = required<std::string>(j, "annotator_id", line_no);
    r.test_id = parse_test_id(required<std::string>(j, "test_id", line_no));
    r.answers = required<std::vector<std::string>>(j, "answers", line_no);
    if (static_cast<int>(r.answers.size()) != item_count(r.test_id)) {
      throw Error("count-mismatch", "line " + std::to_string(line_no) + ": " + to_string(r.test_id) +
                                      " expects " + std::to_string(item_count(r.test_id)) +
                                      " answers, found " + std::to_string(r.answers.size()));
    }
    responses.push_back(std::move(r));
  }
  return responses;
}

std::vector<SurveyResponse> load_surveys(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_surveys(in);
}

}  // namespace htrace::corpus
