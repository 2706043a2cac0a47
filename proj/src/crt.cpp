#include "htrace/crt.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include <json.hpp>

#include "htrace/error.hpp"
#include "htrace/textops.hpp"

namespace htrace::analysis {
namespace {

using nlohmann::json;

CrtItem numeric(double value, std::vector<std::string> keywords = {}) { return {{value}, std::move(keywords)}; }
CrtItem phrases(std::vector<std::string> keywords, std::vector<double> numbers = {}) {
  return {std::move(numbers), std::move(keywords)};
}

std::optional<double> parse_number(std::string_view token) {
  double value = 0;
  auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || end != token.data() + token.size()) return std::nullopt;
  return value;
}

}  // namespace

std::vector<CrtKey> default_crt_keys() {
  CrtKey crt7{TestId::crt7,
              {
                  numeric(25),   // lamp
                  numeric(10),   // computers
                  numeric(99),   // lily pads
                  numeric(4),    // barrel
                  numeric(49),   // class size
                  numeric(200),  // sheep
                  phrases({"c", "less", "less money"}),
              }};
  CrtKey verbal{TestId::verbal,
                {
                    phrases({"angie"}),
                    phrases({"5th", "fifth", "5th place", "fifth place"}, {5}),
                    phrases({"not bury", "don't bury", "dont bury", "not buried", "nowhere", "alive"}),
                    phrases({"no banana", "no bananas", "none", "nobody", "no one", "neither"}),
                    phrases({"no stairs", "no staircase", "none", "one-storey", "one storey", "one story"}),
                    phrases({"no smoke", "none", "doesn't produce smoke", "does not produce smoke",
                             "don't produce smoke"}),
                    phrases({"match", "the match"}),
                    phrases({"not possible", "impossible", "dead", "can't", "cannot"}),
                    phrases({"yellow", "neither"}),
                }};
  return {crt7, verbal};
}

std::vector<CrtKey> parse_crt_keys(std::istream& in) {
  std::vector<CrtKey> keys;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = json::parse(line);
      CrtKey key;
      key.test_id = corpus::parse_test_id(j.at("test_id").get<std::string>());
      for (const auto& item : j.at("items")) {
        CrtItem it;
        if (item.contains("numbers")) it.numbers = item["numbers"].get<std::vector<double>>();
        if (item.contains("keywords")) it.keywords = item["keywords"].get<std::vector<std::string>>();
        key.items.push_back(std::move(it));
      }
      if (static_cast<int>(key.items.size()) != corpus::item_count(key.test_id)) {
        throw Error("count-mismatch", "line " + std::to_string(line_no) + ": key for " +
                                        corpus::to_string(key.test_id) + " has " +
                                        std::to_string(key.items.size()) + " items");
      }
      keys.push_back(std::move(key));
    } catch (const json::exception& e) {
      throw Error("malformed-line", "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return keys;
}

std::vector<CrtKey> load_crt_keys(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("unreadable-file", "cannot open " + path.string());
  return parse_crt_keys(in);
}

void write_crt_keys(std::ostream& out, std::span<const CrtKey> keys) {
  for (const auto& key : keys) {
    json j;
    j["test_id"] = corpus::to_string(key.test_id);
    j["items"] = json::array();
    for (const auto& item : key.items) {
      j["items"].push_back({{"numbers", item.numbers}, {"keywords", item.keywords}});
    }
    out << j.dump() << '\n';
  }
}

CrtKey key_for(std::span<const CrtKey> keys, TestId test_id) {
  for (const auto& k : keys) {
    if (k.test_id == test_id) return k;
  }
  if (test_id == TestId::crt3) {
    for (const auto& k : keys) {
      if (k.test_id == TestId::crt7) return CrtKey{TestId::crt3, {k.items.begin(), k.items.begin() + 3}};
    }
  }
  throw Error("missing-key", "no answer key for " + corpus::to_string(test_id));
}

std::string normalize_answer(std::string_view answer) {
  std::string out;
  for (std::size_t i = 0; i < answer.size(); ++i) {
    const char c = answer[i];
    if (c == '$' || c == ',') continue;
    if (answer.compare(i, 2, "\xC2\xA3") == 0) {  // pound sign
      ++i;
      continue;
    }
    if (answer.compare(i, 3, "\xE2\x82\xAC") == 0) {  // euro sign
      i += 2;
      continue;
    }
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  auto first = out.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  auto last = out.find_last_not_of(" \t\r\n");
  return out.substr(first, last - first + 1);
}

bool answer_matches(std::string_view answer, const CrtItem& item) {
  const auto tokens = text::tokenize(normalize_answer(answer));
  if (tokens.empty()) return false;
  if (!item.numbers.empty()) {
    for (const auto& t : tokens) {
      if (auto v = parse_number(t)) {
        for (double n : item.numbers) {
          if (std::fabs(*v - n) < 1e-9) return true;
        }
        break;  // only the first number counts
      }
    }
  }
  for (const auto& phrase : item.keywords) {
    auto needle = text::tokenize(normalize_answer(phrase));
    if (!needle.empty() && text::contains_contiguous(tokens, needle)) return true;
  }
  return false;
}

CrtScore score_crt(const corpus::SurveyResponse& response, const CrtKey& key) {
  if (response.test_id != key.test_id) {
    throw Error("test-mismatch", "response is " + corpus::to_string(response.test_id) + ", key is " +
                                     corpus::to_string(key.test_id));
  }
  if (response.answers.size() != key.items.size()) {
    throw Error("count-mismatch", "response has " + std::to_string(response.answers.size()) + " answers, key has " +
                                    std::to_string(key.items.size()) + " items");
  }
  CrtScore score;
  score.annotator_id = response.annotator_id;
  score.test_id = response.test_id;
  score.item_count = static_cast<int>(key.items.size());
  for (std::size_t i = 0; i < key.items.size(); ++i) {
    if (answer_matches(response.answers[i], key.items[i])) ++score.correct_count;
  }
  score.accuracy = static_cast<double>(score.correct_count) / score.item_count;
  return score;
}

corpus::SurveyResponse derive_crt3(const corpus::SurveyResponse& crt7_response) {
  if (crt7_response.test_id != TestId::crt7) {
    throw Error("test-mismatch", "crt3 is derived from crt7 responses only");
  }
  corpus::SurveyResponse r;
  r.annotator_id = crt7_response.annotator_id;
  r.test_id = TestId::crt3;
  r.answers.assign(crt7_response.answers.begin(), crt7_response.answers.begin() + 3);
  return r;
}

std::vector<CrtScore> score_surveys(std::span<const corpus::SurveyResponse> responses,
                                    std::span<const CrtKey> keys) {
  std::vector<CrtScore> scores;
  for (const auto& r : responses) {
    scores.push_back(score_crt(r, key_for(keys, r.test_id)));
    if (r.test_id == TestId::crt7) {
      auto r3 = derive_crt3(r);
      scores.push_back(score_crt(r3, key_for(keys, TestId::crt3)));
    }
  }
  return scores;
}

std::vector<CrtCorrelation> crt_trace_correlations(std::span<const CrtScore> scores, const TraceMatrix& traces) {
  std::map<TestId, std::map<std::string, double>> by_test;
  for (const auto& s : scores) by_test[s.test_id][s.annotator_id] = s.accuracy;

  std::vector<CrtCorrelation> out;
  for (const auto& d : traces.columns) {
    auto c = *traces.column_index(d.feature_id);
    for (const auto& [test, accuracies] : by_test) {
      CrtCorrelation cell;
      cell.feature_id = d.feature_id;
      cell.test_id = test;
      std::vector<double> xs, ys;
      for (std::size_t r = 0; r < traces.rows(); ++r) {
        auto it = accuracies.find(traces.annotators[r]);
        if (it == accuracies.end()) continue;
        xs.push_back(traces.at(r, c));
        ys.push_back(it->second);
      }
      try {
        if (xs.size() < 3) {
          throw Error("too-few-samples", std::to_string(xs.size()) + " annotator(s) have both a " +
                                             corpus::to_string(test) + " score and a trace");
        }
        cell.outcome.result = stats::pearson(xs, ys);
      } catch (const Error& e) {
        cell.outcome.error = e.what();
      }
      out.push_back(std::move(cell));
    }
  }
  return out;
}

}  // namespace htrace::analysis
