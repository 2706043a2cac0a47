#include "htrace/textops.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <stdexcept>
#include <unordered_set>

namespace htrace::text {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

std::string_view strip_punct(std::string_view piece) {
  while (!piece.empty() && is_punct(piece.front())) piece.remove_prefix(1);
  while (!piece.empty() && is_punct(piece.back())) piece.remove_suffix(1);
  return piece;
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }
bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

constexpr std::array<std::string_view, 10> kAbbreviations = {
    "mr", "mrs", "ms", "dr", "st", "no", "vs", "etc", "e.g", "i.e"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace

TokenSequence::TokenSequence(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (const auto& t : tokens_) {
    if (t.empty()) throw std::invalid_argument("TokenSequence: empty token");
  }
}

TokenSequence::TokenSequence(std::initializer_list<std::string> tokens)
    : TokenSequence(std::vector<std::string>(tokens)) {}

void TokenSequence::append(const TokenSequence& other) {
  tokens_.insert(tokens_.end(), other.tokens_.begin(), other.tokens_.end());
}

TokenSequence tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    auto piece = strip_punct(text.substr(start, i - start));
    if (!piece.empty()) tokens.push_back(lowercase(piece));
  }
  return TokenSequence(std::move(tokens));
}

bool is_abbreviation(std::string_view word) {
  auto w = lowercase(word);
  if (w.size() == 1 && std::isalpha(static_cast<unsigned char>(w[0]))) return true;
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), w) != kAbbreviations.end();
}

std::vector<SentenceSpan> split_sentences(std::string_view text) {
  std::vector<SentenceSpan> spans;
  auto emit = [&](std::string_view piece) {
    piece = trim(piece);
    if (piece.empty()) return;
    spans.push_back({std::string(piece), tokenize(piece), spans.size()});
  };

  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_terminator(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && is_terminator(text[j])) ++j;
    while (j < text.size() && is_closer(text[j])) ++j;
    bool boundary = j == text.size() || is_space(text[j]);
    if (boundary && text[i] == '.' && j == i + 1) {
      // Word ending at this period, without its own leading punctuation.
      std::size_t w = i;
      while (w > start && !is_space(text[w - 1])) --w;
      auto word = text.substr(w, i - w);
      while (!word.empty() && is_punct(word.front())) word.remove_prefix(1);
      if (!word.empty() && is_abbreviation(word)) boundary = false;
    }
    if (boundary) {
      emit(text.substr(start, j - start));
      start = j;
    }
    i = j;
  }
  emit(text.substr(start));
  return spans;
}

std::size_t lcs_len(const TokenSequence& a, const TokenSequence& b) {
  const auto& outer = a.size() >= b.size() ? a : b;
  const auto& inner = a.size() >= b.size() ? b : a;
  std::vector<std::size_t> prev(inner.size() + 1, 0), cur(inner.size() + 1, 0);
  for (std::size_t i = 1; i <= outer.size(); ++i) {
    for (std::size_t j = 1; j <= inner.size(); ++j) {
      cur[j] = outer[i - 1] == inner[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[inner.size()];
}

bool contains_contiguous(const TokenSequence& haystack, const TokenSequence& needle) {
  if (needle.empty()) throw std::invalid_argument("contains_contiguous: empty needle");
  return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) !=
         haystack.end();
}

double jaccard(const TokenSequence& a, const TokenSequence& b) {
  if (a.empty() && b.empty()) throw std::invalid_argument("jaccard: both sequences empty");
  std::unordered_set<std::string> sa(a.begin(), a.end());
  std::unordered_set<std::string> sb(b.begin(), b.end());
  std::size_t common = 0;
  for (const auto& t : sa) common += sb.count(t);
  const std::size_t uni = sa.size() + sb.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

}  // namespace htrace::text
