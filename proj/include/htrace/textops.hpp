#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace htrace::text {

// Normalized tokens: lowercase ASCII, leading/trailing punctuation stripped,
// never empty.
class TokenSequence {
 public:
  TokenSequence() = default;
  // Throws std::invalid_argument on an empty token.
  explicit TokenSequence(std::vector<std::string> tokens);
  TokenSequence(std::initializer_list<std::string> tokens);

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  const std::string& operator[](std::size_t i) const { return tokens_[i]; }
  auto begin() const noexcept { return tokens_.begin(); }
  auto end() const noexcept { return tokens_.end(); }

  void append(const TokenSequence& other);

  bool operator==(const TokenSequence&) const = default;

 private:
  std::vector<std::string> tokens_;
};

struct SentenceSpan {
  std::string text;
  TokenSequence tokens;
  std::size_t position = 0;
};

TokenSequence tokenize(std::string_view text);

// Splits on . ! ? followed by whitespace or end of text (closing quotes and
// brackets may sit in between). A period after a listed abbreviation or a
// single letter does not end a sentence.
std::vector<SentenceSpan> split_sentences(std::string_view text);

bool is_abbreviation(std::string_view word);

std::size_t lcs_len(const TokenSequence& a, const TokenSequence& b);

// Throws std::invalid_argument for an empty needle.
bool contains_contiguous(const TokenSequence& haystack, const TokenSequence& needle);

// Jaccard index over unique tokens. Throws std::invalid_argument when both
// sequences are empty.
double jaccard(const TokenSequence& a, const TokenSequence& b);

}  // namespace htrace::text
