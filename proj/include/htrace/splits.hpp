#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "htrace/analysis.hpp"

namespace htrace::analysis {

enum class SplitKind { heuristic, random_annotator, random_pooled };
std::string to_string(SplitKind kind);

struct SplitBundle {
  SplitKind kind = SplitKind::heuristic;
  std::optional<std::uint64_t> seed;  // absent for the heuristic split
  std::vector<std::string> train;     // corpus order
  std::vector<std::string> test;      // corpus order
  std::size_t n_train = 0;
};

struct SplitSet {
  std::vector<SplitBundle> bundles;
  std::vector<std::string> warnings;
};

// Uniform integer in [0, bound) from a 64-bit engine by rejection, so the
// draws do not depend on the standard library's distribution code.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

// One heuristic bundle (train = H_k), then per seed a random-annotator and
// a random-pooled bundle with the same training size. Test is always the
// complement within `corpus`.
SplitSet make_splits(const corpus::Corpus& corpus, const TraceMatrix& traces, const std::string& feature_id,
                     double k = 33, const std::vector<std::uint64_t>& seeds = {1, 2, 3});

// Writes <dir>/<kind>[_seed<N>]/{train,test}.jsonl and <dir>/splits.json.
// Returns every path written.
std::vector<std::filesystem::path> write_splits(const std::filesystem::path& dir, const corpus::Corpus& corpus,
                                                const SplitSet& splits, const std::string& feature_id, double k);

}  // namespace htrace::analysis
