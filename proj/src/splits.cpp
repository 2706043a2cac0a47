#include "htrace/splits.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "htrace/error.hpp"

namespace htrace::analysis {
namespace {

template <typename T>
void shuffle(std::vector<T>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[uniform_below(rng, i)]);
  }
}

SplitBundle bundle_from_train(const corpus::Corpus& corpus, SplitKind kind, std::optional<std::uint64_t> seed,
                              const std::set<std::string>& train_ids) {
  SplitBundle b;
  b.kind = kind;
  b.seed = seed;
  for (const auto& e : corpus.examples) {
    (train_ids.count(e.example_id) ? b.train : b.test).push_back(e.example_id);
  }
  b.n_train = b.train.size();
  return b;
}

}  // namespace

std::string to_string(SplitKind kind) {
  switch (kind) {
    case SplitKind::heuristic: return "heuristic";
    case SplitKind::random_annotator: return "random_annotator";
    case SplitKind::random_pooled: return "random_pooled";
  }
  return "?";
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_below: zero bound");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x = 0;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

SplitSet make_splits(const corpus::Corpus& corpus, const TraceMatrix& traces, const std::string& feature_id,
                     double k, const std::vector<std::uint64_t>& seeds) {
  SplitSet out;
  auto subset = heuristic_subset(corpus, traces, feature_id, k);
  const auto n_train = subset.member_examples.size();
  if (n_train == 0) throw Error("empty-group", "heuristic subset has no examples");
  if (n_train > corpus.examples.size()) throw Error("split-size", "training size exceeds corpus size");
  out.bundles.push_back(bundle_from_train(corpus, SplitKind::heuristic, std::nullopt, subset.member_examples));

  auto groups = corpus.by_annotator();
  std::set<std::uint64_t> seen;
  for (auto seed : seeds) {
    if (!seen.insert(seed).second) {
      out.warnings.push_back("seed " + std::to_string(seed) + " repeated; its bundles are identical");
    }

    // Whole annotators until the budget is met; the last one is truncated.
    std::mt19937_64 rng(seed);
    std::vector<std::string> annotators;
    for (const auto& [a, _] : groups) annotators.push_back(a);
    shuffle(annotators, rng);
    std::set<std::string> train;
    for (const auto& a : annotators) {
      if (train.size() >= n_train) break;
      std::vector<std::string> ids;
      for (const auto* e : groups[a]) ids.push_back(e->example_id);
      const auto need = n_train - train.size();
      if (ids.size() > need) {
        shuffle(ids, rng);
        ids.resize(need);
      }
      train.insert(ids.begin(), ids.end());
    }
    out.bundles.push_back(bundle_from_train(corpus, SplitKind::random_annotator, seed, train));

    // Uniform sample of examples, independent stream per seed.
    std::mt19937_64 pooled_rng(seed ^ 0x5851f42d4c957f2dULL);
    std::vector<std::string> all;
    for (const auto& e : corpus.examples) all.push_back(e.example_id);
    shuffle(all, pooled_rng);
    all.resize(n_train);
    out.bundles.push_back(bundle_from_train(corpus, SplitKind::random_pooled, seed, {all.begin(), all.end()}));
  }
  return out;
}

std::vector<std::filesystem::path> write_splits(const std::filesystem::path& dir, const corpus::Corpus& corpus,
                                                const SplitSet& splits, const std::string& feature_id, double k) {
  std::map<std::string, const corpus::AnnotationExample*> by_id;
  for (const auto& e : corpus.examples) by_id[e.example_id] = &e;

  std::vector<std::filesystem::path> written;
  nlohmann::json manifest;
  manifest["feature_id"] = feature_id;
  manifest["k"] = k;
  manifest["bundles"] = nlohmann::json::array();
  std::filesystem::create_directories(dir);
  for (const auto& b : splits.bundles) {
    std::string name = to_string(b.kind);
    if (b.seed) name += "_seed" + std::to_string(*b.seed);
    const auto sub = dir / name;
    std::filesystem::create_directories(sub);
    for (const auto& [file, ids] : {std::pair{"train.jsonl", &b.train}, std::pair{"test.jsonl", &b.test}}) {
      corpus::Corpus part;
      for (const auto& id : *ids) part.examples.push_back(*by_id.at(id));
      corpus::save_corpus(sub / file, part);
      written.push_back(sub / file);
    }
    nlohmann::json entry;
    entry["kind"] = to_string(b.kind);
    entry["seed"] = b.seed ? nlohmann::json(*b.seed) : nlohmann::json(nullptr);
    entry["n_train"] = b.n_train;
    entry["n_test"] = b.test.size();
    entry["train"] = (std::filesystem::path(name) / "train.jsonl").generic_string();
    entry["test"] = (std::filesystem::path(name) / "test.jsonl").generic_string();
    manifest["bundles"].push_back(entry);
  }
  manifest["warnings"] = splits.warnings;
  const auto manifest_path = dir / "splits.json";
  std::ofstream out(manifest_path, std::ios::binary);
  if (!out) throw Error("unwritable-file", "cannot write " + manifest_path.string());
  out << manifest.dump(2) << '\n';
  written.push_back(manifest_path);
  return written;
}

}  // namespace htrace::analysis
