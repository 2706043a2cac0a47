#include "fixture.hpp"

#include <fstream>
#include <sstream>

#include "crt_responses.hpp"
#include "htrace/crt.hpp"
#include "htrace/heuristics.hpp"
#include "synthetic.hpp"

namespace htrace::testing {
namespace fs = std::filesystem;

namespace {

void write(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

FixtureFiles write_fixture(const fs::path& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  FixtureFiles f;
  f.dir = dir;
  f.corpus = dir / "corpus.jsonl";
  f.predictions = dir / "pred_copy.jsonl";
  f.predictions_alt = dir / "pred_first.jsonl";
  f.embeddings = dir / "vectors.txt";
  f.surveys = dir / "surveys.jsonl";
  f.keys = dir / "keys.jsonl";
  f.config = dir / "config.toml";

  auto c = synthetic_corpus({.annotators = 12, .examples_per_annotator = 6, .copiers = 3, .seed = 99});
  std::ostringstream corpus_text;
  corpus::write_corpus(corpus_text, c);
  write(f.corpus, corpus_text.str());

  auto copy = scripted_predictions(c, "copy_probe", [](const corpus::AnnotationExample& e) {
    return heuristics::copying_features(e)[2] > 0.8;
  });
  auto first = scripted_predictions(c, "first_probe", [](const corpus::AnnotationExample& e) {
    return e.correct_index == 0 || e.sequence_index % 3 == 0;
  });
  std::ostringstream p1, p2;
  corpus::write_predictions(p1, copy);
  corpus::write_predictions(p2, first);
  write(f.predictions, p1.str());
  write(f.predictions_alt, p2.str());

  write(f.embeddings, synthetic_embeddings(8, 5));

  std::ostringstream surveys;
  const auto annotators = c.annotators();
  for (std::size_t i = 0; i < annotators.size(); ++i) {
    std::vector<std::string> crt7, verbal;
    for (std::size_t q = 0; q < kCrt7Correct.size(); ++q) {
      crt7.push_back((i + q) % 3 == 0 ? kCrt7Intuitive[q] : kCrt7Correct[q]);
    }
    for (std::size_t q = 0; q < kVerbalCorrect.size(); ++q) {
      verbal.push_back((i * q) % 4 == 1 ? kVerbalIntuitive[q] : kVerbalCorrect[q]);
    }
    surveys << "{\"annotator_id\":\"" << annotators[i] << "\",\"test_id\":\"crt7\",\"answers\":[";
    for (std::size_t q = 0; q < crt7.size(); ++q) surveys << (q ? "," : "") << '"' << crt7[q] << '"';
    surveys << "]}\n";
    surveys << "{\"annotator_id\":\"" << annotators[i] << "\",\"test_id\":\"verbal\",\"answers\":[";
    for (std::size_t q = 0; q < verbal.size(); ++q) surveys << (q ? "," : "") << '"' << verbal[q] << '"';
    surveys << "]}\n";
  }
  write(f.surveys, surveys.str());

  std::ostringstream keys;
  const auto defaults = analysis::default_crt_keys();
  analysis::write_crt_keys(keys, defaults);
  write(f.keys, keys.str());

  write(f.config, "[traces]\nmin-examples = 6\n");
  return f;
}

std::vector<std::vector<std::string>> fixture_invocations(const FixtureFiles& f, const fs::path& out_dir) {
  const std::string corpus = f.corpus.string();
  const std::string out = out_dir.string();
  const std::string model = (out_dir / "overlap_model.txt").string();
  return {
      {"validate", "--corpus", corpus, "--out-dir", out},
      {"featurize", "--corpus", corpus, "--out-dir", out},
      {"traces", "--corpus", corpus, "--out-dir", out, "--features", "all"},
      {"pca", "--corpus", corpus, "--out-dir", out},
      {"subsets", "--corpus", corpus, "--out-dir", out, "--feature", "copying_3", "--k", "25"},
      {"precision-curve", "--corpus", corpus, "--out-dir", out, "--feature", "copying_3", "--predictions",
       f.predictions.string(), "--predictions", f.predictions_alt.string(), "--svg",
       (out_dir / "precision.svg").string()},
      {"correlate", "--corpus", corpus, "--out-dir", out, "--predictions", f.predictions.string()},
      {"influencers", "--corpus", corpus, "--out-dir", out},
      {"splits", "--corpus", corpus, "--out-dir", out, "--feature", "pca", "--seeds", "1,2"},
      {"overlap-train", "--train", corpus, "--out-dir", out, "--embeddings", f.embeddings.string()},
      {"overlap-predict", "--corpus", corpus, "--out-dir", out, "--model", model, "--embeddings",
       f.embeddings.string()},
      {"crt-score", "--surveys", f.surveys.string(), "--out-dir", out, "--keys", f.keys.string()},
      {"crt-correlate", "--corpus", corpus, "--out-dir", out, "--surveys", f.surveys.string()},
      {"qualitative-diff", "--corpus", corpus, "--out-dir", out, "--feature", "copying_3"},
  };
}

}  // namespace htrace::testing
