// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Usage: acceptance <scratch-dir>

#include <Eigen/Dense>
#include <boost/math/special_functions/beta.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "crt_responses.hpp"
#include "fixture.hpp"
#include "htrace/analysis.hpp"
#include "htrace/cli.hpp"
#include "htrace/crt.hpp"
#include "htrace/heuristics.hpp"
#include "htrace/overlap.hpp"
#include "htrace/splits.hpp"
#include "htrace/stats.hpp"
#include "htrace/textops.hpp"
#include "separable.hpp"
#include "synthetic.hpp"

namespace fs = std::filesystem;
using namespace htrace;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

// --- 1 -----------------------------------------------------------------------

int lcs_oracle(const std::vector<int>& a, std::size_t i, const std::vector<int>& b, std::size_t j) {
  if (i == a.size() || j == b.size()) return 0;
  if (a[i] == b[j]) return 1 + lcs_oracle(a, i + 1, b, j + 1);
  return std::max(lcs_oracle(a, i + 1, b, j), lcs_oracle(a, i, b, j + 1));
}

Verdict lcs_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<std::string> symbols{"a", "b", "c"};
  std::vector<std::vector<int>> codes{{}};
  for (std::size_t lo = 0, len = 1; len <= 6; ++len) {
    const std::size_t hi = codes.size();
    for (std::size_t i = lo; i < hi; ++i) {
      for (int s = 0; s < 3; ++s) {
        auto next = codes[i];
        next.push_back(s);
        codes.push_back(next);
      }
    }
    lo = hi;
  }
  std::vector<text::TokenSequence> seqs;
  for (const auto& c : codes) {
    std::vector<std::string> tokens;
    for (int s : c) tokens.push_back(symbols[s]);
    seqs.emplace_back(tokens);
  }
  Verdict v;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < seqs.size() && v.pass; ++i) {
    for (std::size_t j = 0; j < seqs.size(); ++j) {
      ++pairs;
      if (text::lcs_len(seqs[i], seqs[j]) != static_cast<std::size_t>(lcs_oracle(codes[i], 0, codes[j], 0))) {
        v.require(false, "mismatch at pair " + std::to_string(i) + "," + std::to_string(j));
        break;
      }
    }
  }
  const double elapsed = seconds_since(start);
  v.require(elapsed < 10, "took " + fmt(elapsed) + " s");
  if (v.pass) v.detail = std::to_string(pairs) + " pairs in " + fmt(elapsed) + " s";
  return v;
}

// --- 2 -----------------------------------------------------------------------

Verdict pearson_correctness() {
  Verdict v;
  std::vector<double> x3{1, 2, 3}, up{2, 4, 6}, down{6, 4, 2}, x4{1, 2, 3, 4}, y4{1, 3, 2, 4};
  v.require(std::abs(stats::pearson(x3, up).r - 1.0) < 1e-12, "r(x, 2x) != 1");
  v.require(std::abs(stats::pearson(x3, down).r + 1.0) < 1e-12, "r(x, -x) != -1");
  v.require(std::abs(stats::pearson(x4, y4).r - 0.8) < 1e-12, "r != 0.8");
  double worst = 0;
  for (std::size_t n : {5u, 10u, 30u}) {
    for (double r : {0.0, 0.3, -0.3, 0.9, -0.9}) {
      const double df = static_cast<double>(n) - 2;
      const double reference = boost::math::ibeta(df / 2, 0.5, 1 - r * r);
      worst = std::max(worst, std::abs(stats::pearson_p_value(r, n) - reference));
    }
  }
  v.require(worst < 1e-9, "p-value error " + fmt(worst));
  if (v.pass) v.detail = "max p-value error " + fmt(worst);
  return v;
}

// --- 3 -----------------------------------------------------------------------

Verdict pca_eigen_equation() {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal;
  const std::vector<std::string> ids{"lowtime_4", "loweffort_4", "first_option", "serial_position", "copying_3"};
  Verdict v;
  double worst_residual = 0, worst_lambda = 0;
  for (int trial = 0; trial < 50; ++trial) {
    heuristics::TraceMatrix m;
    for (int r = 0; r < 20; ++r) m.annotators.push_back("a" + std::to_string(100 + r));
    m.example_counts.assign(20, 1);
    for (const auto& id : ids) m.columns.push_back(heuristics::find_feature(id));
    Eigen::MatrixXd z(20, 5);
    for (int r = 0; r < 20; ++r) {
      const double shared = normal(rng);
      for (int c = 0; c < 5; ++c) {
        z(r, c) = (c % 2 ? shared : -shared) * 0.7 + normal(rng);
        m.values.push_back(z(r, c));
      }
    }
    m.refresh_statistics();
    auto p = heuristics::pca_first_component(m);

    for (int c = 0; c < 5; ++c) {
      z.col(c) *= m.columns[c].orientation;
      z.col(c).array() -= z.col(c).mean();
      z.col(c) /= std::sqrt(z.col(c).squaredNorm() / 19.0);
    }
    const Eigen::MatrixXd cov = z.transpose() * z / 19.0;
    Eigen::VectorXd loadings(5);
    for (int c = 0; c < 5; ++c) loadings(c) = p.loadings[c];
    const double residual = (cov * loadings - p.eigenvalue * loadings).norm();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    const double lambda = solver.eigenvalues().maxCoeff();
    worst_residual = std::max(worst_residual, residual);
    worst_lambda = std::max(worst_lambda, std::abs(lambda - p.eigenvalue));
  }
  v.require(worst_residual < 1e-8, "residual " + fmt(worst_residual));
  v.require(worst_lambda < 1e-8, "eigenvalue error " + fmt(worst_lambda));
  if (v.pass) v.detail = "max residual " + fmt(worst_residual) + ", max eigenvalue error " + fmt(worst_lambda);
  return v;
}

// --- 4 -----------------------------------------------------------------------

Verdict gradient_check() {
  auto c = testing::synthetic_corpus({.annotators = 8, .examples_per_annotator = 5, .copiers = 2, .seed = 31});
  std::istringstream vectors(testing::synthetic_embeddings(8, 3));
  auto table = overlap::parse_embeddings(vectors);
  auto data = overlap::extract_instances(c, table);
  auto scaler = overlap::train_logistic(data, {.C = 100, .max_iterations = 1});
  std::vector<overlap::FeatureRow> rows;
  for (const auto& r : data.rows) rows.push_back(scaler.standardize(r));

  std::mt19937_64 rng(77);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> logC(-2, 3);
  Verdict v;
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    overlap::RegularizedLogLoss loss(rows, data.labels, std::pow(10.0, logC(rng)));
    std::vector<double> p(overlap::kFeatureCount + 1);
    for (auto& x : p) x = normal(rng);
    auto g = loss.gradient(p);
    double diff = 0, norm = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      auto hi = p, lo = p;
      hi[i] += 1e-5;
      lo[i] -= 1e-5;
      const double numeric = (loss.value(hi) - loss.value(lo)) / 2e-5;
      diff += (numeric - g[i]) * (numeric - g[i]);
      norm += g[i] * g[i];
    }
    worst = std::max(worst, std::sqrt(diff) / std::sqrt(norm));
  }
  v.require(worst < 1e-5, "relative error " + fmt(worst));
  if (v.pass) v.detail = "max relative error " + fmt(worst);
  return v;
}

// --- 5 -----------------------------------------------------------------------

Verdict planted_recovery() {
  const auto start = std::chrono::steady_clock::now();
  auto c = testing::synthetic_corpus({.annotators = 20, .examples_per_annotator = 10, .copiers = 5, .seed = 5});
  c = corpus::filter_eligible(c);
  auto biased = testing::scripted_predictions(
      c, "copy_probe", [](const corpus::AnnotationExample& e) { return heuristics::copying_features(e)[2] > 0.8; });
  std::size_t solved = 0;
  for (const auto& e : c.examples) solved += biased.predicted(e.example_id) == e.correct_index;
  const double planted_rate = static_cast<double>(solved) / static_cast<double>(c.examples.size());

  auto traces = heuristics::build_traces(c, heuristics::select_features({"copying_3"}));
  auto curve = analysis::precision_curve(c, traces, "copying_3", biased, {25, 100});
  const double elapsed = seconds_since(start);
  Verdict v;
  v.require(planted_rate == 0.25, "planted rate " + fmt(planted_rate));
  v.require(curve.points[0].precision == 1.0, "precision(25) = " + fmt(curve.points[0].precision));
  v.require(curve.points[1].precision == planted_rate, "precision(100) = " + fmt(curve.points[1].precision));
  v.require(elapsed < 5, "took " + fmt(elapsed) + " s");
  if (v.pass) {
    v.detail = "precision(25)=" + fmt(curve.points[0].precision) + ", precision(100)=" +
               fmt(curve.points[1].precision) + " in " + fmt(elapsed) + " s";
  }
  return v;
}

// --- 6 -----------------------------------------------------------------------

Verdict subset_monotonicity() {
  std::mt19937_64 rng(606);
  const auto ids = heuristics::example_feature_ids();
  Verdict v;
  for (int trial = 0; trial < 100 && v.pass; ++trial) {
    const int annotators = 3 + static_cast<int>(analysis::uniform_below(rng, 40));
    const auto& feature = heuristics::find_feature(ids[analysis::uniform_below(rng, ids.size())]);
    corpus::Corpus c;
    heuristics::TraceMatrix m;
    m.columns.push_back(feature);
    for (int a = 0; a < annotators; ++a) {
      const std::string name = "ann" + std::to_string(1000 + a);
      m.annotators.push_back(name);
      const int count = 1 + static_cast<int>(analysis::uniform_below(rng, 6));
      m.example_counts.push_back(count);
      // Few distinct values so ties are common.
      m.values.push_back(static_cast<double>(analysis::uniform_below(rng, 5)) / 2.0);
      for (int i = 1; i <= count; ++i) {
        corpus::AnnotationExample e;
        e.example_id = name + "-" + std::to_string(i);
        e.annotator_id = name;
        e.correct_index = static_cast<int>(analysis::uniform_below(rng, 4));
        c.examples.push_back(e);
      }
    }
    m.refresh_statistics();
    corpus::PredictionSet preds;
    preds.model_id = "random";
    std::size_t hits = 0;
    for (const auto& e : c.examples) {
      const int guess = static_cast<int>(analysis::uniform_below(rng, 4));
      preds.entries[e.example_id] = guess;
      hits += guess == e.correct_index;
    }
    std::vector<double> grid;
    for (int k = 10; k <= 100; k += 10) grid.push_back(k);
    std::set<std::string> previous;
    for (double k : grid) {
      auto s = analysis::heuristic_subset(c, m, feature.feature_id, k);
      v.require(std::includes(s.member_examples.begin(), s.member_examples.end(), previous.begin(), previous.end()),
                "H_k not nested at trial " + std::to_string(trial));
      previous = s.member_examples;
    }
    auto curve = analysis::precision_curve(c, m, feature.feature_id, preds, grid);
    const double overall = static_cast<double>(hits) / static_cast<double>(c.examples.size());
    v.require(curve.points.back().precision == overall, "precision(100) differs at trial " + std::to_string(trial));
  }
  if (v.pass) v.detail = "100 matrices";
  return v;
}

// --- 7 -----------------------------------------------------------------------

Verdict crt_scoring() {
  const auto keys = analysis::default_crt_keys();
  auto score = [&](corpus::TestId id, std::vector<std::string> answers) {
    return analysis::score_crt({"x", id, std::move(answers)}, analysis::key_for(keys, id)).correct_count;
  };
  using testing::kCrt7Correct;
  using testing::kCrt7Intuitive;
  const std::vector<std::string> crt3_correct(kCrt7Correct.begin(), kCrt7Correct.begin() + 3);
  const std::vector<std::string> crt3_intuitive(kCrt7Intuitive.begin(), kCrt7Intuitive.begin() + 3);
  Verdict v;
  const int c3 = score(corpus::TestId::crt3, crt3_correct);
  const int c7 = score(corpus::TestId::crt7, kCrt7Correct);
  const int c9 = score(corpus::TestId::verbal, testing::kVerbalCorrect);
  const int i3 = score(corpus::TestId::crt3, crt3_intuitive);
  const int i7 = score(corpus::TestId::crt7, kCrt7Intuitive);
  const int i9 = score(corpus::TestId::verbal, testing::kVerbalIntuitive);
  v.require(c3 == 3 && c7 == 7 && c9 == 9, "correct responses scored " + std::to_string(c3) + "/" +
                                               std::to_string(c7) + "/" + std::to_string(c9));
  v.require(i3 == 0 && i7 == 0 && i9 == 0, "intuitive responses scored " + std::to_string(i3) + "/" +
                                               std::to_string(i7) + "/" + std::to_string(i9));
  if (v.pass) v.detail = "3/3, 7/7, 9/9 and 0, 0, 0";
  return v;
}

// --- 8 -----------------------------------------------------------------------

// Correct option copied from the passage, distractors made of words the
// passage never uses: token coverage separates the two classes.
corpus::Corpus separable_corpus() {
  auto c = testing::synthetic_corpus({.annotators = 10, .examples_per_annotator = 6, .seed = 808});
  std::mt19937_64 rng(8);
  const std::vector<std::string> outside{"zephyr", "quartz", "nebula", "pylon", "fjord", "gizmo", "oxbow", "tundra"};
  for (auto& e : c.examples) {
    const auto passage = text::tokenize(e.passage);
    const auto start = analysis::uniform_below(rng, passage.size() - 3);
    for (int o = 0; o < corpus::kOptionCount; ++o) {
      if (o == e.correct_index) {
        e.options[o] = passage[start] + " " + passage[start + 1] + " " + passage[start + 2];
      } else {
        e.options[o] = outside[analysis::uniform_below(rng, outside.size())] + " " +
                       outside[analysis::uniform_below(rng, outside.size())];
      }
    }
  }
  return c;
}

Verdict separable_training() {
  auto c = separable_corpus();
  std::istringstream vectors(testing::synthetic_embeddings(8, 9));
  auto table = overlap::parse_embeddings(vectors);
  auto model = overlap::train_overlap_model(c, table, {.C = 100, .max_iterations = 100});
  auto data = overlap::extract_instances(c, table);
  const double acc = testing::training_accuracy(model, data);
  Verdict v;
  v.require(model.iterations <= 100, "used " + std::to_string(model.iterations) + " iterations");
  v.require(acc == 1.0, "training accuracy " + fmt(acc));
  if (v.pass) {
    v.detail = "accuracy " + fmt(acc) + " on " + std::to_string(data.rows.size()) + " instances after " +
               std::to_string(model.iterations) + " iterations";
  }
  return v;
}

// --- 9 -----------------------------------------------------------------------

Verdict scale() {
  auto c = testing::synthetic_corpus_sized(1225, 73, 1225);
  const auto start = std::chrono::steady_clock::now();
  corpus::require_valid(corpus::validate_corpus(c));
  auto eligible = corpus::filter_eligible(c);
  auto table = heuristics::featurize_corpus(eligible);
  auto traces = heuristics::build_traces(eligible, table, heuristics::default_trace_features());
  auto pca = heuristics::pca_first_component(traces);
  heuristics::append_pca(traces, heuristics::pca_project(traces, pca));
  const double elapsed = seconds_since(start);
  Verdict v;
  v.require(eligible.examples.size() == 1225, "lost examples to filtering");
  v.require(traces.rows() == 73, "trace rows " + std::to_string(traces.rows()));
  v.require(elapsed < 10, "took " + fmt(elapsed) + " s");
  if (v.pass) v.detail = "1225 examples / 73 annotators in " + fmt(elapsed) + " s";
  return v;
}

// --- 10 ----------------------------------------------------------------------

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) files[fs::relative(entry.path(), dir).generic_string()] = testing::read_text(entry);
  }
  return files;
}

Verdict determinism(const fs::path& scratch) {
  setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  auto fixture = testing::write_fixture(scratch / "inputs");
  const auto out_dir = scratch / "outputs";
  std::vector<std::map<std::string, std::string>> runs;
  std::vector<std::string> streams;
  Verdict v;
  for (int round = 0; round < 2; ++round) {
    fs::remove_all(out_dir);
    fs::create_directories(out_dir);
    std::string stream_text;
    for (auto args : testing::fixture_invocations(fixture, out_dir)) {
      const auto name = args.front();
      args.insert(args.begin(), "htrace");
      std::ostringstream out, err;
      const int code = cli::run(args, out, err);
      v.require(code == 0, name + " exited with " + std::to_string(code) + ": " + err.str());
      stream_text += name + "\n" + out.str() + err.str();
    }
    runs.push_back(snapshot(out_dir));
    streams.push_back(stream_text);
  }
  unsetenv("SOURCE_DATE_EPOCH");
  v.require(runs[0].size() >= 14, "only " + std::to_string(runs[0].size()) + " files produced");
  v.require(streams[0] == streams[1], "console output differs between runs");
  for (const auto& [name, bytes] : runs[0]) {
    auto it = runs[1].find(name);
    v.require(it != runs[1].end() && it->second == bytes, name + " differs between runs");
  }
  v.require(runs[0].size() == runs[1].size(), "file sets differ between runs");
  if (v.pass) v.detail = "14 subcommands, " + std::to_string(runs[0].size()) + " files byte-identical";
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path scratch = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "htrace_acceptance";
  fs::create_directories(scratch);

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"LCS oracle equivalence", lcs_equivalence},
      {"Pearson r and p-values", pearson_correctness},
      {"PCA eigen-equation", pca_eigen_equation},
      {"Gradient check", gradient_check},
      {"Planted-heuristic recovery", planted_recovery},
      {"Subset monotonicity", subset_monotonicity},
      {"CRT scoring", crt_scoring},
      {"Separable-data training", separable_training},
      {"Scale", scale},
      {"CLI determinism", [&] { return determinism(scratch); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("threw: ") + e.what();
    }
    if (!v.pass) ++failures;
    std::cout << (v.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << " -- " << v.detail
              << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
