#include <doctest.h>

#include <functional>
#include <random>

#include "expect_error.hpp"
#include "htrace/analysis.hpp"
#include "matrices.hpp"
#include "synthetic.hpp"

using namespace htrace::analysis;
using htrace::corpus::AnnotationExample;
using htrace::corpus::Corpus;
using htrace::corpus::PredictionSet;
using htrace::testing::make_matrix;

namespace {

AnnotationExample item(const std::string& id, const std::string& annotator, int seq = 1) {
  AnnotationExample e;
  e.example_id = id;
  e.annotator_id = annotator;
  e.passage = "Alpha beta gamma. Delta epsilon.";
  e.question = "what is beta?";
  e.options = {"alpha", "beta", "gamma", "delta"};
  e.correct_index = 1;
  e.sequence_index = seq;
  return e;
}

Corpus two_per(const std::vector<std::string>& annotators) {
  Corpus c;
  for (const auto& a : annotators) {
    c.examples.push_back(item(a + "1", a, 1));
    c.examples.push_back(item(a + "2", a, 2));
  }
  return c;
}

PredictionSet solve_if(const Corpus& c, const std::function<bool(const AnnotationExample&)>& f) {
  return htrace::testing::scripted_predictions(c, "m", f);
}

}  // namespace

TEST_CASE("top_count") {
  CHECK(top_count(25, 4) == 1);
  CHECK(top_count(100, 4) == 4);
  CHECK(top_count(10, 4) == 1);
  CHECK(top_count(50, 3) == 2);
  CHECK(top_count(33, 3) == 1);
  CHECK(top_count(1, 73) == 1);
  CHECK(top_count(20, 5) == 1);
}

TEST_CASE("heuristic subsets") {
  auto c = two_per({"A", "B", "C", "D"});
  auto m = make_matrix({"A", "B", "C", "D"}, {"copying_1"}, {9, 7, 5, 3});
  auto s = heuristic_subset(c, m, "copying_1", 25);
  CHECK(s.member_annotators == std::set<std::string>{"A"});
  CHECK(s.member_examples == std::set<std::string>{"A1", "A2"});

  auto all = heuristic_subset(c, m, "copying_1", 100);
  CHECK(all.member_annotators.size() == 4);
  CHECK(all.member_examples.size() == 8);

  auto ties = make_matrix({"A", "B", "C", "D"}, {"copying_1"}, {5, 5, 3, 1});
  CHECK(heuristic_subset(c, ties, "copying_1", 25).member_annotators == std::set<std::string>{"A"});

  auto oriented = make_matrix({"A", "B", "C", "D"}, {"lowtime_1"}, {9, 7, 5, 3});
  CHECK(heuristic_subset(c, oriented, "lowtime_1", 25).member_annotators == std::set<std::string>{"D"});

  CHECK_ERROR_CODE(heuristic_subset(c, m, "copying_1", 0), "bad-percentile");
  CHECK_ERROR_CODE(heuristic_subset(c, m, "copying_1", 100.5), "bad-percentile");
  CHECK_ERROR_CODE(heuristic_subset(c, m, "copying_2", 50), "unknown-feature");
}

TEST_CASE("precision curve on two annotators") {
  auto c = two_per({"A", "B"});
  auto m = make_matrix({"A", "B"}, {"copying_1"}, {2, 1});
  auto solves_a = solve_if(c, [](const AnnotationExample& e) { return e.annotator_id == "A"; });
  auto curve = precision_curve(c, m, "copying_1", solves_a, {50, 100});
  REQUIRE(curve.points.size() == 2);
  CHECK(curve.points[0].precision == 1.0);
  CHECK(curve.points[1].precision == 0.5);
  CHECK(curve.points[0].subset_size == 2);

  auto none = solve_if(c, [](const AnnotationExample&) { return false; });
  for (const auto& p : precision_curve(c, m, "copying_1", none, {10, 50, 100}).points) CHECK(p.precision == 0.0);

  PredictionSet partial = solves_a;
  partial.entries.erase("B2");
  CHECK_ERROR_CODE(precision_curve(c, m, "copying_1", partial, {50}), "uncovered-examples");
}

TEST_CASE("subset nesting and full-k precision on random matrices") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::string> names;
    std::vector<double> values;
    for (int a = 0; a < 11; ++a) {
      names.push_back("a" + std::to_string(a));
      values.push_back(std::floor(u(rng) * 4));
    }
    auto c = two_per(names);
    auto m = make_matrix(names, {"copying_2"}, values);
    auto preds = solve_if(c, [&](const AnnotationExample&) { return u(rng) < 0.4; });
    std::set<std::string> previous;
    for (int k = 10; k <= 100; k += 10) {
      auto s = heuristic_subset(c, m, "copying_2", k);
      CHECK(std::includes(s.member_examples.begin(), s.member_examples.end(), previous.begin(), previous.end()));
      previous = s.member_examples;
    }
    auto eligible = eligible_examples(c, m);
    auto curve = precision_curve(c, m, "copying_2", preds, {100});
    CHECK(curve.points[0].precision == accuracy(eligible, preds));
  }
}

TEST_CASE("annotator bias correlation") {
  Corpus c;
  for (int a = 0; a < 4; ++a) {
    for (int i = 0; i < 4; ++i) c.examples.push_back(item("e" + std::to_string(a) + std::to_string(i), "A" + std::to_string(a), i + 1));
  }
  // Annotator a gets a of its four examples solved.
  auto preds = solve_if(c, [](const AnnotationExample& e) { return e.sequence_index <= e.annotator_id[1] - '0'; });
  auto m = make_matrix({"A0", "A1", "A2", "A3"}, {"copying_1", "copying_2"}, {0, 1, 1, 0, 2, 1, 3, 1});
  auto out = annotator_bias_correlation(m, c, preds);
  REQUIRE(out.at("copying_1").result.has_value());
  CHECK(out.at("copying_1").result->r == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<double> x{1, 0, 1, 1}, y{0, 0.25, 0.5, 0.75};
  CHECK(out.at("copying_2").result->r == doctest::Approx(htrace::stats::pearson(x, y).r).epsilon(1e-14));

  auto flat = solve_if(c, [](const AnnotationExample&) { return true; });
  auto constant = annotator_bias_correlation(m, c, flat);
  CHECK_FALSE(constant.at("copying_1").result.has_value());
  CHECK(constant.at("copying_1").error.find("constant-input") != std::string::npos);
}

TEST_CASE("pooled bias correlation") {
  Corpus c;
  for (int i = 0; i < 6; ++i) {
    auto e = item("e" + std::to_string(i), "A", i + 1);
    e.correct_index = i % 2 == 0 ? 0 : 2;
    e.working_time_secs = 10.0 + i;
    c.examples.push_back(e);
  }
  auto table = htrace::heuristics::featurize_corpus(c);
  auto preds = solve_if(c, [](const AnnotationExample& e) { return e.correct_index == 0; });
  auto out = pooled_bias_correlation(c, table, preds, {"first_option", "lowtime_1"});
  CHECK(out.at("first_option").result->r == doctest::Approx(1.0).epsilon(1e-12));
  // Hand computation: x = 10..15, y = 1,0,1,0,1,0. Sxy = -1.5, Sxx = 17.5, Syy = 1.5.
  CHECK(out.at("lowtime_1").result->r == doctest::Approx(-1.5 / std::sqrt(17.5 * 1.5)).epsilon(1e-12));
  CHECK_ERROR_CODE(pooled_bias_correlation(c, table, preds, {"word_overlap"}), "annotator-level-feature");
}

TEST_CASE("entity approximation") {
  CHECK(approximate_entity_count("The dog met Anna Smith in Paris. Then it rained.") == 2);
  CHECK(approximate_entity_count("nothing capitalized here.") == 0);
  CHECK(approximate_entity_count("She saw Bob, Carol and Dave.") == 3);
}

TEST_CASE("influencer correlations") {
  Corpus c;
  auto add = [&](const std::string& annotator, int seq, int tokens, double time) {
    auto e = item(annotator + std::to_string(seq), annotator, seq);
    std::string passage;
    for (int i = 0; i < tokens; ++i) passage += "word ";
    e.passage = passage + "end.";
    e.working_time_secs = time;
    e.entity_count = 2;
    c.examples.push_back(e);
  };
  add("A", 1, 10, 22);
  add("A", 2, 20, 42);
  add("A", 3, 30, 62);
  auto table = htrace::heuristics::featurize_corpus(c);
  auto single = influencer_correlation(c, table, "lowtime_1", Factor::passage_length);
  CHECK(single.mean_r == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(single.annotators_used == 1);

  add("B", 1, 10, 62);
  add("B", 2, 20, 42);
  add("B", 3, 30, 22);
  table = htrace::heuristics::featurize_corpus(c);
  auto both = influencer_correlation(c, table, "lowtime_1", Factor::passage_length);
  CHECK(std::abs(both.mean_r) < 1e-12);
  CHECK(both.annotators_used == 2);

  for (auto& e : c.examples) e.entity_count = 0;
  table = htrace::heuristics::featurize_corpus(c);
  try {
    influencer_correlation(c, table, "lowtime_1", Factor::entity);
    FAIL("expected an error");
  } catch (const htrace::Error& e) {
    CHECK(e.code() == "no-qualifying-annotators");
    CHECK(std::string(e.what()).find("entity") != std::string::npos);
  }

  auto cells = influencer_correlations(c, table, {"lowtime_1"});
  REQUIRE(cells.size() == 3);
  CHECK(cells[0].cell.has_value());
  CHECK_FALSE(cells[1].cell.has_value());
  CHECK(cells[2].cell.has_value());
  CHECK(parse_factor("index") == Factor::index);
  CHECK_ERROR_CODE(parse_factor("mood"), "unknown-factor");
}

TEST_CASE("label contrast") {
  Corpus c;
  for (int i = 0; i < 20; ++i) {
    auto e = item("e" + std::to_string(i), i < 10 ? "G" : "R", i % 10 + 1);
    std::set<std::string> labels;
    if ((i < 10 && i < 5) || (i >= 10 && i < 13)) labels.insert("negation");
    e.qualitative_labels = labels;
    c.examples.push_back(e);
  }
  std::set<std::string> group;
  for (int i = 0; i < 10; ++i) group.insert("e" + std::to_string(i));
  auto rows = label_contrast(c, group, {"negation", "numeric"});
  CHECK(rows.at("negation").group_rate == doctest::Approx(50.0));
  CHECK(rows.at("negation").complement_rate == doctest::Approx(30.0));
  CHECK(rows.at("negation").difference == doctest::Approx(20.0));
  CHECK(rows.at("numeric").difference == 0.0);

  HeuristicSubset everything;
  for (const auto& e : c.examples) everything.member_examples.insert(e.example_id);
  CHECK_ERROR_CODE(qualitative_diff(c, everything, {"negation"}), "empty-complement");
  CHECK_ERROR_CODE(label_contrast(c, {}, {"negation"}), "empty-group");

  c.examples[3].qualitative_labels.reset();
  CHECK_ERROR_CODE(label_contrast(c, group, {"negation"}), "missing-field");
  CHECK(label_universe(c) == std::set<std::string>{"negation"});
}

TEST_CASE("label contrast is antisymmetric") {
  auto c = htrace::testing::synthetic_corpus({.annotators = 8, .examples_per_annotator = 5, .seed = 40});
  std::set<std::string> group, rest;
  for (std::size_t i = 0; i < c.examples.size(); ++i) (i % 3 == 0 ? group : rest).insert(c.examples[i].example_id);
  const auto labels = label_universe(c);
  auto forward = label_contrast(c, group, labels);
  auto backward = label_contrast(c, rest, labels);
  for (const auto& l : labels) CHECK(forward.at(l).difference == doctest::Approx(-backward.at(l).difference));
}
