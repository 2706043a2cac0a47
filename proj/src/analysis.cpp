#include "htrace/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "htrace/error.hpp"
#include "htrace/textops.hpp"

namespace htrace::analysis {
namespace {

using corpus::AnnotationExample;

bool solved(const AnnotationExample& e, const corpus::PredictionSet& predictions) {
  auto p = predictions.predicted(e.example_id);
  if (!p) throw Error("uncovered-examples", "no prediction for example '" + e.example_id + "'");
  return *p == e.correct_index;
}

void require_coverage(std::span<const AnnotationExample* const> examples, const corpus::PredictionSet& predictions) {
  std::vector<std::string> missing;
  for (const auto* e : examples) {
    if (!predictions.predicted(e->example_id)) missing.push_back(e->example_id);
  }
  if (missing.empty()) return;
  std::string msg = std::to_string(missing.size()) + " example(s) without predictions from '" +
                    predictions.model_id + "', e.g. " + missing.front();
  throw Error("uncovered-examples", msg);
}

template <typename Fn>
CorrelationOutcome capture(Fn&& fn) {
  CorrelationOutcome out;
  try {
    out.result = fn();
  } catch (const Error& e) {
    out.error = e.what();
  }
  return out;
}

bool is_constant(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

std::optional<double> factor_value(const AnnotationExample& e, Factor factor, bool& approximate) {
  switch (factor) {
    case Factor::passage_length:
      return static_cast<double>(text::tokenize(e.passage).size());
    case Factor::index:
      return static_cast<double>(e.sequence_index);
    case Factor::entity: {
      int entities = 0;
      if (e.entity_count) {
        entities = *e.entity_count;
      } else {
        entities = approximate_entity_count(e.passage);
        approximate = true;
      }
      if (entities <= 0) return std::nullopt;
      return static_cast<double>(text::tokenize(e.passage).size()) / entities;
    }
  }
  return std::nullopt;
}

}  // namespace

std::size_t top_count(double k, std::size_t annotators) {
  if (annotators == 0) return 0;
  // Guard against k*A/100 landing a hair above an integer.
  const double raw = std::ceil(k * static_cast<double>(annotators) / 100.0 - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(raw, 1.0)), 1, annotators);
}

std::vector<std::string> rank_annotators(const TraceMatrix& traces, const std::string& feature_id) {
  auto c = traces.column_index(feature_id);
  if (!c) throw Error("unknown-feature", "feature '" + feature_id + "' not in trace matrix");
  const int orientation = traces.columns[*c].orientation;
  std::vector<std::size_t> order(traces.rows());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double va = orientation * traces.at(a, *c);
    const double vb = orientation * traces.at(b, *c);
    if (va != vb) return va > vb;
    return traces.annotators[a] < traces.annotators[b];
  });
  std::vector<std::string> ranked;
  for (auto i : order) ranked.push_back(traces.annotators[i]);
  return ranked;
}

HeuristicSubset heuristic_subset(const corpus::Corpus& corpus, const TraceMatrix& traces,
                                 const std::string& feature_id, double k) {
  if (!(k > 0.0 && k <= 100.0)) {
    throw Error("bad-percentile", "percentile must lie in (0, 100], got " + std::to_string(k));
  }
  auto ranked = rank_annotators(traces, feature_id);
  HeuristicSubset subset;
  subset.feature_id = feature_id;
  subset.k = k;
  const auto count = top_count(k, ranked.size());
  subset.member_annotators.insert(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(count));
  for (const auto& e : corpus.examples) {
    if (subset.member_annotators.count(e.annotator_id)) subset.member_examples.insert(e.example_id);
  }
  return subset;
}

std::vector<const AnnotationExample*> eligible_examples(const corpus::Corpus& corpus, const TraceMatrix& traces) {
  std::vector<const AnnotationExample*> out;
  for (const auto& e : corpus.examples) {
    if (traces.row_index(e.annotator_id)) out.push_back(&e);
  }
  return out;
}

double accuracy(std::span<const AnnotationExample* const> examples, const corpus::PredictionSet& predictions) {
  if (examples.empty()) throw Error("empty-group", "accuracy over zero examples");
  require_coverage(examples, predictions);
  std::size_t hits = 0;
  for (const auto* e : examples) hits += solved(*e, predictions) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(examples.size());
}

PrecisionCurve precision_curve(const corpus::Corpus& corpus, const TraceMatrix& traces,
                               const std::string& feature_id, const corpus::PredictionSet& predictions,
                               const std::vector<double>& k_grid) {
  const auto eligible = eligible_examples(corpus, traces);
  require_coverage(eligible, predictions);

  PrecisionCurve curve;
  curve.feature_id = feature_id;
  curve.model_id = predictions.model_id;
  for (double k : k_grid) {
    auto subset = heuristic_subset(corpus, traces, feature_id, k);
    std::vector<const AnnotationExample*> members;
    for (const auto* e : eligible) {
      if (subset.member_examples.count(e->example_id)) members.push_back(e);
    }
    curve.points.push_back({k, accuracy(members, predictions), members.size()});
  }
  return curve;
}

std::map<std::string, CorrelationOutcome> annotator_bias_correlation(const TraceMatrix& traces,
                                                                    const corpus::Corpus& corpus,
                                                                    const corpus::PredictionSet& predictions) {
  auto groups = corpus.by_annotator();
  std::vector<double> accuracies;
  for (const auto& a : traces.annotators) {
    auto it = groups.find(a);
    if (it == groups.end()) throw Error("missing-annotator", "annotator " + a + " has no examples in corpus");
    accuracies.push_back(accuracy(it->second, predictions));
  }
  std::map<std::string, CorrelationOutcome> out;
  for (const auto& d : traces.columns) {
    auto values = traces.column(d.feature_id);
    out[d.feature_id] = capture([&] { return stats::pearson(values, accuracies); });
  }
  return out;
}

std::map<std::string, CorrelationOutcome> pooled_bias_correlation(const corpus::Corpus& corpus,
                                                                 const FeatureTable& features,
                                                                 const corpus::PredictionSet& predictions,
                                                                 const std::vector<std::string>& feature_ids) {
  for (const auto& id : feature_ids) {
    if (heuristics::find_feature(id).level != heuristics::Level::example) {
      throw Error("annotator-level-feature",
                  "'" + id + "' is computed per annotator and has no per-example value");
    }
  }
  std::vector<const AnnotationExample*> all;
  for (const auto& e : corpus.examples) all.push_back(&e);
  require_coverage(all, predictions);

  std::map<std::string, const heuristics::ExampleFeatureVector*> by_id;
  for (const auto& r : features.rows) by_id[r.example_id] = &r;

  std::map<std::string, CorrelationOutcome> out;
  for (const auto& id : feature_ids) {
    out[id] = capture([&] {
      std::vector<double> xs, ys;
      for (const auto* e : all) {
        auto it = by_id.find(e->example_id);
        if (it == by_id.end()) throw Error("missing-features", "no feature vector for '" + e->example_id + "'");
        auto v = it->second->value(id);
        if (!v) continue;
        xs.push_back(*v);
        ys.push_back(solved(*e, predictions) ? 1.0 : 0.0);
      }
      return stats::pearson(xs, ys);
    });
  }
  return out;
}

std::string to_string(Factor factor) {
  switch (factor) {
    case Factor::passage_length: return "passage_length";
    case Factor::entity: return "entity";
    case Factor::index: return "index";
  }
  return "?";
}

Factor parse_factor(const std::string& text) {
  if (text == "passage_length") return Factor::passage_length;
  if (text == "entity") return Factor::entity;
  if (text == "index") return Factor::index;
  throw Error("unknown-factor", "unknown factor '" + text + "'");
}

int approximate_entity_count(const std::string& passage) {
  int count = 0;
  for (const auto& sentence : text::split_sentences(passage)) {
    const std::string& s = sentence.text;
    bool in_run = false;
    bool first = true;
    std::size_t i = 0;
    while (i < s.size()) {
      while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
      const std::size_t start = i;
      while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
      if (start == i) break;
      std::string_view raw(s.data() + start, i - start);
      std::string_view word = raw;
      while (!word.empty() && std::ispunct(static_cast<unsigned char>(word.front()))) word.remove_prefix(1);
      while (!word.empty() && std::ispunct(static_cast<unsigned char>(word.back()))) word.remove_suffix(1);
      if (word.empty()) {
        in_run = false;
        continue;
      }
      const bool capitalized = std::isupper(static_cast<unsigned char>(word.front())) != 0;
      if (capitalized && !first) {
        if (!in_run) ++count;
        in_run = true;
      } else {
        in_run = false;
      }
      first = false;
      if (std::ispunct(static_cast<unsigned char>(raw.back()))) in_run = false;
    }
  }
  return count;
}

InfluencerCell influencer_correlation(const corpus::Corpus& corpus, const FeatureTable& features,
                                      const std::string& feature_id, Factor factor) {
  std::map<std::string, const heuristics::ExampleFeatureVector*> by_id;
  for (const auto& r : features.rows) by_id[r.example_id] = &r;

  InfluencerCell cell;
  cell.feature_id = feature_id;
  cell.factor = factor;
  double sum_r = 0;
  for (const auto& [annotator, examples] : corpus.by_annotator()) {
    std::vector<double> xs, ys;
    for (const auto* e : examples) {
      auto it = by_id.find(e->example_id);
      if (it == by_id.end()) throw Error("missing-features", "no feature vector for '" + e->example_id + "'");
      auto v = it->second->value(feature_id);
      auto f = factor_value(*e, factor, cell.approximate);
      if (!v || !f) continue;
      xs.push_back(*v);
      ys.push_back(*f);
    }
    if (xs.size() < 3 || is_constant(xs) || is_constant(ys)) {
      ++cell.annotators_skipped;
      continue;
    }
    sum_r += stats::pearson(xs, ys).r;
    ++cell.annotators_used;
  }
  if (cell.annotators_used == 0) {
    throw Error("no-qualifying-annotators",
                "no annotator qualifies for " + feature_id + " vs factor " + to_string(factor));
  }
  cell.mean_r = sum_r / cell.annotators_used;
  return cell;
}

std::vector<InfluencerOutcome> influencer_correlations(const corpus::Corpus& corpus, const FeatureTable& features,
                                                       const std::vector<std::string>& feature_ids) {
  std::vector<InfluencerOutcome> out;
  for (const auto& id : feature_ids) {
    for (Factor f : {Factor::passage_length, Factor::entity, Factor::index}) {
      InfluencerOutcome o;
      o.feature_id = id;
      o.factor = f;
      try {
        o.cell = influencer_correlation(corpus, features, id, f);
      } catch (const Error& e) {
        o.error = e.what();
      }
      out.push_back(std::move(o));
    }
  }
  return out;
}

std::map<std::string, LabelContrast> label_contrast(const corpus::Corpus& corpus,
                                                    const std::set<std::string>& group_examples,
                                                    const std::set<std::string>& label_universe) {
  std::size_t group_n = 0, rest_n = 0;
  std::map<std::string, std::size_t> group_hits, rest_hits;
  for (const auto& e : corpus.examples) {
    if (!e.qualitative_labels) {
      throw Error("missing-field", e.example_id + ": qualitative_labels not recorded");
    }
    const bool in_group = group_examples.count(e.example_id) > 0;
    (in_group ? group_n : rest_n)++;
    for (const auto& label : *e.qualitative_labels) {
      if (!label_universe.count(label)) continue;
      (in_group ? group_hits : rest_hits)[label]++;
    }
  }
  if (group_n == 0) throw Error("empty-group", "heuristic subset has no examples in the corpus");
  if (rest_n == 0) throw Error("empty-complement", "heuristic subset covers the whole corpus");

  std::map<std::string, LabelContrast> out;
  for (const auto& label : label_universe) {
    LabelContrast c;
    c.group_rate = 100.0 * static_cast<double>(group_hits[label]) / static_cast<double>(group_n);
    c.complement_rate = 100.0 * static_cast<double>(rest_hits[label]) / static_cast<double>(rest_n);
    c.difference = c.group_rate - c.complement_rate;
    out[label] = c;
  }
  return out;
}

std::map<std::string, LabelContrast> qualitative_diff(const corpus::Corpus& corpus, const HeuristicSubset& subset,
                                                      const std::set<std::string>& label_universe) {
  return label_contrast(corpus, subset.member_examples, label_universe);
}

std::set<std::string> label_universe(const corpus::Corpus& corpus) {
  std::set<std::string> labels;
  for (const auto& e : corpus.examples) {
    if (e.qualitative_labels) labels.insert(e.qualitative_labels->begin(), e.qualitative_labels->end());
  }
  return labels;
}

}  // namespace htrace::analysis
