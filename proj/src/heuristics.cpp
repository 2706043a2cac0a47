#include "htrace/heuristics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "htrace/error.hpp"
#include "htrace/parallel.hpp"
#include "htrace/textops.hpp"

namespace htrace::heuristics {
namespace {

using corpus::AnnotationExample;

std::vector<FeatureDescriptor> make_catalog() {
  std::vector<FeatureDescriptor> c;
  for (int i = 1; i <= 4; ++i) c.push_back({"lowtime_" + std::to_string(i), Group::lowtime, -1, Level::example});
  for (int i = 1; i <= 4; ++i) {
    c.push_back({"loweffort_" + std::to_string(i), Group::loweffort, i == 4 ? 1 : -1, Level::example});
  }
  c.push_back({"first_option", Group::first_option, 1, Level::example});
  c.push_back({"serial_position", Group::serial_position, 1, Level::example});
  c.push_back({"word_overlap", Group::word_overlap, 1, Level::annotator});
  for (int i = 1; i <= 3; ++i) c.push_back({"copying_" + std::to_string(i), Group::copying, 1, Level::example});
  c.push_back({"pca", Group::pca, 1, Level::annotator});
  return c;
}

// first + mean of deviations: exact for constant inputs.
double stable_mean(std::span<const double> xs) {
  const double first = xs.front();
  double acc = 0;
  for (double x : xs) acc += x - first;
  return first + acc / static_cast<double>(xs.size());
}

double sample_sd(std::span<const double> xs, double mean) {
  if (xs.size() < 2) return 0;
  double acc = 0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

FeatureTable featurize_impl(const corpus::Corpus& corpus, Execution mode) {
  std::vector<ExampleFeatureVector> rows(corpus.examples.size());
  std::vector<std::vector<std::string>> warnings(corpus.examples.size());
  for_each_index(rows.size(), mode,
                 [&](std::size_t i) { rows[i] = featurize_example(corpus.examples[i], &warnings[i]); });
  FeatureTable table;
  table.rows = std::move(rows);
  for (auto& w : warnings) {
    for (auto& line : w) table.warnings.push_back(std::move(line));
  }
  return table;
}

}  // namespace

std::string to_string(Group group) {
  switch (group) {
    case Group::lowtime: return "lowtime";
    case Group::loweffort: return "loweffort";
    case Group::first_option: return "first_option";
    case Group::serial_position: return "serial_position";
    case Group::word_overlap: return "word_overlap";
    case Group::copying: return "copying";
    case Group::pca: return "pca";
  }
  return "?";
}

const std::vector<FeatureDescriptor>& feature_catalog() {
  static const std::vector<FeatureDescriptor> catalog = make_catalog();
  return catalog;
}

const FeatureDescriptor& find_feature(const std::string& feature_id) {
  for (const auto& d : feature_catalog()) {
    if (d.feature_id == feature_id) return d;
  }
  throw Error("unknown-feature", "unknown feature '" + feature_id + "'");
}

std::vector<std::string> example_feature_ids() {
  std::vector<std::string> ids;
  for (const auto& d : feature_catalog()) {
    if (d.level == Level::example) ids.push_back(d.feature_id);
  }
  return ids;
}

std::vector<FeatureDescriptor> default_trace_features() {
  return select_features({"lowtime_4", "loweffort_4", "first_option", "serial_position",
                          "word_overlap", "copying_3"});
}

std::vector<FeatureDescriptor> select_features(const std::vector<std::string>& ids,
                                               const std::map<std::string, int>& orientation_overrides) {
  std::vector<FeatureDescriptor> out;
  std::set<std::string> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) continue;
    auto d = find_feature(id);
    out.push_back(d);
  }
  for (const auto& [id, sign] : orientation_overrides) {
    if (sign != 1 && sign != -1) {
      throw Error("bad-orientation", "orientation for '" + id + "' must be +1 or -1");
    }
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& d) { return d.feature_id == id; });
    if (it == out.end()) {
      find_feature(id);  // unknown ids still fail loudly
      continue;
    }
    it->orientation = sign;
  }
  return out;
}

std::array<double, 4> lowtime_features(double working_time_secs, std::size_t passage_tokens) {
  if (!(working_time_secs > 0.0)) throw Error("nonpositive-input", "working time must be positive");
  if (passage_tokens == 0) throw Error("nonpositive-input", "passage has no tokens");
  const double t = working_time_secs;
  const double per_token = t / static_cast<double>(passage_tokens);
  return {t, std::log(t), per_token, std::log(per_token)};
}

namespace {

LowEffort loweffort_from(const AnnotationExample& e, const std::optional<std::string>& keystrokes) {
  const auto l_q = text::tokenize(e.question).size();
  if (l_q == 0) throw Error("empty-question", e.example_id + ": question has no tokens");
  std::size_t l_o = 0;
  for (const auto& o : e.options) l_o += text::tokenize(o).size();
  LowEffort out;
  out.question_tokens = static_cast<double>(l_q);
  out.question_option_tokens = static_cast<double>(l_q + l_o);
  if (keystrokes) {
    const auto l_k = text::tokenize(*keystrokes).size();
    out.keystroke_words = static_cast<double>(l_k);
    if (l_k > 0) out.output_per_keystroke_word = out.question_option_tokens / static_cast<double>(l_k);
  }
  return out;
}

}  // namespace

LowEffort loweffort_features(const AnnotationExample& example) {
  if (!example.keystrokes) {
    throw Error("missing-field", example.example_id + ": keystrokes not recorded");
  }
  return loweffort_from(example, example.keystrokes);
}

int first_option_bias(const AnnotationExample& example) { return example.correct_index == 0 ? 1 : 0; }

int serial_position(const AnnotationExample& example) {
  if (example.correct_index < 0 || example.correct_index >= static_cast<int>(example.options.size())) {
    throw Error("correct-index", example.example_id + ": correct_index out of range");
  }
  auto answer = text::tokenize(example.options[example.correct_index]);
  if (answer.empty()) throw Error("empty-answer", example.example_id + ": correct option has no tokens");
  auto sentences = text::split_sentences(example.passage);
  if (sentences.empty()) return 0;
  return text::contains_contiguous(sentences.front().tokens, answer) ||
                 text::contains_contiguous(sentences.back().tokens, answer)
             ? 1
             : 0;
}

std::array<double, 3> copying_features(const AnnotationExample& example, std::vector<std::string>* warnings) {
  const auto passage = text::tokenize(example.passage);
  const auto question = text::tokenize(example.question);
  if (passage.empty()) throw Error("empty-passage", example.example_id + ": passage has no tokens");
  if (question.empty()) throw Error("empty-question", example.example_id + ": question has no tokens");

  const double lcs_question = static_cast<double>(text::lcs_len(passage, question));
  double best = lcs_question / static_cast<double>(question.size());
  double sum = best;
  std::size_t count = 1;
  for (std::size_t i = 0; i < example.options.size(); ++i) {
    auto option = text::tokenize(example.options[i]);
    ++count;
    if (option.empty()) {
      if (warnings) {
        warnings->push_back(example.example_id + ": option " + std::to_string(i) +
                            " has no tokens, copying score 0");
      }
      best = std::max(best, 0.0);
      continue;
    }
    const double norm = static_cast<double>(text::lcs_len(passage, option)) / static_cast<double>(option.size());
    best = std::max(best, norm);
    sum += norm;
  }
  return {lcs_question, best, sum / static_cast<double>(count)};
}

double word_overlap_trace(std::span<const std::string> questions) {
  if (questions.size() < 2) {
    throw Error("too-few-examples", "word overlap needs at least two questions");
  }
  std::vector<text::TokenSequence> tokens;
  tokens.reserve(questions.size());
  for (const auto& q : questions) tokens.push_back(text::tokenize(q));
  double sum = 0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (std::size_t j = i + 1; j < tokens.size(); ++j) {
      sum += text::jaccard(tokens[i], tokens[j]);
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

double word_overlap_trace(std::span<const AnnotationExample* const> examples) {
  std::vector<std::string> questions;
  for (const auto* e : examples) questions.push_back(e->question);
  return word_overlap_trace(std::span<const std::string>(questions));
}

std::optional<double> ExampleFeatureVector::value(const std::string& feature_id) const {
  const auto& d = find_feature(feature_id);
  if (d.level != Level::example) {
    throw Error("unknown-feature", "'" + feature_id + "' is not an example-level feature");
  }
  auto suffix = [&] { return static_cast<std::size_t>(feature_id.back() - '1'); };
  switch (d.group) {
    case Group::lowtime:
      if (!has_working_time) throw Error("missing-field", example_id + ": working_time_secs not recorded");
      return lowtime[suffix()];
    case Group::loweffort: {
      const auto i = suffix();
      if ((i == 1 || i == 3) && !has_keystrokes) {
        throw Error("missing-field", example_id + ": keystrokes not recorded");
      }
      return loweffort[i];
    }
    case Group::first_option: return first_option;
    case Group::serial_position: return serial_position;
    case Group::copying: return copying[suffix()];
    default: break;
  }
  throw Error("unknown-feature", feature_id);
}

ExampleFeatureVector featurize_example(const AnnotationExample& example, std::vector<std::string>* warnings) {
  ExampleFeatureVector v;
  v.example_id = example.example_id;
  v.annotator_id = example.annotator_id;
  v.has_working_time = example.working_time_secs.has_value();
  v.has_keystrokes = example.keystrokes.has_value();

  if (v.has_working_time) {
    auto lt = lowtime_features(*example.working_time_secs, text::tokenize(example.passage).size());
    for (std::size_t i = 0; i < 4; ++i) v.lowtime[i] = lt[i];
  }
  auto le = loweffort_from(example, example.keystrokes);
  v.loweffort[0] = le.question_tokens;
  v.loweffort[2] = le.question_option_tokens;
  if (v.has_keystrokes) {
    v.loweffort[1] = le.keystroke_words;
    v.loweffort[3] = le.output_per_keystroke_word;
  }
  v.first_option = first_option_bias(example);
  v.serial_position = serial_position(example);
  v.copying = copying_features(example, warnings);
  return v;
}

const ExampleFeatureVector* FeatureTable::find(const std::string& example_id) const {
  for (const auto& r : rows) {
    if (r.example_id == example_id) return &r;
  }
  return nullptr;
}

FeatureTable featurize_corpus(const corpus::Corpus& corpus) { return featurize_impl(corpus, Execution::parallel); }

FeatureTable featurize_corpus_serial(const corpus::Corpus& corpus) { return featurize_impl(corpus, Execution::serial); }

std::optional<std::size_t> TraceMatrix::column_index(const std::string& feature_id) const {
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c].feature_id == feature_id) return c;
  }
  return std::nullopt;
}

std::optional<std::size_t> TraceMatrix::row_index(const std::string& annotator_id) const {
  auto it = std::lower_bound(annotators.begin(), annotators.end(), annotator_id);
  if (it == annotators.end() || *it != annotator_id) return std::nullopt;
  return static_cast<std::size_t>(it - annotators.begin());
}

std::vector<double> TraceMatrix::column(const std::string& feature_id) const {
  auto c = column_index(feature_id);
  if (!c) throw Error("unknown-feature", "feature '" + feature_id + "' not in trace matrix");
  std::vector<double> out(rows());
  for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, *c);
  return out;
}

void TraceMatrix::refresh_statistics() {
  column_means.assign(cols(), 0.0);
  column_sds.assign(cols(), 0.0);
  zero_variance.assign(cols(), true);
  if (rows() == 0) return;
  for (std::size_t c = 0; c < cols(); ++c) {
    auto col = column(columns[c].feature_id);
    column_means[c] = stable_mean(col);
    column_sds[c] = sample_sd(col, column_means[c]);
    zero_variance[c] = column_sds[c] == 0.0;
  }
}

void TraceMatrix::append_column(const FeatureDescriptor& descriptor, const std::vector<double>& column_values) {
  if (column_values.size() != rows()) {
    throw Error("column-mismatch", "appended column has " + std::to_string(column_values.size()) +
                                       " rows, matrix has " + std::to_string(rows()));
  }
  if (column_index(descriptor.feature_id)) {
    throw Error("duplicate-feature", "feature '" + descriptor.feature_id + "' already present");
  }
  std::vector<double> next;
  next.reserve(values.size() + rows());
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t c = 0; c < cols(); ++c) next.push_back(at(r, c));
    next.push_back(column_values[r]);
  }
  values = std::move(next);
  columns.push_back(descriptor);
  refresh_statistics();
}

TraceMatrix build_traces(const corpus::Corpus& corpus, const FeatureTable& features,
                         const std::vector<FeatureDescriptor>& selected) {
  std::map<std::string, const ExampleFeatureVector*> by_id;
  for (const auto& r : features.rows) by_id[r.example_id] = &r;
  for (const auto& d : selected) {
    if (d.group == Group::pca) {
      throw Error("unknown-feature", "pca is appended after fitting, not built from examples");
    }
  }

  TraceMatrix m;
  m.columns = selected;
  for (const auto& [annotator, examples] : corpus.by_annotator()) {
    std::vector<double> row;
    std::string excluded_because;
    for (const auto& d : selected) {
      if (d.level == Level::annotator) {
        if (examples.size() < 2) {
          excluded_because = d.feature_id + " needs at least two examples";
          break;
        }
        row.push_back(word_overlap_trace(std::span<const AnnotationExample* const>(examples)));
        continue;
      }
      std::vector<double> cells;
      for (const auto* e : examples) {
        auto it = by_id.find(e->example_id);
        if (it == by_id.end()) {
          throw Error("missing-features", "no feature vector for example '" + e->example_id + "'");
        }
        if (auto v = it->second->value(d.feature_id)) cells.push_back(*v);
      }
      if (cells.empty()) {
        excluded_because = "no computable cells for " + d.feature_id;
        break;
      }
      row.push_back(stable_mean(cells));
    }
    if (!excluded_because.empty()) {
      m.warnings.push_back("annotator " + annotator + " excluded: " + excluded_because);
      continue;
    }
    m.annotators.push_back(annotator);
    m.example_counts.push_back(static_cast<int>(examples.size()));
    m.values.insert(m.values.end(), row.begin(), row.end());
  }
  m.refresh_statistics();
  for (std::size_t c = 0; c < m.cols(); ++c) {
    if (m.rows() > 0 && m.zero_variance[c]) {
      m.warnings.push_back("feature " + m.columns[c].feature_id + " has zero variance across annotators");
    }
  }
  return m;
}

TraceMatrix build_traces(const corpus::Corpus& corpus, const std::vector<FeatureDescriptor>& selected) {
  return build_traces(corpus, featurize_corpus(corpus), selected);
}

PcaResult pca_first_component(const TraceMatrix& matrix, const PcaOptions& options) {
  const std::size_t n = matrix.rows();
  if (n < 2) throw Error("too-few-rows", "PCA needs at least two annotators");

  PcaResult result;
  std::vector<std::vector<double>> z;  // standardized kept columns
  for (std::size_t c = 0; c < matrix.cols(); ++c) {
    const auto& d = matrix.columns[c];
    std::vector<double> col(n);
    for (std::size_t r = 0; r < n; ++r) col[r] = d.orientation * matrix.at(r, c);
    const double mean = stable_mean(col);
    const double sd = sample_sd(col, mean);
    if (sd == 0.0) {
      result.dropped.push_back(d.feature_id);
      result.warnings.push_back("dropped zero-variance column " + d.feature_id);
      continue;
    }
    for (double& x : col) x = (x - mean) / sd;
    result.feature_ids.push_back(d.feature_id);
    result.orientations.push_back(d.orientation);
    result.means.push_back(mean);
    result.sds.push_back(sd);
    z.push_back(std::move(col));
  }
  const std::size_t k = z.size();
  if (k < 2) throw Error("too-few-columns", "PCA needs at least two non-constant columns");

  std::vector<double> cov(k * k, 0.0);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a; b < k; ++b) {
      double acc = 0;
      for (std::size_t r = 0; r < n; ++r) acc += z[a][r] * z[b][r];
      cov[a * k + b] = cov[b * k + a] = acc / static_cast<double>(n - 1);
    }
  }

  auto multiply = [&](const std::vector<double>& v) {
    std::vector<double> out(k, 0.0);
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) out[a] += cov[a * k + b] * v[b];
    }
    return out;
  };
  auto norm = [](const std::vector<double>& v) {
    double acc = 0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
  };

  // Fixed pseudo-random start: not orthogonal to the top eigenvector
  // except on a measure-zero set.
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::vector<double> v(k);
  for (double& x : v) x = 0.5 + to_unit(rng());
  {
    const double s = norm(v);
    for (double& x : v) x /= s;
  }

  bool converged = false;
  for (int it = 1; it <= options.max_iterations; ++it) {
    auto w = multiply(v);
    const double s = norm(w);
    if (s == 0.0) throw Error("no-convergence", "covariance annihilated the iterate");
    double diff = 0;
    for (std::size_t i = 0; i < k; ++i) {
      w[i] /= s;
      diff += (w[i] - v[i]) * (w[i] - v[i]);
    }
    v = std::move(w);
    result.iterations = it;
    if (std::sqrt(diff) < options.tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw Error("no-convergence", "power iteration did not converge in " +
                                      std::to_string(options.max_iterations) + " iterations");
  }

  double sum = 0;
  for (double x : v) sum += x;
  if (sum < 0) {
    for (double& x : v) x = -x;
  }
  const auto cv = multiply(v);
  double lambda = 0;
  for (std::size_t i = 0; i < k; ++i) lambda += v[i] * cv[i];
  result.loadings = std::move(v);
  result.eigenvalue = std::max(lambda, 0.0);
  return result;
}

std::map<std::string, double> pca_project(const TraceMatrix& matrix, const PcaResult& pca) {
  std::vector<std::size_t> cols;
  for (const auto& id : pca.feature_ids) {
    auto c = matrix.column_index(id);
    if (!c) throw Error("column-mismatch", "fitted column '" + id + "' missing from matrix");
    cols.push_back(*c);
  }
  if (pca.loadings.size() != cols.size() || pca.means.size() != cols.size() ||
      pca.sds.size() != cols.size() || pca.orientations.size() != cols.size()) {
    throw Error("column-mismatch", "PCA result is internally inconsistent");
  }
  std::map<std::string, double> scores;
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    double s = 0;
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const double x = pca.orientations[j] * matrix.at(r, cols[j]);
      s += (x - pca.means[j]) / pca.sds[j] * pca.loadings[j];
    }
    scores[matrix.annotators[r]] = s;
  }
  return scores;
}

void append_pca(TraceMatrix& matrix, const std::map<std::string, double>& scores) {
  std::vector<double> col;
  for (const auto& a : matrix.annotators) {
    auto it = scores.find(a);
    if (it == scores.end()) throw Error("column-mismatch", "no pca score for annotator " + a);
    col.push_back(it->second);
  }
  matrix.append_column(find_feature("pca"), col);
}

}  // namespace htrace::heuristics
