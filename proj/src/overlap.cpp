#include "htrace/overlap.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "htrace/error.hpp"
#include "htrace/format.hpp"

namespace htrace::overlap {
namespace {

constexpr int kMaxHalvings = 60;
constexpr double kArmijo = 0.5;

// log(1 + e^z) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string piece;
  while (in >> piece) out.push_back(piece);
  return out;
}

std::optional<double> to_double(const std::string& s) {
  double v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) return std::nullopt;
  return v;
}

bool is_count(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

double norm(std::span<const double> v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

}  // namespace

bool EmbeddingTable::insert(const std::string& token, std::vector<double> vector) {
  if (vector.size() != dimension_) {
    throw Error("dimension-mismatch", "vector for '" + token + "' has " + std::to_string(vector.size()) +
                                          " components, table dimension is " + std::to_string(dimension_));
  }
  if (vectors_.count(token)) return false;
  Entry entry;
  const double n = norm(vector);
  if (n > 0) {
    entry.unit = vector;
    for (double& x : entry.unit) x /= n;
  }
  entry.raw = std::move(vector);
  vectors_.emplace(token, std::move(entry));
  return true;
}

const std::vector<double>* EmbeddingTable::unit(const std::string& token) const {
  auto it = vectors_.find(token);
  if (it == vectors_.end() || it->second.unit.empty()) return nullptr;
  return &it->second.unit;
}

const std::vector<double>* EmbeddingTable::raw(const std::string& token) const {
  auto it = vectors_.find(token);
  return it == vectors_.end() ? nullptr : &it->second.raw;
}

EmbeddingTable parse_embeddings(std::istream& in) {
  std::optional<EmbeddingTable> table;
  std::vector<std::string> early_warnings;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (!table && line_no == 1 && fields.size() == 2 && is_count(fields[0]) && is_count(fields[1])) {
      table.emplace(std::stoul(fields[1]));
      continue;
    }
    if (fields.size() < 2) {
      throw Error("malformed-line", "line " + std::to_string(line_no) + ": expected a token and components");
    }
    std::vector<double> v;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      auto x = to_double(fields[i]);
      if (!x) {
        throw Error("non-numeric", "line " + std::to_string(line_no) + ": component '" + fields[i] +
                                       "' is not a number");
      }
      v.push_back(*x);
    }
    if (!table) table.emplace(v.size());
    if (v.size() != table->dimension()) {
      throw Error("dimension-mismatch", "line " + std::to_string(line_no) + ": " + std::to_string(v.size()) +
                                            " components, expected " + std::to_string(table->dimension()));
    }
    auto normalized = text::tokenize(fields[0]);
    if (normalized.size() != 1) {
      table->warnings.push_back("line " + std::to_string(line_no) + ": token '" + fields[0] +
                                "' does not normalize to a single token, skipped");
      continue;
    }
    if (!table->insert(normalized[0], std::move(v))) {
      table->warnings.push_back("line " + std::to_string(line_no) + ": duplicate token '" + normalized[0] +
                                "', first occurrence kept");
    }
  }
  return table ? std::move(*table) : EmbeddingTable{};
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("unreadable-file", "cannot open " + path.string());
  return parse_embeddings(in);
}

OverlapContext::OverlapContext(const std::string& passage, const std::string& question,
                               const EmbeddingTable& table)
    : table_(&table), tokens_(text::tokenize(passage)) {
  tokens_.append(text::tokenize(question));
  if (tokens_.empty()) throw Error("empty-context", "passage and question have no tokens");
  for (const auto& t : tokens_) {
    auto [it, inserted] = vocabulary_.emplace(t, false);
    if (!inserted) continue;
    if (const auto* u = table.unit(t)) {
      it->second = true;
      unit_vectors_.push_back(u);
    }
  }
}

OverlapFeatureVector OverlapContext::features(const std::string& option) const {
  const auto opt = text::tokenize(option);
  if (opt.empty()) throw Error("empty-option", "option '" + option + "' has no tokens");

  OverlapFeatureVector f;
  f.subsequence = text::contains_contiguous(tokens_, opt) ? 1.0 : 0.0;
  std::size_t present = 0;
  double sum = 0;
  double worst = 0;
  for (const auto& t : opt) {
    auto in_context = vocabulary_.find(t);
    if (in_context != vocabulary_.end()) ++present;

    double best = 1.0;
    if (const auto* u = table_->unit(t)) {
      if (in_context != vocabulary_.end() && in_context->second) {
        best = 0.0;
      } else {
        for (const auto* c : unit_vectors_) {
          const double d = 1.0 - std::inner_product(u->begin(), u->end(), c->begin(), 0.0);
          best = std::min(best, std::clamp(d, 0.0, 2.0));
        }
      }
    }
    sum += best;
    worst = std::max(worst, best);
  }
  f.all_words = present == opt.size() ? 1.0 : 0.0;
  f.coverage = static_cast<double>(present) / static_cast<double>(opt.size());
  const double diff = std::fabs(static_cast<double>(tokens_.size()) - static_cast<double>(opt.size()));
  f.log_length_diff = std::log1p(diff);
  f.mean_min_distance = sum / static_cast<double>(opt.size());
  f.max_min_distance = worst;
  return f;
}

OverlapFeatureVector overlap_features(const std::string& passage, const std::string& question,
                                      const std::string& option, const EmbeddingTable& table) {
  return OverlapContext(passage, question, table).features(option);
}

Dataset extract_instances(const corpus::Corpus& corpus, const EmbeddingTable& table, Execution mode) {
  const auto n = corpus.examples.size();
  std::vector<std::array<FeatureRow, corpus::kOptionCount>> per_example(n);
  for_each_index(n, mode, [&](std::size_t i) {
    const auto& e = corpus.examples[i];
    if (static_cast<int>(e.options.size()) != corpus::kOptionCount) {
      throw Error("options-count", e.example_id + ": expected 4 options");
    }
    OverlapContext ctx(e.passage, e.question, table);
    for (int o = 0; o < corpus::kOptionCount; ++o) per_example[i][o] = ctx.features(e.options[o]).as_row();
  });
  Dataset data;
  for (std::size_t i = 0; i < n; ++i) {
    for (int o = 0; o < corpus::kOptionCount; ++o) {
      data.rows.push_back(per_example[i][o]);
      data.labels.push_back(o == corpus.examples[i].correct_index ? 1.0 : 0.0);
    }
  }
  return data;
}

RegularizedLogLoss::RegularizedLogLoss(std::span<const FeatureRow> standardized_rows,
                                       std::span<const double> labels, double C)
    : rows_(standardized_rows), labels_(labels), C_(C) {
  if (rows_.size() != labels_.size()) throw Error("length-mismatch", "rows and labels differ in length");
  if (rows_.empty()) throw Error("empty-dataset", "no training instances");
  if (!(C_ > 0)) throw Error("bad-regularization", "C must be positive");
}

double RegularizedLogLoss::value(std::span<const double> params) const {
  double loss = 0;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    double z = params[kFeatureCount];
    for (std::size_t j = 0; j < kFeatureCount; ++j) z += params[j] * rows_[i][j];
    loss += softplus(z) - labels_[i] * z;
  }
  double penalty = 0;
  for (std::size_t j = 0; j < kFeatureCount; ++j) penalty += params[j] * params[j];
  const double n = static_cast<double>(rows_.size());
  return loss / n + penalty / (2.0 * C_ * n);
}

std::vector<double> RegularizedLogLoss::gradient(std::span<const double> params) const {
  std::vector<double> g(kFeatureCount + 1, 0.0);
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    double z = params[kFeatureCount];
    for (std::size_t j = 0; j < kFeatureCount; ++j) z += params[j] * rows_[i][j];
    const double residual = sigmoid(z) - labels_[i];
    for (std::size_t j = 0; j < kFeatureCount; ++j) g[j] += residual * rows_[i][j];
    g[kFeatureCount] += residual;
  }
  const double n = static_cast<double>(rows_.size());
  for (std::size_t j = 0; j < kFeatureCount; ++j) g[j] = g[j] / n + params[j] / (C_ * n);
  g[kFeatureCount] /= n;
  return g;
}

FeatureRow LogisticModel::standardize(const FeatureRow& row) const {
  FeatureRow out{};
  for (std::size_t j = 0; j < kFeatureCount; ++j) out[j] = (row[j] - means[j]) / sds[j];
  return out;
}

double LogisticModel::probability(const FeatureRow& row) const {
  const auto x = standardize(row);
  double z = bias;
  for (std::size_t j = 0; j < kFeatureCount; ++j) z += weights[j] * x[j];
  return sigmoid(z);
}

LogisticModel train_logistic(const Dataset& data, const TrainingOptions& options) {
  const std::size_t n = data.rows.size();
  const double positives = std::accumulate(data.labels.begin(), data.labels.end(), 0.0);
  if (n == 0 || positives == 0.0 || positives == static_cast<double>(n)) {
    throw Error("degenerate-labels", "training data needs both positive and negative instances");
  }

  LogisticModel model;
  model.C = options.C;
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    double mean = 0;
    for (const auto& r : data.rows) mean += r[j];
    mean /= static_cast<double>(n);
    double var = 0;
    for (const auto& r : data.rows) var += (r[j] - mean) * (r[j] - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    model.means[j] = mean;
    model.sds[j] = sd > 0 ? sd : 1.0;
  }
  std::vector<FeatureRow> standardized;
  standardized.reserve(n);
  for (const auto& r : data.rows) standardized.push_back(model.standardize(r));

  RegularizedLogLoss objective(standardized, data.labels, options.C);
  std::vector<double> params(kFeatureCount + 1, 0.0);
  const double base_rate = positives / static_cast<double>(n);
  params[kFeatureCount] = std::log(base_rate / (1.0 - base_rate));

  double loss = objective.value(params);
  model.loss_history.push_back(loss);
  double step = 1.0;
  auto g = objective.gradient(params);
  double gnorm = norm(g);
  for (int it = 0; it < options.max_iterations && gnorm >= options.gradient_tolerance; ++it) {
    bool accepted = false;
    std::vector<double> trial(params.size());
    for (int h = 0; h < kMaxHalvings; ++h) {
      for (std::size_t j = 0; j < params.size(); ++j) trial[j] = params[j] - step * g[j];
      const double trial_loss = objective.value(trial);
      if (trial_loss <= loss - kArmijo * step * gnorm * gnorm) {
        params = trial;
        loss = trial_loss;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    model.loss_history.push_back(loss);
    model.iterations = it + 1;
    step *= 2.0;
    g = objective.gradient(params);
    gnorm = norm(g);
  }
  for (std::size_t j = 0; j < kFeatureCount; ++j) model.weights[j] = params[j];
  model.bias = params[kFeatureCount];
  model.final_loss = loss;
  model.gradient_norm = gnorm;
  return model;
}

LogisticModel train_overlap_model(const corpus::Corpus& corpus, const EmbeddingTable& table,
                                  const TrainingOptions& options) {
  return train_logistic(extract_instances(corpus, table), options);
}

int argmax_lowest(std::span<const double> values) {
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = static_cast<int>(i);
  }
  return best;
}

ModelPrediction predict_overlap(const LogisticModel& model, const corpus::AnnotationExample& example,
                                const EmbeddingTable& table) {
  if (static_cast<int>(example.options.size()) != corpus::kOptionCount) {
    throw Error("options-count", example.example_id + ": expected 4 options");
  }
  OverlapContext ctx(example.passage, example.question, table);
  ModelPrediction p;
  p.example_id = example.example_id;
  for (int o = 0; o < corpus::kOptionCount; ++o) {
    p.probabilities[o] = model.probability(ctx.features(example.options[o]).as_row());
  }
  p.predicted_index = argmax_lowest(p.probabilities);
  return p;
}

corpus::PredictionSet export_predictions(const LogisticModel& model, const corpus::Corpus& corpus,
                                         const EmbeddingTable& table, Execution mode) {
  std::vector<ModelPrediction> predictions(corpus.examples.size());
  for_each_index(predictions.size(), mode, [&](std::size_t i) {
    try {
      predictions[i] = predict_overlap(model, corpus.examples[i], table);
    } catch (const Error& e) {
      throw Error(e.code(), "example '" + corpus.examples[i].example_id + "': " + e.what());
    }
  });
  corpus::PredictionSet set;
  set.model_id = "overlap";
  for (const auto& p : predictions) {
    set.entries[p.example_id] = p.predicted_index;
    set.scores[p.example_id] = p.probabilities;
  }
  return set;
}

void write_model(std::ostream& out, const LogisticModel& model) {
  auto row = [&](const char* key, const FeatureRow& values) {
    out << key;
    for (double v : values) out << ' ' << format_double(v);
    out << '\n';
  };
  out << "htrace-overlap-model 1\n";
  out << "dimension " << kFeatureCount << '\n';
  out << "C " << format_double(model.C) << '\n';
  row("means", model.means);
  row("sds", model.sds);
  row("weights", model.weights);
  out << "bias " << format_double(model.bias) << '\n';
  out << "iterations " << model.iterations << '\n';
  out << "final_loss " << format_double(model.final_loss) << '\n';
  out << "gradient_norm " << format_double(model.gradient_norm) << '\n';
}

LogisticModel read_model(std::istream& in) {
  std::map<std::string, std::vector<std::string>> fields;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    auto parts = split_ws(line);
    if (parts.empty()) continue;
    if (!header) {
      if (parts.size() != 2 || parts[0] != "htrace-overlap-model" || parts[1] != "1") {
        throw Error("malformed-model", "missing 'htrace-overlap-model 1' header");
      }
      header = true;
      continue;
    }
    fields[parts[0]] = {parts.begin() + 1, parts.end()};
  }
  if (!header) throw Error("malformed-model", "empty model file");

  auto scalar = [&](const std::string& key) {
    auto it = fields.find(key);
    if (it == fields.end() || it->second.size() != 1) throw Error("malformed-model", "missing or bad '" + key + "'");
    auto v = to_double(it->second[0]);
    if (!v) throw Error("malformed-model", "'" + key + "' is not a number");
    return *v;
  };
  const auto dimension = scalar("dimension");
  if (dimension != static_cast<double>(kFeatureCount)) {
    throw Error("dimension-mismatch", "model dimension " + format_double(dimension) + ", expected " +
                                          std::to_string(kFeatureCount));
  }
  auto vec = [&](const std::string& key) {
    auto it = fields.find(key);
    if (it == fields.end()) throw Error("malformed-model", "missing '" + key + "'");
    if (it->second.size() != kFeatureCount) {
      throw Error("dimension-mismatch", "'" + key + "' has " + std::to_string(it->second.size()) + " values");
    }
    FeatureRow r{};
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      auto v = to_double(it->second[j]);
      if (!v) throw Error("malformed-model", "'" + key + "' has a non-numeric value");
      r[j] = *v;
    }
    return r;
  };
  LogisticModel m;
  m.C = scalar("C");
  m.means = vec("means");
  m.sds = vec("sds");
  m.weights = vec("weights");
  m.bias = scalar("bias");
  m.iterations = static_cast<int>(scalar("iterations"));
  m.final_loss = scalar("final_loss");
  m.gradient_norm = scalar("gradient_norm");
  for (double sd : m.sds) {
    if (!(sd > 0)) throw Error("malformed-model", "standard deviations must be positive");
  }
  return m;
}

void save_model(const std::filesystem::path& path, const LogisticModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("unwritable-file", "cannot write " + path.string());
  write_model(out, model);
}

LogisticModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("unreadable-file", "cannot open " + path.string());
  return read_model(in);
}

}  // namespace htrace::overlap
