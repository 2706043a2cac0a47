#include "htrace/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "htrace/analysis.hpp"
#include "htrace/corpus.hpp"
#include "htrace/crt.hpp"
#include "htrace/error.hpp"
#include "htrace/format.hpp"
#include "htrace/heuristics.hpp"
#include "htrace/overlap.hpp"
#include "htrace/report.hpp"
#include "htrace/splits.hpp"

namespace htrace::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Common {
  std::string out_dir;
  std::string out;
  std::string manifest;
};

struct CorpusOptions {
  std::string path;
  int min_examples = 5;
  bool keep_invalid = false;
};

struct FeatureOptions {
  std::vector<std::string> features;
  std::vector<std::string> orient;
  bool no_pca = false;
};

struct Session {
  std::ostream& out;
  std::ostream& err;
  std::string command;
  Common common;
  std::vector<report::ProducedFile> produced;

  fs::path resolve(const std::string& explicit_path, const std::string& default_name) const {
    if (!explicit_path.empty()) return explicit_path;
    return fs::path(common.out_dir) / default_name;
  }

  // Writes to stdout for "-", otherwise to the file, and records it.
  void emit(const std::string& explicit_path, const std::string& default_name, const std::string& role,
            const std::string& contents) {
    if (explicit_path == "-") {
      out << contents;
      return;
    }
    const auto path = resolve(explicit_path, default_name);
    report::write_file(path, contents);
    produced.push_back({path.generic_string(), role});
  }

  void warn(const std::vector<std::string>& warnings) const {
    for (const auto& w : warnings) err << "warning: " << w << '\n';
  }
};

class PercentValidator : public CLI::Validator {
 public:
  PercentValidator() {
    name_ = "PERCENT";
    func_ = [](std::string& s) -> std::string {
      double v = 0;
      try {
        std::size_t used = 0;
        v = std::stod(s, &used);
        if (used != s.size()) return "'" + s + "' is not a number";
      } catch (const std::exception&) {
        return "'" + s + "' is not a number";
      }
      if (!(v > 0.0 && v <= 100.0)) return "percentile " + s + " must lie in (0, 100]";
      return {};
    };
  }
};

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  for (const auto& piece : split_list(text)) {
    double v = 0;
    try {
      std::size_t used = 0;
      v = std::stod(piece, &used);
      if (used != piece.size()) throw std::invalid_argument(piece);
    } catch (const std::exception&) {
      throw UsageError("k grid value '" + piece + "' is not a number");
    }
    if (!(v > 0.0 && v <= 100.0)) throw UsageError("k grid value " + piece + " must lie in (0, 100]");
    grid.push_back(v);
  }
  if (grid.empty()) throw UsageError("empty k grid");
  return grid;
}

std::map<std::string, int> parse_orientations(const std::vector<std::string>& specs) {
  std::map<std::string, int> out;
  for (const auto& s : specs) {
    auto eq = s.find('=');
    if (eq == std::string::npos) throw UsageError("--orient expects id=+1 or id=-1, got '" + s + "'");
    const auto value = s.substr(eq + 1);
    if (value == "+1" || value == "1") {
      out[s.substr(0, eq)] = 1;
    } else if (value == "-1") {
      out[s.substr(0, eq)] = -1;
    } else {
      throw UsageError("--orient value must be +1 or -1, got '" + value + "'");
    }
  }
  return out;
}

corpus::Corpus load_checked(Session& s, const CorpusOptions& opts) {
  auto c = corpus::load_corpus(opts.path);
  auto report = corpus::validate_corpus(c);
  if (!report.warnings.empty()) {
    s.err << "note: " << report.warnings.size() << " validation warning(s) in " << opts.path << '\n';
  }
  for (const auto& e : report.errors) s.err << "error: " << e.example_id << " " << e.rule << ": " << e.message << '\n';
  corpus::require_valid(report);
  return corpus::filter_eligible(c, opts.min_examples, !opts.keep_invalid);
}

std::vector<heuristics::FeatureDescriptor> selected_features(const FeatureOptions& opts, bool& want_pca) {
  std::vector<std::string> ids;
  if (opts.features.empty()) {
    for (const auto& d : heuristics::default_trace_features()) ids.push_back(d.feature_id);
  } else if (opts.features.size() == 1 && opts.features[0] == "all") {
    for (const auto& d : heuristics::feature_catalog()) {
      if (d.feature_id != "pca") ids.push_back(d.feature_id);
    }
  } else {
    ids = opts.features;
  }
  want_pca = !opts.no_pca;
  std::erase_if(ids, [](const std::string& id) { return id == "pca"; });
  try {
    return heuristics::select_features(ids, parse_orientations(opts.orient));
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

struct TraceBundle {
  heuristics::FeatureTable features;
  heuristics::TraceMatrix traces;
  std::optional<heuristics::PcaResult> pca;
  std::map<std::string, double> scores;
};

// Features, traces, and (when possible) the appended pca column.
TraceBundle build_bundle(Session& s, const corpus::Corpus& c, const FeatureOptions& opts, bool pca_required) {
  bool want_pca = false;
  auto selected = selected_features(opts, want_pca);
  TraceBundle b;
  b.features = heuristics::featurize_corpus(c);
  s.warn(b.features.warnings);
  b.traces = heuristics::build_traces(c, b.features, selected);
  s.warn(b.traces.warnings);
  if (want_pca || pca_required) {
    try {
      b.pca = heuristics::pca_first_component(b.traces);
      s.warn(b.pca->warnings);
      b.scores = heuristics::pca_project(b.traces, *b.pca);
      heuristics::append_pca(b.traces, b.scores);
    } catch (const Error& e) {
      if (pca_required) throw;
      s.err << "warning: pca column omitted: " << e.what() << '\n';
    }
  }
  return b;
}

void add_common(CLI::App* sub, Common& common, const std::string& out_help) {
  sub->add_option("--out", common.out, out_help + " ('-' for stdout)");
  sub->add_option("--out-dir", common.out_dir, "Directory for default outputs and the manifest")
      ->envname("HTRACE_OUT_DIR");
  sub->add_option("--manifest", common.manifest, "Manifest path (default <out-dir>/<command>.manifest.json)");
}

void add_corpus(CLI::App* sub, CorpusOptions& opts, int default_min, const std::string& flag = "--corpus") {
  opts.min_examples = default_min;
  sub->add_option(flag, opts.path, "Corpus file (JSON lines)")->required()->check(CLI::ExistingFile);
  sub->add_option("--min-examples", opts.min_examples, "Drop annotators with fewer examples")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  sub->add_flag("--keep-invalid", opts.keep_invalid, "Keep examples flagged valid=false");
}

void add_features(CLI::App* sub, FeatureOptions& opts) {
  sub->add_option("--features", opts.features, "Trace features (comma list, or 'all')")->delimiter(',');
  sub->add_option("--orient", opts.orient, "Orientation override id=+1|-1 (repeatable)")->delimiter(',');
  sub->add_flag("--no-pca", opts.no_pca, "Do not append the pca column");
}

std::map<std::string, std::string> option_snapshot(const CLI::App* sub) {
  std::map<std::string, std::string> snapshot;
  for (const auto* opt : sub->get_options()) {
    const auto name = opt->get_name();
    if (name == "--help" || name == "--out-dir" || name == "--manifest") continue;
    std::string joined;
    for (const auto& r : opt->results()) joined += r + ";";
    snapshot[name] = joined;
  }
  snapshot["command"] = sub->get_name();
  return snapshot;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Annotator heuristic-trace diagnostics for multiple-choice reading-comprehension corpora"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file supplying flag values (flags win)");
  app.set_version_flag("--version", report::kToolVersion);

  Session s{out, err, {}, {}, {}};
  const char* env_dir = std::getenv("HTRACE_OUT_DIR");
  s.common.out_dir = env_dir ? env_dir : ".";

  CorpusOptions corpus_opts;
  FeatureOptions feature_opts;
  std::string feature_id;
  double k = 0;
  std::vector<std::string> prediction_paths;
  std::string grid_text = "10,20,30,40,50,60,70,80,90,100";
  std::string svg_path;
  bool pooled = false;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::string embeddings_path, model_path, surveys_path, keys_path;
  double C = 100;
  int max_iter = 100;
  std::vector<std::string> labels;
  PercentValidator percent;

  std::map<std::string, std::function<int()>> handlers;

  auto* validate = app.add_subcommand("validate", "Check a corpus against the record rules");
  add_common(validate, s.common, "Validation report (JSON)");
  validate->add_option("--corpus", corpus_opts.path, "Corpus file")->required()->check(CLI::ExistingFile);
  handlers["validate"] = [&] {
    auto c = corpus::load_corpus(corpus_opts.path);
    auto report = corpus::validate_corpus(c);
    json j;
    j["errors"] = json::array();
    j["warnings"] = json::array();
    for (const auto& e : report.errors) {
      j["errors"].push_back({{"example_id", e.example_id}, {"rule", e.rule}, {"message", e.message}});
      s.err << "error: " << e.example_id << " " << e.rule << ": " << e.message << '\n';
    }
    for (const auto& w : report.warnings) {
      j["warnings"].push_back({{"example_id", w.example_id}, {"rule", w.rule}, {"message", w.message}});
    }
    s.emit(s.common.out, "validation.json", "validation-report", j.dump(2) + "\n");
    return report.ok() ? kExitOk : kExitDataError;
  };

  auto* featurize = app.add_subcommand("featurize", "Per-example heuristic features");
  add_common(featurize, s.common, "Feature CSV");
  add_corpus(featurize, corpus_opts, 1);
  handlers["featurize"] = [&] {
    auto c = load_checked(s, corpus_opts);
    auto table = heuristics::featurize_corpus(c);
    s.warn(table.warnings);
    std::ostringstream csv;
    report::write_features_csv(csv, table);
    s.emit(s.common.out, "features.csv", "features", csv.str());
    return kExitOk;
  };

  auto* traces = app.add_subcommand("traces", "Per-annotator heuristic traces");
  add_common(traces, s.common, "Trace CSV");
  add_corpus(traces, corpus_opts, 5);
  add_features(traces, feature_opts);
  handlers["traces"] = [&] {
    auto c = load_checked(s, corpus_opts);
    auto b = build_bundle(s, c, feature_opts, false);
    std::ostringstream csv;
    report::write_traces_csv(csv, b.traces);
    s.emit(s.common.out, "traces.csv", "traces", csv.str());
    return kExitOk;
  };

  auto* pca = app.add_subcommand("pca", "First principal component of the trace matrix");
  add_common(pca, s.common, "PCA result (JSON)");
  add_corpus(pca, corpus_opts, 5);
  add_features(pca, feature_opts);
  handlers["pca"] = [&] {
    auto c = load_checked(s, corpus_opts);
    feature_opts.no_pca = false;
    auto b = build_bundle(s, c, feature_opts, true);
    const auto& p = *b.pca;
    json j;
    j["feature_ids"] = p.feature_ids;
    j["orientations"] = p.orientations;
    j["loadings"] = p.loadings;
    j["eigenvalue"] = p.eigenvalue;
    j["means"] = p.means;
    j["sds"] = p.sds;
    j["dropped"] = p.dropped;
    j["iterations"] = p.iterations;
    j["scores"] = b.scores;
    s.emit(s.common.out, "pca.json", "pca", j.dump(2) + "\n");
    return kExitOk;
  };

  auto* subsets = app.add_subcommand("subsets", "Examples of the top-k% heuristic-seeking annotators");
  add_common(subsets, s.common, "Subset (JSON)");
  add_corpus(subsets, corpus_opts, 5);
  add_features(subsets, feature_opts);
  subsets->add_option("--feature", feature_id, "Trace feature ranking the annotators")->required();
  subsets->add_option("--k", k, "Top percentile, in (0, 100]")->required()->check(percent);
  handlers["subsets"] = [&] {
    auto c = load_checked(s, corpus_opts);
    auto b = build_bundle(s, c, feature_opts, feature_id == "pca");
    auto subset = analysis::heuristic_subset(c, b.traces, feature_id, k);
    json j;
    j["feature_id"] = subset.feature_id;
    j["k"] = subset.k;
    j["member_annotators"] = subset.member_annotators;
    j["member_examples"] = subset.member_examples;
    s.emit(s.common.out, "subset.json", "subset", j.dump(2) + "\n");
    return kExitOk;
  };

  auto* curve = app.add_subcommand("precision-curve", "Precision of H_k as solvable by biased models");
  add_common(curve, s.common, "Precision CSV");
  add_corpus(curve, corpus_opts, 5);
  add_features(curve, feature_opts);
  curve->add_option("--feature", feature_id, "Trace feature ranking the annotators")->required();
  curve->add_option("--predictions", prediction_paths, "Prediction file(s)")->required()->check(CLI::ExistingFile);
  curve->add_option("--k-grid", grid_text, "Comma-separated percentiles")->capture_default_str();
  curve->add_option("--svg", svg_path, "Also draw the curves to this SVG file");
  handlers["precision-curve"] = [&] {
    const auto grid = parse_grid(grid_text);
    auto c = load_checked(s, corpus_opts);
    auto b = build_bundle(s, c, feature_opts, feature_id == "pca");
    std::vector<analysis::PrecisionCurve> curves;
    for (const auto& path : prediction_paths) {
      auto preds = corpus::load_predictions(path);
      s.warn(preds.warnings);
      curves.push_back(analysis::precision_curve(c, b.traces, feature_id, preds, grid));
    }
    std::ostringstream csv;
    report::write_precision_csv(csv, curves);
    s.emit(s.common.out, "precision.csv", "precision-curve", csv.str());
    if (!svg_path.empty()) s.emit(svg_path, "", "precision-svg", report::render_svg_curves(curves));
    return kExitOk;
  };

  auto* correlate = app.add_subcommand("correlate", "Correlate traces with biased-model accuracy");
  add_common(correlate, s.common, "Correlation CSV");
  add_corpus(correlate, corpus_opts, 5);
  add_features(correlate, feature_opts);
  correlate->add_option("--predictions", prediction_paths, "Prediction file(s)")->required()->check(CLI::ExistingFile);
  correlate->add_flag("--pooled", pooled, "Pool all examples instead of averaging per annotator");
  handlers["correlate"] = [&] {
    auto c = load_checked(s, corpus_opts);
    std::vector<report::ModelCorrelations> rows;
    if (pooled) {
      bool unused = false;
      auto selected = selected_features(feature_opts, unused);
      std::vector<std::string> ids;
      for (const auto& d : selected) ids.push_back(d.feature_id);
      auto table = heuristics::featurize_corpus(c);
      s.warn(table.warnings);
      for (const auto& path : prediction_paths) {
        auto preds = corpus::load_predictions(path);
        s.warn(preds.warnings);
        rows.emplace_back(preds.model_id, analysis::pooled_bias_correlation(c, table, preds, ids));
      }
    } else {
      auto b = build_bundle(s, c, feature_opts, false);
      for (const auto& path : prediction_paths) {
        auto preds = corpus::load_predictions(path);
        s.warn(preds.warnings);
        rows.emplace_back(preds.model_id, analysis::annotator_bias_correlation(b.traces, c, preds));
      }
    }
    std::ostringstream csv;
    report::write_correlations_csv(csv, rows);
    s.emit(s.common.out, pooled ? "correlations_pooled.csv" : "correlations.csv", "correlations", csv.str());
    return kExitOk;
  };

  auto* influencers = app.add_subcommand("influencers", "Per-annotator correlations with task factors");
  add_common(influencers, s.common, "Influencer CSV");
  add_corpus(influencers, corpus_opts, 5);
  influencers->add_option("--features", feature_opts.features, "Example-level features (comma list)")
      ->delimiter(',');
  handlers["influencers"] = [&] {
    auto c = load_checked(s, corpus_opts);
    std::vector<std::string> ids = feature_opts.features;
    if (ids.empty()) ids = {"lowtime_4", "loweffort_4", "first_option", "serial_position", "copying_3"};
    for (const auto& id : ids) {
      try {
        if (heuristics::find_feature(id).level != heuristics::Level::example) {
          throw UsageError("influencers need example-level features; '" + id + "' is per annotator");
        }
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
    }
    auto table = heuristics::featurize_corpus(c);
    s.warn(table.warnings);
    auto cells = analysis::influencer_correlations(c, table, ids);
    std::ostringstream csv;
    report::write_influencers_csv(csv, cells);
    s.emit(s.common.out, "influencers.csv", "influencers", csv.str());
    return kExitOk;
  };

  auto* splits = app.add_subcommand("splits", "Heuristic, random-annotator and random-pooled splits");
  add_common(splits, s.common, "Output directory for split files");
  add_corpus(splits, corpus_opts, 5);
  add_features(splits, feature_opts);
  double split_k = 33;
  splits->add_option("--feature", feature_id, "Trace feature ranking the annotators")->required();
  splits->add_option("--k", split_k, "Top percentile for the heuristic split")->capture_default_str()->check(percent);
  splits->add_option("--seeds", seeds, "Seeds for the random splits")->delimiter(',')->capture_default_str();
  handlers["splits"] = [&] {
    auto c = load_checked(s, corpus_opts);
    auto b = build_bundle(s, c, feature_opts, feature_id == "pca");
    auto set = analysis::make_splits(c, b.traces, feature_id, split_k, seeds);
    s.warn(set.warnings);
    const auto dir = s.resolve(s.common.out == "-" ? "" : s.common.out, "splits");
    for (const auto& p : analysis::write_splits(dir, c, set, feature_id, split_k)) {
      s.produced.push_back({p.generic_string(), p.filename() == "splits.json" ? "split-manifest" : "split"});
    }
    return kExitOk;
  };

  CorpusOptions train_opts;
  auto* train = app.add_subcommand("overlap-train", "Train the lexical-overlap logistic model");
  add_common(train, s.common, "Model file");
  add_corpus(train, train_opts, 1, "--train");
  train->add_option("--embeddings", embeddings_path, "Embedding table")->required()->check(CLI::ExistingFile);
  train->add_option("--C", C, "Inverse regularization strength")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--max-iter", max_iter, "Iteration cap")->capture_default_str()->check(CLI::PositiveNumber);
  handlers["overlap-train"] = [&] {
    auto c = load_checked(s, train_opts);
    auto table = overlap::load_embeddings(embeddings_path);
    s.warn(table.warnings);
    auto model = overlap::train_overlap_model(c, table, {C, max_iter});
    s.err << "trained: " << model.iterations << " iterations, loss " << format_double(model.final_loss)
          << ", gradient norm " << format_double(model.gradient_norm) << '\n';
    std::ostringstream text;
    overlap::write_model(text, model);
    s.emit(s.common.out, "overlap_model.txt", "model", text.str());
    return kExitOk;
  };

  auto* predict = app.add_subcommand("overlap-predict", "Predict with a trained overlap model");
  add_common(predict, s.common, "Prediction file (JSON lines)");
  add_corpus(predict, corpus_opts, 1);
  predict->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
  predict->add_option("--embeddings", embeddings_path, "Embedding table")->required()->check(CLI::ExistingFile);
  handlers["overlap-predict"] = [&] {
    auto c = load_checked(s, corpus_opts);
    auto model = overlap::load_model(model_path);
    auto table = overlap::load_embeddings(embeddings_path);
    s.warn(table.warnings);
    auto preds = overlap::export_predictions(model, c, table);
    std::ostringstream text;
    corpus::write_predictions(text, preds);
    s.emit(s.common.out, "overlap_predictions.jsonl", "predictions", text.str());
    return kExitOk;
  };

  auto* crt_score = app.add_subcommand("crt-score", "Score CRT survey responses");
  add_common(crt_score, s.common, "Score CSV");
  crt_score->add_option("--surveys", surveys_path, "Survey file")->required()->check(CLI::ExistingFile);
  crt_score->add_option("--keys", keys_path, "Answer-key file (default: built-in keys)")->check(CLI::ExistingFile);
  auto load_keys = [&] { return keys_path.empty() ? analysis::default_crt_keys() : analysis::load_crt_keys(keys_path); };
  handlers["crt-score"] = [&] {
    auto responses = corpus::load_surveys(surveys_path);
    auto scores = analysis::score_surveys(responses, load_keys());
    std::ostringstream csv;
    report::write_crt_scores_csv(csv, scores);
    s.emit(s.common.out, "crt_scores.csv", "crt-scores", csv.str());
    return kExitOk;
  };

  auto* crt_corr = app.add_subcommand("crt-correlate", "Correlate CRT accuracy with heuristic traces");
  add_common(crt_corr, s.common, "Correlation CSV");
  add_corpus(crt_corr, corpus_opts, 5);
  add_features(crt_corr, feature_opts);
  crt_corr->add_option("--surveys", surveys_path, "Survey file")->required()->check(CLI::ExistingFile);
  crt_corr->add_option("--keys", keys_path, "Answer-key file (default: built-in keys)")->check(CLI::ExistingFile);
  handlers["crt-correlate"] = [&] {
    auto c = load_checked(s, corpus_opts);
    auto b = build_bundle(s, c, feature_opts, false);
    auto responses = corpus::load_surveys(surveys_path);
    auto scores = analysis::score_surveys(responses, load_keys());
    auto cells = analysis::crt_trace_correlations(scores, b.traces);
    std::ostringstream csv;
    report::write_crt_correlations_csv(csv, cells);
    s.emit(s.common.out, "crt_correlations.csv", "crt-correlations", csv.str());
    return kExitOk;
  };

  auto* qual = app.add_subcommand("qualitative-diff", "Label rates in H_k versus the remaining examples");
  add_common(qual, s.common, "Contrast CSV");
  add_corpus(qual, corpus_opts, 5);
  add_features(qual, feature_opts);
  qual->add_option("--feature", feature_id, "Trace feature ranking the annotators")->required();
  double qual_k = 25;
  qual->add_option("--k", qual_k, "Top percentile")->capture_default_str()->check(percent);
  qual->add_option("--labels", labels, "Label universe (default: all labels present)")->delimiter(',');
  handlers["qualitative-diff"] = [&] {
    auto c = load_checked(s, corpus_opts);
    auto b = build_bundle(s, c, feature_opts, feature_id == "pca");
    auto subset = analysis::heuristic_subset(c, b.traces, feature_id, qual_k);
    auto eligible = analysis::eligible_examples(c, b.traces);
    corpus::Corpus scoped;
    for (const auto* e : eligible) scoped.examples.push_back(*e);
    std::set<std::string> universe(labels.begin(), labels.end());
    if (universe.empty()) universe = analysis::label_universe(scoped);
    auto rows = analysis::qualitative_diff(scoped, subset, universe);
    std::ostringstream csv;
    report::write_label_contrast_csv(csv, rows);
    s.emit(s.common.out, "qualitative_diff.csv", "qualitative-diff", csv.str());
    return kExitOk;
  };

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  s.command = chosen->get_name();
  report::ReportManifest manifest;
  manifest.command = s.command;
  manifest.config_hash = report::config_hash(option_snapshot(chosen));
  manifest.started_at = report::timestamp_now();

  int code = kExitOk;
  try {
    code = handlers.at(s.command)();
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  }
  if (code != kExitOk) return code;

  manifest.files = s.produced;
  manifest.finished_at = report::timestamp_now();
  const auto manifest_path = s.common.manifest.empty()
                                 ? fs::path(s.common.out_dir) / (s.command + ".manifest.json")
                                 : fs::path(s.common.manifest);
  try {
    report::write_manifest(manifest_path, manifest);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  }
  return kExitOk;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace htrace::cli
