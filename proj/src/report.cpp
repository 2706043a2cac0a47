#include "htrace/report.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "htrace/error.hpp"
#include "htrace/format.hpp"

namespace htrace::report {
namespace {

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string outcome_fields(const analysis::CorrelationOutcome& o, std::vector<std::string> prefix) {
  if (o.result) {
    prefix.push_back(format_double(o.result->r));
    prefix.push_back(format_double(o.result->p_two_sided));
    prefix.push_back(std::to_string(o.result->n));
    prefix.push_back("");
  } else {
    prefix.insert(prefix.end(), {"", "", "", o.error});
  }
  return csv_row(prefix);
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

void write_features_csv(std::ostream& out, const heuristics::FeatureTable& features) {
  auto ids = heuristics::example_feature_ids();
  std::sort(ids.begin(), ids.end());
  std::vector<std::string> header = {"example_id", "annotator_id"};
  header.insert(header.end(), ids.begin(), ids.end());
  out << csv_row(header);
  for (const auto& row : features.rows) {
    std::vector<std::string> fields = {row.example_id, row.annotator_id};
    for (const auto& id : ids) {
      try {
        fields.push_back(format_double(row.value(id)));
      } catch (const Error&) {
        fields.emplace_back();  // source field not recorded
      }
    }
    out << csv_row(fields);
  }
}

void write_traces_csv(std::ostream& out, const heuristics::TraceMatrix& traces) {
  std::vector<std::size_t> order;
  for (std::size_t c = 0; c < traces.cols(); ++c) {
    if (traces.columns[c].feature_id != "pca") order.push_back(c);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return traces.columns[a].feature_id < traces.columns[b].feature_id;
  });
  if (auto pca = traces.column_index("pca")) order.push_back(*pca);

  std::vector<std::string> header = {"annotator_id", "example_count"};
  for (auto c : order) header.push_back(traces.columns[c].feature_id);
  out << csv_row(header);
  for (std::size_t r = 0; r < traces.rows(); ++r) {
    std::vector<std::string> fields = {traces.annotators[r], std::to_string(traces.example_counts[r])};
    for (auto c : order) fields.push_back(format_double(traces.at(r, c)));
    out << csv_row(fields);
  }
}

void write_precision_csv(std::ostream& out, std::span<const analysis::PrecisionCurve> curves) {
  out << csv_row({"feature_id", "model_id", "k", "precision", "subset_size"});
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      out << csv_row({c.feature_id, c.model_id, format_double(p.k), format_double(p.precision),
                      std::to_string(p.subset_size)});
    }
  }
}

void write_correlations_csv(std::ostream& out, std::span<const ModelCorrelations> per_model) {
  out << csv_row({"model_id", "feature_id", "r", "p_two_sided", "n", "error"});
  for (const auto& [model_id, results] : per_model) {
    for (const auto& [feature, outcome] : results) out << outcome_fields(outcome, {model_id, feature});
  }
}

void write_influencers_csv(std::ostream& out, std::span<const analysis::InfluencerOutcome> cells) {
  out << csv_row({"feature_id", "factor", "mean_r", "annotators_used", "annotators_skipped", "approximate", "error"});
  for (const auto& c : cells) {
    if (c.cell) {
      out << csv_row({c.feature_id, analysis::to_string(c.factor), format_double(c.cell->mean_r),
                      std::to_string(c.cell->annotators_used), std::to_string(c.cell->annotators_skipped),
                      c.cell->approximate ? "true" : "false", ""});
    } else {
      out << csv_row({c.feature_id, analysis::to_string(c.factor), "", "", "", "", c.error});
    }
  }
}

void write_crt_scores_csv(std::ostream& out, std::span<const analysis::CrtScore> scores) {
  out << csv_row({"annotator_id", "test_id", "correct_count", "item_count", "accuracy"});
  for (const auto& s : scores) {
    out << csv_row({s.annotator_id, corpus::to_string(s.test_id), std::to_string(s.correct_count),
                    std::to_string(s.item_count), format_double(s.accuracy)});
  }
}

void write_crt_correlations_csv(std::ostream& out, std::span<const analysis::CrtCorrelation> cells) {
  out << csv_row({"feature_id", "test_id", "r", "p_two_sided", "n", "error"});
  for (const auto& c : cells) out << outcome_fields(c.outcome, {c.feature_id, corpus::to_string(c.test_id)});
}

void write_label_contrast_csv(std::ostream& out, const std::map<std::string, analysis::LabelContrast>& rows) {
  out << csv_row({"label", "subset_rate", "complement_rate", "difference_pp"});
  for (const auto& [label, c] : rows) {
    out << csv_row({label, format_double(c.group_rate), format_double(c.complement_rate),
                    format_double(c.difference)});
  }
}

std::string render_svg_curves(std::span<const analysis::PrecisionCurve> curves) {
  if (curves.empty()) throw Error("too-few-points", "no curves to draw");
  for (const auto& c : curves) {
    if (c.points.size() < 2) {
      throw Error("too-few-points", "curve for " + c.model_id + " has " + std::to_string(c.points.size()) +
                                        " point(s); at least 2 are needed");
    }
  }
  constexpr double width = 640, height = 400;
  constexpr double left = 60, right = 160, top = 30, bottom = 50;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  auto x_of = [&](double k) { return left + k / 100.0 * plot_w; };
  auto y_of = [&](double p) { return top + (1.0 - p) * plot_h; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
  svg << "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  svg << "<text x=\"" << fixed2(left + plot_w / 2) << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">"
      << "Precision of H_k (" << xml_escape(curves.front().feature_id) << ")</text>\n";
  svg << "<g stroke=\"black\" stroke-width=\"1\">\n";
  svg << "<line x1=\"" << fixed2(left) << "\" y1=\"" << fixed2(top + plot_h) << "\" x2=\"" << fixed2(left + plot_w)
      << "\" y2=\"" << fixed2(top + plot_h) << "\"/>\n";
  svg << "<line x1=\"" << fixed2(left) << "\" y1=\"" << fixed2(top) << "\" x2=\"" << fixed2(left)
      << "\" y2=\"" << fixed2(top + plot_h) << "\"/>\n";
  svg << "</g>\n<g font-size=\"11\">\n";
  for (int k = 0; k <= 100; k += 20) {
    svg << "<text x=\"" << fixed2(x_of(k)) << "\" y=\"" << fixed2(top + plot_h + 16)
        << "\" text-anchor=\"middle\">" << k << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double p = i * 0.25;
    svg << "<text x=\"" << fixed2(left - 6) << "\" y=\"" << fixed2(y_of(p) + 4) << "\" text-anchor=\"end\">"
        << fixed2(p) << "</text>\n";
  }
  svg << "<text x=\"" << fixed2(left + plot_w / 2) << "\" y=\"" << fixed2(height - 10)
      << "\" text-anchor=\"middle\">k (top percentile of annotators)</text>\n";
  svg << "<text x=\"15\" y=\"" << fixed2(top + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
      << fixed2(top + plot_h / 2) << ")\">precision</text>\n";
  svg << "</g>\n";

  for (std::size_t i = 0; i < curves.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t j = 0; j < curves[i].points.size(); ++j) {
      const auto& p = curves[i].points[j];
      if (j) svg << ' ';
      svg << fixed2(x_of(p.k)) << ',' << fixed2(y_of(p.precision));
    }
    svg << "\"/>\n";
  }
  if (curves.size() > 1) {
    svg << "<g class=\"legend\" font-size=\"12\">\n";
    for (std::size_t i = 0; i < curves.size(); ++i) {
      const double y = top + 10 + 20.0 * static_cast<double>(i);
      const double x = left + plot_w + 15;
      svg << "<line x1=\"" << fixed2(x) << "\" y1=\"" << fixed2(y) << "\" x2=\"" << fixed2(x + 20) << "\" y2=\""
          << fixed2(y) << "\" stroke=\"" << kPalette[i % std::size(kPalette)] << "\" stroke-width=\"2\"/>\n";
      svg << "<text x=\"" << fixed2(x + 26) << "\" y=\"" << fixed2(y + 4) << "\">" << xml_escape(curves[i].model_id)
          << "</text>\n";
    }
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_svg_curve(std::span<const analysis::PrecisionCurve> curves, const std::filesystem::path& path) {
  write_file(path, render_svg_curves(curves));
}

std::string config_hash(const std::map<std::string, std::string>& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& [k, v] : config) mix(k + "=" + v + "\n");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string timestamp_now() {
  std::time_t t = 0;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const std::filesystem::path& path, const ReportManifest& manifest) {
  nlohmann::json j;
  j["command"] = manifest.command;
  j["config_hash"] = manifest.config_hash;
  j["tool_version"] = manifest.tool_version;
  j["files"] = nlohmann::json::array();
  for (const auto& f : manifest.files) j["files"].push_back({{"path", f.path}, {"role", f.role}});
  j["timestamps"] = {{"started", manifest.started_at}, {"finished", manifest.finished_at}};
  write_file(path, j.dump(2) + "\n");
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("unwritable-file", "cannot write " + path.string());
  out << contents;
  if (!out) throw Error("unwritable-file", "write failed for " + path.string());
}

}  // namespace htrace::report
