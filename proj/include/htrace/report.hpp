#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "htrace/analysis.hpp"
#include "htrace/crt.hpp"
#include "htrace/heuristics.hpp"

namespace htrace::report {

inline constexpr const char* kToolVersion = "0.1.0";

// example_id,annotator_id,<example-level feature ids, sorted>
void write_features_csv(std::ostream& out, const heuristics::FeatureTable& features);
// annotator_id,example_count,<feature ids sorted, pca excluded>,pca
// (the pca column only when the matrix carries it)
void write_traces_csv(std::ostream& out, const heuristics::TraceMatrix& traces);
// feature_id,model_id,k,precision,subset_size
void write_precision_csv(std::ostream& out, std::span<const analysis::PrecisionCurve> curves);
// model_id,feature_id,r,p_two_sided,n,error
using ModelCorrelations = std::pair<std::string, std::map<std::string, analysis::CorrelationOutcome>>;
void write_correlations_csv(std::ostream& out, std::span<const ModelCorrelations> per_model);
// feature_id,factor,mean_r,annotators_used,annotators_skipped,approximate,error
void write_influencers_csv(std::ostream& out, std::span<const analysis::InfluencerOutcome> cells);
// annotator_id,test_id,correct_count,item_count,accuracy
void write_crt_scores_csv(std::ostream& out, std::span<const analysis::CrtScore> scores);
// feature_id,test_id,r,p_two_sided,n,error
void write_crt_correlations_csv(std::ostream& out, std::span<const analysis::CrtCorrelation> cells);
// label,subset_rate,complement_rate,difference_pp
void write_label_contrast_csv(std::ostream& out, const std::map<std::string, analysis::LabelContrast>& rows);

// Standalone SVG line chart: k on x, precision in [0,1] on y, one polyline
// per curve, legend when more than one. Throws Error("too-few-points") if a
// curve has fewer than two points.
std::string render_svg_curves(std::span<const analysis::PrecisionCurve> curves);
void emit_svg_curve(std::span<const analysis::PrecisionCurve> curves, const std::filesystem::path& path);

struct ProducedFile {
  std::string path;
  std::string role;
};

struct ReportManifest {
  std::string command;
  std::string config_hash;
  std::vector<ProducedFile> files;
  std::string tool_version = kToolVersion;
  std::string started_at;
  std::string finished_at;
};

// 16 hex digits of FNV-1a over "key=value\n" lines in key order.
std::string config_hash(const std::map<std::string, std::string>& config);

// UTC ISO-8601. Honors SOURCE_DATE_EPOCH so reruns can be byte-identical.
std::string timestamp_now();

void write_manifest(const std::filesystem::path& path, const ReportManifest& manifest);

// Writes text to a file, throwing Error("unwritable-file") on failure.
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace htrace::report
