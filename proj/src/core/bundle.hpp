#pragma once

// The stats bundle: a versioned JSON file carrying every statistic an analyze
// run produces (settings, skip reports, sample summaries, histograms, ranked
// fits, power fits). Reloadable both as a full analysis and as a
// ReferenceStats envelope. Every number is serialized as a shortest
// round-trip decimal string, so reload is lossless and output is byte-stable.

#include <string>

#include "core/pipeline.hpp"
#include "core/reference.hpp"

namespace branchstat {

inline constexpr const char* kBundleSchemaVersion = "1";

std::string bundle_to_json(const AnalysisResult& analysis);
AnalysisResult parse_bundle_json(const std::string& text);

void write_stats_bundle(const AnalysisResult& analysis, const std::string& path);
AnalysisResult load_stats_bundle(const std::string& path);

// load_stats_bundle followed by reference_from_analysis.
ReferenceStats load_reference_bundle(const std::string& path);

// Human-readable rendering of a bundle for the `report` command.
std::string render_bundle_markdown(const AnalysisResult& analysis);

}  // namespace branchstat
