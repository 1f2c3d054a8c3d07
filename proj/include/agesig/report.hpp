#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "agesig/density.hpp"
#include "agesig/hac.hpp"
#include "agesig/ingest.hpp"
#include "agesig/selection.hpp"
#include "agesig/synth.hpp"

namespace agesig {

// Full-pipeline configuration. Input is either a record file or an inline
// synthetic-population spec.
struct PipelineConfig {
  std::string input_path;
  ParseSchema schema;
  std::optional<PopulationSpec> synth_spec;

  int min_patients = 50;
  int k_max = 20;
  std::optional<int> k_override;  // skips elbow selection; must be in [1, k_max]

  std::optional<double> kde_bandwidth;  // nullopt = automatic
  bool emit_kde = false;
  bool emit_svg = false;
  int top_n = 4;

  std::string output_dir = "out";
};

struct ClusterSummary {
  int member_count = 0;
  long long total_patients = 0;
  EcdfVector mean_ecdf;
  std::vector<std::pair<Icd10Category, long long>> top;
};

struct ClusterReport {
  int k = 0;
  std::optional<int> selected_k;  // elbow choice; absent under k override
  std::vector<std::pair<Icd10Category, int>> labels;  // sorted by code
  std::vector<ClusterSummary> clusters;
};

struct CodeCount {
  Icd10Category code;
  long long patients = 0;
};

// The top_n highest-patient-count codes of every cluster; ties break toward
// the lexicographically smaller code.
std::vector<std::vector<CodeCount>> top_codes(std::span<const CodeCount> counts,
                                              std::span<const int> labels,
                                              int k, int top_n);

// Runs ingest -> signatures -> clustering -> selection -> summaries and
// writes the output file set plus a manifest with a digest per file.
// Errors carry the failing stage in their message.
ClusterReport run_pipeline(const PipelineConfig& config);

// Exit-code mapping shared by the CLI: 2 for input/parse failures, 3 for
// numerical/degenerate failures.
int classify_exit(const std::exception& error);

std::string sha256_hex(std::string_view bytes);

}  // namespace agesig
