#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "medrecon/analyse.hpp"
#include "medrecon/evaluate.hpp"
#include "medrecon/fhir.hpp"
#include "medrecon/store.hpp"

namespace medrecon {

// File formats are documented in README.md. The manifest and ground-truth
// files are tab-separated with a leading '#' header line; tables and figure
// data are RFC-4180 CSV.

struct ManifestEntry {
    std::string patient_id;
    std::string source_path;
    int age_years = 0;
    double history_span_years = 0.0;
    int active_count = 0;
};

void write_cohort_manifest(const std::filesystem::path& path,
                           const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_cohort_manifest(const std::filesystem::path& path);

void write_ground_truth(const std::filesystem::path& path,
                        const std::vector<GroundTruth>& cohort);
std::map<std::string, GroundTruth> read_ground_truth(const std::filesystem::path& path);

struct SerialiseManifestEntry {
    std::string patient_id;
    char strategy = 'A';
    int resource_count_serialised = 0;
    bool cap_applied = false;
    size_t prompt_chars = 0;  // character-count estimate of the full prompt
};

void write_serialise_manifest(const std::filesystem::path& path,
                              const std::vector<SerialiseManifestEntry>& entries);

/// <prompt_dir>/<patient_id>/<strategy>.txt
std::filesystem::path prompt_path(const std::filesystem::path& prompt_dir,
                                  const std::string& patient_id, Strategy strategy);

void write_metric_rows(const std::filesystem::path& path,
                       const std::vector<MetricRow>& rows);
std::vector<MetricRow> read_metric_rows(const std::filesystem::path& path);

/// Aggregate summary, one row per (model, strategy).
void write_summary_csv(const std::filesystem::path& path,
                       const std::vector<AggregateRow>& rows);
std::string render_summary_text(const std::vector<AggregateRow>& rows);

/// Signed-rank comparison table.
void write_stats_csv(const std::filesystem::path& path,
                     const std::vector<ComparisonRow>& rows);
std::string render_stats_text(const std::vector<ComparisonRow>& rows);

// Per-figure data files, one CSV each.
void write_heatmap_csv(const std::filesystem::path& path,
                       const std::vector<AggregateRow>& rows);
void write_strategy_rank_csv(const std::filesystem::path& path,
                             const std::vector<AggregateRow>& rows,
                             const std::vector<std::string>& model_order);
void write_pr_scatter_csv(const std::filesystem::path& path,
                          const std::vector<AggregateRow>& rows);
void write_recall_bins_csv(
    const std::filesystem::path& path,
    const std::vector<std::tuple<std::string, char, StratifiedRecall>>& rows);
void write_failure_breakdown_csv(
    const std::filesystem::path& path,
    const std::vector<std::tuple<std::string, char, FailureClass, int>>& rows);
void write_f1_distribution_csv(const std::filesystem::path& path,
                               const std::vector<MetricRow>& rows);
void write_omission_summary_csv(
    const std::filesystem::path& path,
    const std::vector<std::tuple<std::string, char, OmissionReport>>& reports);
void write_omission_top_missed_csv(
    const std::filesystem::path& path,
    const std::vector<std::tuple<std::string, char, OmissionReport>>& reports);

std::string csv_escape(std::string_view field);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace medrecon
