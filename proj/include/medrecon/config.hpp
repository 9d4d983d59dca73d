#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "medrecon/backend.hpp"
#include "medrecon/evaluate.hpp"
#include "medrecon/serialise.hpp"

namespace medrecon {

struct BackendSelection {
    std::string kind = "mock";  // "live" | "mock"
    std::string url = "http://localhost:11434";
    MockMode mock_mode = MockMode::oracle;
    MockParams mock_params;
};

struct AnalysisOptions {
    int bonferroni_k = 4;
    char baseline_strategy = 'A';
    char challenger_strategy = 'C';
    int echo_prefix_chars = 80;
    int greeting_window_chars = 40;
    int long_name_chars = 50;
    int active_count_max_singleton_bin = 10;
    int omission_top_k = 5;
    // Cross-model tests on the challenger strategy, uncorrected (k=1).
    std::vector<std::pair<std::string, std::string>> cross_model_pairs;
};

struct CampaignConfig {
    std::filesystem::path cohort_manifest;
    std::filesystem::path ground_truth;
    std::filesystem::path prompt_dir;
    std::filesystem::path store_path;
    std::vector<Strategy> strategies = {kAllStrategies.begin(), kAllStrategies.end()};
    std::vector<ModelConfig> models;
    BackendSelection backend;
    AnalysisOptions analysis;
    int concurrency = 1;
    int max_attempts = 3;
};

/// Loads a JSON config file, then applies the two supported environment
/// overrides: MEDRECON_BACKEND_URL and MEDRECON_STORE_PATH.
CampaignConfig load_config(const std::filesystem::path& path);

FailureRules failure_rules_from(const AnalysisOptions& options);

}  // namespace medrecon
