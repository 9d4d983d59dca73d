#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <vector>

#include "medrecon/backend.hpp"
#include "medrecon/store.hpp"

namespace medrecon {

struct CampaignOptions {
    int max_attempts = 3;
    std::chrono::milliseconds backoff_base{200};  // doubled per retry
    int concurrency = 1;  // backend calls in flight; results append in key order
};

struct CampaignReport {
    size_t completed = 0;
    size_t skipped = 0;
    size_t failed = 0;
    std::vector<std::string> failures;  // "patient/model/strategy: message"
};

/// Maps (patient_id, strategy) to the full prompt text.
using PromptSource = std::function<std::string(const std::string&, Strategy)>;

/// One inference call with retries. Transport failures are retried with
/// exponential backoff up to max_attempts, then rethrown; they are never
/// converted into an empty raw_output.
RunResult run_inference(const GenerationRequest& request, const ModelConfig& model,
                        Strategy strategy, Backend& backend,
                        const CampaignOptions& options = {});

/// Runs the patient x model x strategy product. Keys already in the store
/// are skipped, so re-invoking after an interruption completes the
/// remainder. Failed keys are reported and do not stop the campaign.
CampaignReport run_campaign(const std::vector<std::string>& patient_ids,
                            const std::vector<Strategy>& strategies,
                            const std::vector<ModelConfig>& models,
                            Backend& backend, RunStore& store,
                            const PromptSource& prompts,
                            const CampaignOptions& options = {});

}  // namespace medrecon
