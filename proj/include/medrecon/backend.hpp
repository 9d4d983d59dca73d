#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "medrecon/fhir.hpp"

namespace medrecon {

struct ModelConfig {
    std::string model_id;
    int runtime_context_tokens = 8192;  // num_ctx passed to the server
    double temperature = 0.0;
    std::string backend_url;  // live backends only
    int request_timeout_seconds = 120;
};

struct GenerationRequest {
    std::string patient_id;
    std::string prompt;
};

/// One inference endpoint. generate() returns the model text verbatim and
/// throws backend_error on transport-level failure (retried by the caller).
class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string generate(const GenerationRequest& request,
                                 const ModelConfig& model) = 0;
    virtual std::string kind() const = 0;  // "live" | "mock"
};

/// HTTP client for an Ollama-compatible generation endpoint:
/// POST <base_url>/api/generate with {model, prompt, stream:false,
/// options:{temperature, num_ctx}}; the reply's "response" field is the
/// model output.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(std::string base_url);

    std::string generate(const GenerationRequest& request,
                         const ModelConfig& model) override;
    std::string kind() const override { return "live"; }

    const std::string& base_url() const { return base_url_; }

private:
    std::string base_url_;
};

enum class MockMode { oracle, omit_k_longest, hallucinate_k, echo_prompt, garble, empty };

std::optional<MockMode> mock_mode_from_string(std::string_view name);
const char* to_string(MockMode mode);

struct MockParams {
    int k = 1;
};

/// Deterministic test double. oracle returns the ground-truth set as a JSON
/// array; omit_k_longest drops the k longest names; hallucinate_k appends k
/// names absent from ground truth; echo_prompt returns the prompt's first
/// 500 characters; garble returns a fixed non-JSON string; empty returns "".
class MockBackend : public Backend {
public:
    MockBackend(MockMode mode, MockParams params,
                std::map<std::string, GroundTruth> ground_truth);

    std::string generate(const GenerationRequest& request,
                         const ModelConfig& model) override;
    std::string kind() const override { return "mock"; }

    MockMode mode() const { return mode_; }

private:
    MockMode mode_;
    MockParams params_;
    std::map<std::string, GroundTruth> ground_truth_;
};

}  // namespace medrecon
