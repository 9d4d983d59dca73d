#include "medrecon/backend.hpp"

#include <algorithm>

#include <httplib.h>
#include <json.hpp>

#include "medrecon/errors.hpp"

namespace medrecon {

using nlohmann::json;

// ---------------------------------------------------------------------------
// HttpBackend
// ---------------------------------------------------------------------------

HttpBackend::HttpBackend(std::string base_url) : base_url_(std::move(base_url)) {}

std::string HttpBackend::generate(const GenerationRequest& request,
                                  const ModelConfig& model) {
    // One client per call: httplib clients are not safe for concurrent reuse.
    httplib::Client client(base_url_);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(model.request_timeout_seconds, 0);
    client.set_write_timeout(model.request_timeout_seconds, 0);

    json body = {
        {"model", model.model_id},
        {"prompt", request.prompt},
        {"stream", false},
        {"options",
         {{"temperature", model.temperature},
          {"num_ctx", model.runtime_context_tokens}}},
    };

    auto result = client.Post("/api/generate", body.dump(), "application/json");
    if (!result) {
        throw backend_error("backend unreachable at " + base_url_ + ": " +
                            httplib::to_string(result.error()));
    }
    if (result->status != 200) {
        throw backend_error("backend returned HTTP " +
                            std::to_string(result->status) + " for model " +
                            model.model_id);
    }
    json response = json::parse(result->body, nullptr, /*allow_exceptions=*/false);
    if (response.is_discarded() || !response.is_object() ||
        !response.contains("response") || !response["response"].is_string()) {
        throw backend_error("backend reply has no response text field");
    }
    return response["response"].get<std::string>();
}

// ---------------------------------------------------------------------------
// MockBackend
// ---------------------------------------------------------------------------

std::optional<MockMode> mock_mode_from_string(std::string_view name) {
    if (name == "oracle") return MockMode::oracle;
    if (name == "omit_k_longest") return MockMode::omit_k_longest;
    if (name == "hallucinate_k") return MockMode::hallucinate_k;
    if (name == "echo_prompt") return MockMode::echo_prompt;
    if (name == "garble") return MockMode::garble;
    if (name == "empty") return MockMode::empty;
    return std::nullopt;
}

const char* to_string(MockMode mode) {
    switch (mode) {
        case MockMode::oracle: return "oracle";
        case MockMode::omit_k_longest: return "omit_k_longest";
        case MockMode::hallucinate_k: return "hallucinate_k";
        case MockMode::echo_prompt: return "echo_prompt";
        case MockMode::garble: return "garble";
        case MockMode::empty: return "empty";
    }
    return "oracle";
}

MockBackend::MockBackend(MockMode mode, MockParams params,
                         std::map<std::string, GroundTruth> ground_truth)
    : mode_(mode), params_(params), ground_truth_(std::move(ground_truth)) {}

namespace {

std::string to_json_array(const std::vector<std::string>& names) {
    json array = json::array();
    for (const std::string& name : names) array.push_back(name);
    return array.dump();
}

// Deliberately unparseable: no JSON shape, no greeting vocabulary, and no
// shared prefix with the instruction template.
constexpr const char* kGarbleText =
    ")]};; zq##x%%03 ::vv-- 7kmm@@ {{||}} ++~~ ..<>.. 00xx##qq ;;zz((";

}  // namespace

std::string MockBackend::generate(const GenerationRequest& request,
                                  const ModelConfig&) {
    switch (mode_) {
        case MockMode::echo_prompt:
            return request.prompt.substr(0, 500);
        case MockMode::garble:
            return kGarbleText;
        case MockMode::empty:
            return "";
        default:
            break;
    }

    auto it = ground_truth_.find(request.patient_id);
    if (it == ground_truth_.end()) {
        throw data_error("mock backend has no ground truth for patient " +
                         request.patient_id);
    }
    const auto& gt = it->second.active_names;
    std::vector<std::string> names(gt.begin(), gt.end());

    switch (mode_) {
        case MockMode::oracle:
            return to_json_array(names);
        case MockMode::omit_k_longest: {
            std::vector<std::string> by_length = names;
            std::sort(by_length.begin(), by_length.end(),
                      [](const std::string& a, const std::string& b) {
                          if (a.size() != b.size()) return a.size() > b.size();
                          return a < b;
                      });
            size_t drop = std::min(static_cast<size_t>(std::max(params_.k, 0)),
                                   by_length.size());
            std::set<std::string> dropped(by_length.begin(),
                                          by_length.begin() + drop);
            std::vector<std::string> kept;
            for (const std::string& name : names) {
                if (!dropped.count(name)) kept.push_back(name);
            }
            return to_json_array(kept);
        }
        case MockMode::hallucinate_k: {
            for (int i = 1; i <= params_.k; ++i) {
                std::string fake = "Hallucinated Compound " + std::to_string(i) +
                                   " 750 MG Oral Tablet";
                while (gt.count(fake)) fake += " (alt)";
                names.push_back(fake);
            }
            return to_json_array(names);
        }
        default:
            throw data_error("unhandled mock mode");
    }
}

}  // namespace medrecon
