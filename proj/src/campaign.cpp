#include "medrecon/campaign.hpp"

#include <chrono>
#include <ctime>
#include <future>
#include <thread>

namespace medrecon {

namespace {

std::string now_utc_iso() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

RunResult run_inference(const GenerationRequest& request, const ModelConfig& model,
                        Strategy strategy, Backend& backend,
                        const CampaignOptions& options) {
    std::string last_error;
    for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
        RunResult result;
        result.patient_id = request.patient_id;
        result.model_id = model.model_id;
        result.strategy = strategy;
        result.started_at = now_utc_iso();
        result.backend_kind = backend.kind();
        result.attempt = attempt;

        auto begin = std::chrono::steady_clock::now();
        try {
            result.raw_output = backend.generate(request, model);
            result.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                    std::chrono::steady_clock::now() - begin)
                                    .count();
            return result;
        } catch (const backend_error& e) {
            last_error = e.what();
            if (attempt < options.max_attempts) {
                std::this_thread::sleep_for(options.backoff_base * (1 << (attempt - 1)));
            }
        }
    }
    throw backend_error("gave up after " + std::to_string(options.max_attempts) +
                        " attempts: " + last_error);
}

CampaignReport run_campaign(const std::vector<std::string>& patient_ids,
                            const std::vector<Strategy>& strategies,
                            const std::vector<ModelConfig>& models,
                            Backend& backend, RunStore& store,
                            const PromptSource& prompts,
                            const CampaignOptions& options) {
    struct Task {
        const std::string* patient_id;
        const ModelConfig* model;
        Strategy strategy;
    };

    CampaignReport report;
    std::set<RunKey> existing = store.existing_keys();
    std::vector<Task> pending;
    for (const ModelConfig& model : models) {
        for (Strategy strategy : strategies) {
            for (const std::string& patient_id : patient_ids) {
                RunKey key{patient_id, model.model_id, strategy_code(strategy)};
                if (existing.count(key)) {
                    ++report.skipped;
                } else {
                    pending.push_back({&patient_id, &model, strategy});
                }
            }
        }
    }

    auto describe = [](const Task& t) {
        return *t.patient_id + "/" + t.model->model_id + "/" +
               std::string(1, strategy_code(t.strategy));
    };
    auto execute = [&](const Task& t) {
        GenerationRequest request{*t.patient_id, prompts(*t.patient_id, t.strategy)};
        return run_inference(request, *t.model, t.strategy, backend, options);
    };

    if (options.concurrency <= 1) {
        for (const Task& task : pending) {
            try {
                store.append(execute(task));
                ++report.completed;
            } catch (const backend_error& e) {
                ++report.failed;
                report.failures.push_back(describe(task) + ": " + e.what());
            }
        }
        return report;
    }

    // Bounded window of in-flight calls; results are appended in task order
    // so the store content does not depend on the concurrency level.
    const size_t window = static_cast<size_t>(options.concurrency);
    std::vector<std::future<RunResult>> in_flight;
    size_t next_launch = 0;
    size_t next_consume = 0;
    while (next_consume < pending.size()) {
        while (next_launch < pending.size() && next_launch - next_consume < window) {
            in_flight.push_back(std::async(std::launch::async, execute,
                                           pending[next_launch]));
            ++next_launch;
        }
        try {
            store.append(in_flight[next_consume].get());
            ++report.completed;
        } catch (const backend_error& e) {
            ++report.failed;
            report.failures.push_back(describe(pending[next_consume]) + ": " +
                                      e.what());
        }
        ++next_consume;
    }
    return report;
}

}  // namespace medrecon
