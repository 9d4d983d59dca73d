#include "medrecon/store.hpp"

#include <fstream>

#include <json.hpp>

#include "medrecon/errors.hpp"

namespace medrecon {

using nlohmann::json;

RunKey key_of(const RunResult& r) {
    return {r.patient_id, r.model_id, strategy_code(r.strategy)};
}

uint64_t fnv1a64(std::string_view bytes) {
    uint64_t hash = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

namespace {

std::string hex16(uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

}  // namespace

RunStore::RunStore(std::filesystem::path path) : path_(std::move(path)) {}

std::string RunStore::encode_line(const RunResult& result) {
    json payload = {
        {"patient_id", result.patient_id},
        {"model_id", result.model_id},
        {"strategy", std::string(1, strategy_code(result.strategy))},
        {"raw_output", result.raw_output},
        {"latency_ms", result.latency_ms},
        {"started_at", result.started_at},
        {"backend_kind", result.backend_kind},
        {"attempt", result.attempt},
    };
    std::string body = payload.dump();
    return hex16(fnv1a64(body)) + "\t" + body + "\n";
}

void RunStore::append(const RunResult& result) {
    if (path_.has_parent_path()) {
        std::filesystem::create_directories(path_.parent_path());
    }
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) {
        throw data_error("cannot open run store for append: " + path_.string());
    }
    out << encode_line(result);
    out.flush();
    if (!out) {
        throw data_error("write to run store failed: " + path_.string());
    }
}

std::vector<RunResult> RunStore::read_all() const {
    std::vector<RunResult> results;
    std::ifstream in(path_, std::ios::binary);
    if (!in) return results;

    std::string contents((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
    size_t pos = 0;
    size_t line_no = 0;
    while (pos < contents.size()) {
        size_t eol = contents.find('\n', pos);
        if (eol == std::string::npos) {
            // torn final line from an interrupted writer: ignore, the next
            // append rewrites it as a complete record
            break;
        }
        ++line_no;
        std::string_view line(contents.data() + pos, eol - pos);
        pos = eol + 1;

        const std::string where =
            path_.string() + " line " + std::to_string(line_no);
        size_t tab = line.find('\t');
        if (tab != 16) {
            throw data_error("run store corruption at " + where +
                             ": bad line framing");
        }
        std::string_view checksum = line.substr(0, 16);
        std::string_view body = line.substr(17);
        if (hex16(fnv1a64(body)) != checksum) {
            throw data_error("run store corruption at " + where +
                             ": checksum mismatch");
        }
        json payload = json::parse(body, nullptr, /*allow_exceptions=*/false);
        if (payload.is_discarded() || !payload.is_object()) {
            throw data_error("run store corruption at " + where +
                             ": unreadable record");
        }
        RunResult r;
        try {
            r.patient_id = payload.at("patient_id").get<std::string>();
            r.model_id = payload.at("model_id").get<std::string>();
            auto strategy =
                strategy_from_code(payload.at("strategy").get<std::string>());
            if (!strategy) throw json::other_error::create(501, "bad strategy", nullptr);
            r.strategy = *strategy;
            r.raw_output = payload.at("raw_output").get<std::string>();
            r.latency_ms = payload.at("latency_ms").get<int64_t>();
            r.started_at = payload.at("started_at").get<std::string>();
            r.backend_kind = payload.at("backend_kind").get<std::string>();
            r.attempt = payload.at("attempt").get<int>();
        } catch (const json::exception&) {
            throw data_error("run store corruption at " + where +
                             ": missing or mistyped field");
        }
        results.push_back(std::move(r));
    }
    return results;
}

std::set<RunKey> RunStore::existing_keys() const {
    std::set<RunKey> keys;
    for (const RunResult& r : read_all()) {
        keys.insert(key_of(r));
    }
    return keys;
}

bool RunStore::exists() const { return std::filesystem::exists(path_); }

bool RunStore::empty() const { return read_all().empty(); }

void RunStore::remove() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
}

}  // namespace medrecon
