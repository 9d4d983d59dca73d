#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "medrecon/serialise.hpp"

namespace medrecon {

struct RunResult {
    std::string patient_id;
    std::string model_id;
    Strategy strategy = Strategy::A_raw_json;
    std::string raw_output;  // verbatim, including garbage
    int64_t latency_ms = 0;
    std::string started_at;    // ISO-8601 UTC
    std::string backend_kind;  // "live" | "mock"
    int attempt = 1;           // attempts consumed (1 = first try)
};

struct RunKey {
    std::string patient_id;
    std::string model_id;
    char strategy = 'A';

    auto operator<=>(const RunKey&) const = default;
};

RunKey key_of(const RunResult& r);

uint64_t fnv1a64(std::string_view bytes);

/// Append-only run store: one `<fnv1a64-hex>\t<json>` line per run, flushed
/// per append. A checksum mismatch on a complete line is corruption and
/// read_all() throws with the line number. A final line without a newline is
/// a torn write from an interrupted run; it is dropped on read and
/// overwritten by the next append.
class RunStore {
public:
    explicit RunStore(std::filesystem::path path);

    void append(const RunResult& result);
    std::vector<RunResult> read_all() const;
    std::set<RunKey> existing_keys() const;

    bool exists() const;
    bool empty() const;  // no complete lines
    void remove();       // delete the backing file if present

    const std::filesystem::path& path() const { return path_; }

    static std::string encode_line(const RunResult& result);

private:
    std::filesystem::path path_;
};

}  // namespace medrecon
