#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "medrecon/fhir.hpp"

namespace medrecon {

/// The four prompt serialisation strategies. Single-letter codes A-D are the
/// stable identifiers used in all file names, stores and reports.
enum class Strategy { A_raw_json, B_markdown_table, C_clinical_narrative, D_chronological_timeline };

inline constexpr std::array<Strategy, 4> kAllStrategies = {
    Strategy::A_raw_json,
    Strategy::B_markdown_table,
    Strategy::C_clinical_narrative,
    Strategy::D_chronological_timeline,
};

char strategy_code(Strategy s);
std::optional<Strategy> strategy_from_code(char code);
std::optional<Strategy> strategy_from_code(std::string_view code);

struct SerialisedPrompt {
    std::string patient_id;
    Strategy strategy = Strategy::A_raw_json;
    std::string header_line;  // "Patient: <given> <family> | Age: <n> | Gender: <g>"
    std::string data_block;   // strategy-rendered patient data
    std::string full_prompt;  // instruction template + data_block
    bool cap_applied = false; // only ever true for strategy A
    int resource_count_serialised = 0;
};

struct CapResult {
    std::vector<MedicationRecord> records;  // in original bundle order
    bool cap_applied = false;
};

/// Strategy A input cap. Under the cap the list passes through untouched.
/// Over it, every active record is kept and the remaining slots are filled
/// with the most recent historical records by authoredOn (ties broken toward
/// the later bundle position); the survivors are re-sorted into bundle order.
/// Actives are never dropped, so the result may exceed the cap.
CapResult apply_strategy_a_cap(const std::vector<MedicationRecord>& records,
                               int cap = 100);

std::string header_line(const PatientRecord& patient);

/// The instruction preamble shared by every strategy.
std::string prompt_template();

/// Appended for strategies B, C and D, which use dashes for missing fields.
std::string dash_clarification_sentence();

/// Template, the dash sentence for B/C/D (never for A), then the data block.
std::string build_prompt(Strategy strategy, std::string_view data_block);

/// Renders one patient under one strategy. Deterministic: the same patient
/// always yields identical bytes.
SerialisedPrompt serialise(const PatientRecord& patient, Strategy strategy,
                           int strategy_a_cap = 100);

}  // namespace medrecon
