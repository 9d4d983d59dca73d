#include "medrecon/serialise.hpp"

#include <algorithm>
#include <cctype>

#include <json.hpp>

namespace medrecon {

using ordered_json = nlohmann::ordered_json;

char strategy_code(Strategy s) {
    switch (s) {
        case Strategy::A_raw_json: return 'A';
        case Strategy::B_markdown_table: return 'B';
        case Strategy::C_clinical_narrative: return 'C';
        case Strategy::D_chronological_timeline: return 'D';
    }
    return '?';
}

std::optional<Strategy> strategy_from_code(char code) {
    switch (std::toupper(static_cast<unsigned char>(code))) {
        case 'A': return Strategy::A_raw_json;
        case 'B': return Strategy::B_markdown_table;
        case 'C': return Strategy::C_clinical_narrative;
        case 'D': return Strategy::D_chronological_timeline;
    }
    return std::nullopt;
}

std::optional<Strategy> strategy_from_code(std::string_view code) {
    if (code.size() != 1) return std::nullopt;
    return strategy_from_code(code[0]);
}

CapResult apply_strategy_a_cap(const std::vector<MedicationRecord>& records,
                               int cap) {
    if (static_cast<int>(records.size()) <= cap) {
        return {records, false};
    }

    std::vector<MedicationRecord> kept;
    std::vector<const MedicationRecord*> historical;
    for (const MedicationRecord& r : records) {
        if (r.status.is_active()) {
            kept.push_back(r);
        } else {
            historical.push_back(&r);
        }
    }

    // Most recent historical records fill the remaining slots; ties on the
    // timestamp resolve toward the later bundle position.
    std::sort(historical.begin(), historical.end(),
              [](const MedicationRecord* a, const MedicationRecord* b) {
                  if (a->authored_on.epoch_seconds != b->authored_on.epoch_seconds)
                      return a->authored_on.epoch_seconds > b->authored_on.epoch_seconds;
                  return a->bundle_index > b->bundle_index;
              });
    int slots = cap - static_cast<int>(kept.size());
    for (int i = 0; i < slots && i < static_cast<int>(historical.size()); ++i) {
        kept.push_back(*historical[i]);
    }

    std::sort(kept.begin(), kept.end(),
              [](const MedicationRecord& a, const MedicationRecord& b) {
                  return a.bundle_index < b.bundle_index;
              });
    return {std::move(kept), true};
}

std::string header_line(const PatientRecord& patient) {
    return "Patient: " + patient.given_name + " " + patient.family_name +
           " | Age: " + std::to_string(patient.age_years) +
           " | Gender: " + patient.gender;
}

std::string prompt_template() {
    return
        "You are a clinical assistant performing medication reconciliation. "
        "You will be given a patient's medication history. "
        "Your task is to identify all medications that are currently ACTIVE for this patient.\n"
        "A medication is currently active if its status is \"active\". "
        "Medications with status \"completed\", \"stopped\", \"cancelled\", or \"on-hold\" "
        "are historical and must NOT be included in your answer.\n"
        "Return your answer as a JSON array of medication names exactly as they appear in the data. "
        "Return nothing else - no explanation, no prose, just the JSON array.\n"
        "If there are no active medications, return an empty array: []";
}

std::string dash_clarification_sentence() {
    return "Note: a dash (-) in the data represents a missing value, such as an "
           "unrecorded dose, not an inactive status.";
}

std::string build_prompt(Strategy strategy, std::string_view data_block) {
    std::string prompt = prompt_template();
    prompt += "\n";
    if (strategy != Strategy::A_raw_json) {
        prompt += dash_clarification_sentence();
        prompt += "\n";
    }
    prompt += "\n";
    prompt += data_block;
    return prompt;
}

namespace {

// Chronological order; equal instants keep bundle order.
std::vector<const MedicationRecord*> sorted_by_date(
    const std::vector<MedicationRecord>& records) {
    std::vector<const MedicationRecord*> out;
    out.reserve(records.size());
    for (const MedicationRecord& r : records) out.push_back(&r);
    std::stable_sort(out.begin(), out.end(),
                     [](const MedicationRecord* a, const MedicationRecord* b) {
                         return a->authored_on.epoch_seconds <
                                b->authored_on.epoch_seconds;
                     });
    return out;
}

std::string rxnorm_or_dash(const MedicationRecord& r) {
    return r.rxnorm_code.value_or("-");
}

std::string render_raw_json(const std::vector<MedicationRecord>& records) {
    ordered_json array = ordered_json::array();
    for (const MedicationRecord& r : records) {
        ordered_json request;
        request["resourceType"] = "MedicationRequest";
        request["status"] = r.status.display();
        ordered_json concept;
        ordered_json codings = ordered_json::array();
        for (const Coding& c : r.codings) {
            ordered_json coding;
            if (!c.system.empty()) coding["system"] = c.system;
            if (!c.code.empty()) coding["code"] = c.code;
            if (!c.display.empty()) coding["display"] = c.display;
            codings.push_back(std::move(coding));
        }
        concept["coding"] = std::move(codings);
        concept["text"] = r.name;
        request["medicationCodeableConcept"] = std::move(concept);
        request["authoredOn"] = r.authored_on.raw;
        array.push_back(std::move(request));
    }
    return array.dump(2) + "\n";
}

std::string render_markdown_table(const std::vector<MedicationRecord>& records) {
    std::string out =
        "| Medication | RxNorm | Status | Prescribed | Dose | Frequency |\n"
        "| --- | --- | --- | --- | --- | --- |\n";
    for (const MedicationRecord* r : sorted_by_date(records)) {
        out += "| " + r->name + " | " + rxnorm_or_dash(*r) + " | " +
               r->status.display() + " | " + to_string(r->authored_on.date) +
               " | " + r->dose.value_or("-") + " | " +
               r->frequency.value_or("-") + " |\n";
    }
    return out;
}

std::string narrative_sentence(const MedicationRecord& r) {
    std::string sentence = "  - " + r.name + " (RxNorm: " + rxnorm_or_dash(r) +
                           "), prescribed on " + to_string(r.authored_on.date) +
                           ", status: " + r.status.display() + ". ";
    if (r.dose) {
        sentence += "Dosage: " + *r.dose;
        if (r.frequency) sentence += ", " + *r.frequency;
        sentence += ".";
    } else {
        sentence += "Dosage not recorded.";
    }
    return sentence;
}

std::string render_clinical_narrative(const std::vector<MedicationRecord>& records) {
    std::string active = "Currently active medications:\n";
    std::string history = "Medication history (no longer active):\n";
    for (const MedicationRecord* r : sorted_by_date(records)) {
        (r->status.is_active() ? active : history) += narrative_sentence(*r) + "\n";
    }
    return active + "\n" + history;
}

std::string render_timeline(const std::vector<MedicationRecord>& records) {
    std::string out = "Chronological medication history (oldest to newest):\n\n";
    for (const MedicationRecord* r : sorted_by_date(records)) {
        out += to_string(r->authored_on.date) + " | " + r->status.display() +
               " | " + r->name + " (RxNorm: " + rxnorm_or_dash(*r) + ") | " +
               r->dose.value_or("-") + "\n";
    }
    return out;
}

}  // namespace

SerialisedPrompt serialise(const PatientRecord& patient, Strategy strategy,
                           int strategy_a_cap) {
    SerialisedPrompt prompt;
    prompt.patient_id = patient.patient_id;
    prompt.strategy = strategy;
    prompt.header_line = header_line(patient);

    std::string body;
    switch (strategy) {
        case Strategy::A_raw_json: {
            CapResult capped = apply_strategy_a_cap(patient.medications, strategy_a_cap);
            prompt.cap_applied = capped.cap_applied;
            prompt.resource_count_serialised = static_cast<int>(capped.records.size());
            body = render_raw_json(capped.records);
            break;
        }
        case Strategy::B_markdown_table:
            prompt.resource_count_serialised = static_cast<int>(patient.medications.size());
            body = render_markdown_table(patient.medications);
            break;
        case Strategy::C_clinical_narrative:
            prompt.resource_count_serialised = static_cast<int>(patient.medications.size());
            body = render_clinical_narrative(patient.medications);
            break;
        case Strategy::D_chronological_timeline:
            prompt.resource_count_serialised = static_cast<int>(patient.medications.size());
            body = render_timeline(patient.medications);
            break;
    }

    prompt.data_block = prompt.header_line + "\n\n" + body;
    prompt.full_prompt = build_prompt(strategy, prompt.data_block);
    return prompt;
}

}  // namespace medrecon
