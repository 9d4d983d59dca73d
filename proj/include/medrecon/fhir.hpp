#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "medrecon/errors.hpp"

namespace medrecon {

// ---------------------------------------------------------------------------
// Calendar / timestamp primitives
// ---------------------------------------------------------------------------

struct CalendarDate {
    int year = 0;
    int month = 0;
    int day = 0;

    auto operator<=>(const CalendarDate&) const = default;
};

/// Parses "YYYY-MM-DD". Throws data_error on anything else.
CalendarDate parse_calendar_date(std::string_view text);

std::string to_string(const CalendarDate& d);

/// Days since 1970-01-01 for a proleptic Gregorian date.
int64_t days_from_civil(const CalendarDate& d);

/// One FHIR instant. FHIR allows a bare date, a local datetime, "Z", or a
/// numeric offset; all four appear in the wild. The raw text is kept verbatim
/// because Raw JSON serialisation must re-emit it byte-identically.
struct Timestamp {
    std::string raw;
    CalendarDate date;           // calendar date at the stored offset
    int64_t epoch_seconds = 0;   // UTC instant, used for ordering and spans
};

/// Parses "YYYY-MM-DD", "YYYY-MM-DDTHH:MM:SS[.fff][Z|±HH:MM]".
Timestamp parse_timestamp(std::string_view text);

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

enum class StatusKind { active, completed, stopped, cancelled, on_hold, other };

/// FHIR MedicationRequest.status. Parsed case-insensitively; unknown strings
/// map to `other` and keep the raw text. Only `active` counts toward ground
/// truth; everything else is historical.
struct MedicationStatus {
    StatusKind kind = StatusKind::other;
    std::string raw;  // source text, verbatim

    bool is_active() const { return kind == StatusKind::active; }

    /// Canonical lowercase FHIR code for known statuses; raw text otherwise.
    std::string display() const;
};

MedicationStatus parse_status(std::string_view text);

struct Coding {
    std::string system;
    std::string code;
    std::string display;
};

struct MedicationRecord {
    std::string name;  // medicationCodeableConcept.text, byte-identical to source
    std::vector<Coding> codings;
    std::optional<std::string> rxnorm_code;
    MedicationStatus status;
    Timestamp authored_on;
    std::optional<std::string> dose;
    std::optional<std::string> frequency;
    int bundle_index = 0;  // position among MedicationRequest resources
};

struct PatientRecord {
    std::string patient_id;
    std::string given_name;
    std::string family_name;
    std::string gender;
    CalendarDate birth_date;
    int age_years = 0;               // at the latest authoredOn date
    double history_span_years = 0.0; // (max - min authoredOn) / 365.25d
    std::vector<MedicationRecord> medications;
};

struct GroundTruth {
    std::string patient_id;
    std::set<std::string> active_names;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Parses one FHIR R4 bundle (one Patient, any number of MedicationRequest
/// resources; other resource types are skipped). Only clinical fields are
/// retained: administrative content (subject, encounter, requester, meta, id)
/// is dropped here and never reaches a serialiser.
///
/// Throws data_error on malformed JSON, a missing/duplicated Patient, or a
/// MedicationRequest without status, medicationCodeableConcept.text or a
/// usable authoredOn; the diagnostic names the offending resource position.
PatientRecord parse_bundle(std::string_view bundle_json);

/// Completed whole years between the dates; birthday-not-yet-reached
/// subtracts one. Throws data_error if reference precedes birth.
int compute_age(const CalendarDate& birth, const CalendarDate& reference);

enum class RejectReason { none, age, span, no_active };

const char* to_string(RejectReason r);

struct CohortDecision {
    bool accepted = false;
    RejectReason reason = RejectReason::none;
};

/// Accept iff 40 <= age <= 75, history span >= 10 years and at least one
/// active medication. The reason reports the first failed criterion in that
/// order. A patient with no medications at all is rejected as no_active
/// (there is no prescription to derive the reference date from).
CohortDecision cohort_filter(const PatientRecord& patient);

/// Distinct names over active-status records. Refill duplicates collapse.
GroundTruth extract_ground_truth(const PatientRecord& patient);

struct CohortStats {
    size_t patients = 0;
    int active_min = 0;
    int active_median = 0;  // lower-middle element for even counts
    int active_max = 0;
    double span_min = 0.0;
    double span_max = 0.0;
};

/// Throws data_error on an empty cohort.
CohortStats cohort_stats(
    const std::vector<std::pair<PatientRecord, GroundTruth>>& cohort);

}  // namespace medrecon
