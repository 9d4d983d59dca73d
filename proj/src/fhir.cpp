#include "medrecon/fhir.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include <json.hpp>

namespace medrecon {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Calendar / timestamp primitives
// ---------------------------------------------------------------------------

namespace {

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return kDays[m - 1];
}

int parse_int_field(std::string_view text, size_t pos, size_t len,
                    std::string_view what, std::string_view full) {
    if (pos + len > text.size()) {
        throw data_error("bad " + std::string(what) + " in date/time '" +
                         std::string(full) + "'");
    }
    int value = 0;
    auto [ptr, ec] =
        std::from_chars(text.data() + pos, text.data() + pos + len, value);
    if (ec != std::errc() || ptr != text.data() + pos + len) {
        throw data_error("bad " + std::string(what) + " in date/time '" +
                         std::string(full) + "'");
    }
    return value;
}

}  // namespace

CalendarDate parse_calendar_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw data_error("bad calendar date '" + std::string(text) +
                         "', expected YYYY-MM-DD");
    }
    CalendarDate d;
    d.year = parse_int_field(text, 0, 4, "year", text);
    d.month = parse_int_field(text, 5, 2, "month", text);
    d.day = parse_int_field(text, 8, 2, "day", text);
    if (d.month < 1 || d.month > 12 || d.day < 1 ||
        d.day > days_in_month(d.year, d.month)) {
        throw data_error("bad calendar date '" + std::string(text) + "'");
    }
    return d;
}

std::string to_string(const CalendarDate& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

int64_t days_from_civil(const CalendarDate& d) {
    int y = d.year;
    y -= d.month <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy =
        (153 * (static_cast<unsigned>(d.month) + (d.month > 2 ? -3 : 9)) + 2) / 5 +
        static_cast<unsigned>(d.day) - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<int64_t>(era) * 146097 + static_cast<int>(doe) - 719468;
}

Timestamp parse_timestamp(std::string_view text) {
    Timestamp ts;
    ts.raw = std::string(text);
    if (text.size() < 10) {
        throw data_error("bad timestamp '" + ts.raw + "'");
    }
    ts.date = parse_calendar_date(text.substr(0, 10));

    int64_t seconds_of_day = 0;
    int64_t offset_seconds = 0;
    if (text.size() > 10) {
        if (text[10] != 'T') throw data_error("bad timestamp '" + ts.raw + "'");
        if (text.size() < 19 || text[13] != ':' || text[16] != ':') {
            throw data_error("bad timestamp '" + ts.raw + "'");
        }
        int hour = parse_int_field(text, 11, 2, "hour", text);
        int minute = parse_int_field(text, 14, 2, "minute", text);
        int second = parse_int_field(text, 17, 2, "second", text);
        if (hour > 23 || minute > 59 || second > 60) {
            throw data_error("bad timestamp '" + ts.raw + "'");
        }
        seconds_of_day = hour * 3600 + minute * 60 + second;

        size_t pos = 19;
        if (pos < text.size() && text[pos] == '.') {
            ++pos;  // fractional seconds: skip digits
            while (pos < text.size() &&
                   std::isdigit(static_cast<unsigned char>(text[pos]))) {
                ++pos;
            }
        }
        if (pos < text.size()) {
            char c = text[pos];
            if (c == 'Z') {
                if (pos + 1 != text.size()) {
                    throw data_error("bad timestamp '" + ts.raw + "'");
                }
            } else if (c == '+' || c == '-') {
                if (pos + 6 != text.size() || text[pos + 3] != ':') {
                    throw data_error("bad timestamp '" + ts.raw + "'");
                }
                int oh = parse_int_field(text, pos + 1, 2, "offset hour", text);
                int om = parse_int_field(text, pos + 4, 2, "offset minute", text);
                offset_seconds = (oh * 3600 + om * 60) * (c == '+' ? 1 : -1);
            } else {
                throw data_error("bad timestamp '" + ts.raw + "'");
            }
        }
    }
    ts.epoch_seconds =
        days_from_civil(ts.date) * 86400 + seconds_of_day - offset_seconds;
    return ts;
}

// ---------------------------------------------------------------------------
// Status parsing
// ---------------------------------------------------------------------------

MedicationStatus parse_status(std::string_view text) {
    std::string lowered(text);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    MedicationStatus status;
    status.raw = std::string(text);
    if (lowered == "active") {
        status.kind = StatusKind::active;
    } else if (lowered == "completed") {
        status.kind = StatusKind::completed;
    } else if (lowered == "stopped") {
        status.kind = StatusKind::stopped;
    } else if (lowered == "cancelled") {
        status.kind = StatusKind::cancelled;
    } else if (lowered == "on-hold" || lowered == "on_hold") {
        status.kind = StatusKind::on_hold;
    } else {
        status.kind = StatusKind::other;
    }
    return status;
}

std::string MedicationStatus::display() const {
    switch (kind) {
        case StatusKind::active: return "active";
        case StatusKind::completed: return "completed";
        case StatusKind::stopped: return "stopped";
        case StatusKind::cancelled: return "cancelled";
        case StatusKind::on_hold: return "on-hold";
        case StatusKind::other: return raw;
    }
    return raw;
}

// ---------------------------------------------------------------------------
// Bundle parsing
// ---------------------------------------------------------------------------

namespace {

std::string json_number_to_string(const json& value) {
    // dump() keeps integers free of a trailing ".0" and round-trips doubles
    return value.dump();
}

std::optional<std::string> extract_dose(const json& request) {
    auto di = request.find("dosageInstruction");
    if (di == request.end() || !di->is_array() || di->empty()) return std::nullopt;
    const json& first = (*di)[0];
    auto dar = first.find("doseAndRate");
    if (dar == first.end() || !dar->is_array() || dar->empty()) return std::nullopt;
    auto dq = (*dar)[0].find("doseQuantity");
    if (dq == (*dar)[0].end() || !dq->is_object()) return std::nullopt;
    auto value = dq->find("value");
    if (value == dq->end() || !value->is_number()) return std::nullopt;
    std::string dose = json_number_to_string(*value);
    auto unit = dq->find("unit");
    if (unit != dq->end() && unit->is_string() &&
        !unit->get<std::string>().empty()) {
        dose += " " + unit->get<std::string>();
    }
    return dose;
}

std::optional<std::string> extract_frequency(const json& request) {
    auto di = request.find("dosageInstruction");
    if (di == request.end() || !di->is_array() || di->empty()) return std::nullopt;
    auto timing = (*di)[0].find("timing");
    if (timing == (*di)[0].end() || !timing->is_object()) return std::nullopt;
    auto repeat = timing->find("repeat");
    if (repeat == timing->end() || !repeat->is_object()) return std::nullopt;
    auto frequency = repeat->find("frequency");
    auto period = repeat->find("period");
    auto period_unit = repeat->find("periodUnit");
    if (frequency == repeat->end() || !frequency->is_number() ||
        period == repeat->end() || !period->is_number() ||
        period_unit == repeat->end() || !period_unit->is_string()) {
        return std::nullopt;
    }
    return json_number_to_string(*frequency) + " per " +
           json_number_to_string(*period) + period_unit->get<std::string>();
}

MedicationRecord parse_medication_request(const json& resource, int ordinal) {
    const std::string where = "MedicationRequest #" + std::to_string(ordinal + 1);

    MedicationRecord record;
    record.bundle_index = ordinal;

    auto status = resource.find("status");
    if (status == resource.end() || !status->is_string()) {
        throw data_error(where + ": missing status");
    }
    record.status = parse_status(status->get<std::string>());

    auto mcc = resource.find("medicationCodeableConcept");
    if (mcc == resource.end() || !mcc->is_object()) {
        throw data_error(where + ": missing medicationCodeableConcept");
    }
    auto text = mcc->find("text");
    if (text == mcc->end() || !text->is_string() ||
        text->get<std::string>().empty()) {
        throw data_error(where + ": missing medicationCodeableConcept.text");
    }
    record.name = text->get<std::string>();

    auto coding = mcc->find("coding");
    if (coding != mcc->end() && coding->is_array()) {
        for (const json& c : *coding) {
            if (!c.is_object()) continue;
            Coding parsed;
            if (auto it = c.find("system"); it != c.end() && it->is_string())
                parsed.system = it->get<std::string>();
            if (auto it = c.find("code"); it != c.end() && it->is_string())
                parsed.code = it->get<std::string>();
            if (auto it = c.find("display"); it != c.end() && it->is_string())
                parsed.display = it->get<std::string>();
            record.codings.push_back(std::move(parsed));
        }
    }
    if (!record.codings.empty() && !record.codings.front().code.empty()) {
        record.rxnorm_code = record.codings.front().code;
    }

    auto authored = resource.find("authoredOn");
    if (authored == resource.end() || !authored->is_string()) {
        throw data_error(where + ": missing authoredOn");
    }
    try {
        record.authored_on = parse_timestamp(authored->get<std::string>());
    } catch (const data_error& e) {
        throw data_error(where + ": " + e.what());
    }

    record.dose = extract_dose(resource);
    record.frequency = extract_frequency(resource);
    return record;
}

void parse_patient_resource(const json& resource, PatientRecord& out) {
    if (auto it = resource.find("id"); it != resource.end() && it->is_string()) {
        out.patient_id = it->get<std::string>();
    }
    if (auto it = resource.find("gender"); it != resource.end() && it->is_string()) {
        out.gender = it->get<std::string>();
    } else {
        out.gender = "unknown";
    }
    auto birth = resource.find("birthDate");
    if (birth == resource.end() || !birth->is_string()) {
        throw data_error("Patient: missing birthDate");
    }
    out.birth_date = parse_calendar_date(birth->get<std::string>());

    auto names = resource.find("name");
    if (names != resource.end() && names->is_array() && !names->empty()) {
        const json* chosen = &(*names)[0];
        for (const json& n : *names) {
            if (n.is_object() && n.value("use", "") == "official") {
                chosen = &n;
                break;
            }
        }
        if (chosen->is_object()) {
            if (auto g = chosen->find("given");
                g != chosen->end() && g->is_array() && !g->empty() &&
                (*g)[0].is_string()) {
                out.given_name = (*g)[0].get<std::string>();
            }
            if (auto f = chosen->find("family");
                f != chosen->end() && f->is_string()) {
                out.family_name = f->get<std::string>();
            }
        }
    }
    if (out.patient_id.empty()) {
        std::string slug = out.given_name + "-" + out.family_name;
        std::transform(slug.begin(), slug.end(), slug.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        out.patient_id = slug;
    }
}

}  // namespace

PatientRecord parse_bundle(std::string_view bundle_json) {
    json bundle = json::parse(bundle_json, nullptr, /*allow_exceptions=*/false);
    if (bundle.is_discarded() || !bundle.is_object()) {
        throw data_error("malformed bundle: not a JSON object");
    }

    PatientRecord patient;
    bool patient_seen = false;
    int request_ordinal = 0;

    auto entries = bundle.find("entry");
    if (entries != bundle.end() && entries->is_array()) {
        for (const json& entry : *entries) {
            if (!entry.is_object()) continue;
            auto resource = entry.find("resource");
            if (resource == entry.end() || !resource->is_object()) continue;
            const std::string type = resource->value("resourceType", "");
            if (type == "Patient") {
                if (patient_seen) {
                    throw data_error("bundle contains more than one Patient resource");
                }
                parse_patient_resource(*resource, patient);
                patient_seen = true;
            } else if (type == "MedicationRequest") {
                patient.medications.push_back(
                    parse_medication_request(*resource, request_ordinal));
                ++request_ordinal;
            }
        }
    }
    if (!patient_seen) {
        throw data_error("bundle contains no Patient resource");
    }

    if (!patient.medications.empty()) {
        const MedicationRecord* earliest = &patient.medications.front();
        const MedicationRecord* latest = &patient.medications.front();
        for (const MedicationRecord& m : patient.medications) {
            if (m.authored_on.epoch_seconds < earliest->authored_on.epoch_seconds)
                earliest = &m;
            if (m.authored_on.epoch_seconds > latest->authored_on.epoch_seconds)
                latest = &m;
        }
        patient.age_years = compute_age(patient.birth_date, latest->authored_on.date);
        patient.history_span_years =
            static_cast<double>(latest->authored_on.epoch_seconds -
                                earliest->authored_on.epoch_seconds) /
            86400.0 / 365.25;
    }
    return patient;
}

int compute_age(const CalendarDate& birth, const CalendarDate& reference) {
    if (reference < birth) {
        throw data_error("reference date " + to_string(reference) +
                         " precedes birth date " + to_string(birth));
    }
    int age = reference.year - birth.year;
    if (std::pair(reference.month, reference.day) < std::pair(birth.month, birth.day)) {
        --age;
    }
    return age;
}

const char* to_string(RejectReason r) {
    switch (r) {
        case RejectReason::none: return "none";
        case RejectReason::age: return "age";
        case RejectReason::span: return "span";
        case RejectReason::no_active: return "no_active";
    }
    return "none";
}

CohortDecision cohort_filter(const PatientRecord& patient) {
    if (patient.medications.empty()) {
        return {false, RejectReason::no_active};
    }
    if (patient.age_years < 40 || patient.age_years > 75) {
        return {false, RejectReason::age};
    }
    if (patient.history_span_years < 10.0) {
        return {false, RejectReason::span};
    }
    bool any_active = std::any_of(
        patient.medications.begin(), patient.medications.end(),
        [](const MedicationRecord& m) { return m.status.is_active(); });
    if (!any_active) {
        return {false, RejectReason::no_active};
    }
    return {true, RejectReason::none};
}

GroundTruth extract_ground_truth(const PatientRecord& patient) {
    GroundTruth gt;
    gt.patient_id = patient.patient_id;
    for (const MedicationRecord& m : patient.medications) {
        if (m.status.is_active()) {
            gt.active_names.insert(m.name);
        }
    }
    return gt;
}

CohortStats cohort_stats(
    const std::vector<std::pair<PatientRecord, GroundTruth>>& cohort) {
    if (cohort.empty()) {
        throw data_error("cohort_stats: empty cohort");
    }
    std::vector<int> actives;
    std::vector<double> spans;
    actives.reserve(cohort.size());
    spans.reserve(cohort.size());
    for (const auto& [patient, gt] : cohort) {
        actives.push_back(static_cast<int>(gt.active_names.size()));
        spans.push_back(patient.history_span_years);
    }
    std::sort(actives.begin(), actives.end());
    std::sort(spans.begin(), spans.end());

    CohortStats stats;
    stats.patients = cohort.size();
    stats.active_min = actives.front();
    stats.active_max = actives.back();
    stats.active_median = actives[(actives.size() - 1) / 2];  // lower-middle
    stats.span_min = spans.front();
    stats.span_max = spans.back();
    return stats;
}

}  // namespace medrecon
