#include "medrecon/evaluate.hpp"

#include <algorithm>
#include <cctype>

#include <json.hpp>

#include "medrecon/errors.hpp"

namespace medrecon {

using nlohmann::json;

const char* to_string(ParsePath p) {
    switch (p) {
        case ParsePath::strict: return "strict";
        case ParsePath::fence_stripped: return "fence_stripped";
        case ParsePath::failed: return "failed";
    }
    return "failed";
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

// A JSON array whose elements are all strings; anything else is a failure.
std::optional<std::set<std::string>> try_parse_name_array(std::string_view text) {
    json parsed = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded() || !parsed.is_array()) return std::nullopt;
    std::set<std::string> names;
    for (const json& element : parsed) {
        if (!element.is_string()) return std::nullopt;
        names.insert(element.get<std::string>());
    }
    return names;
}

// One leading/trailing fence pair only; no deeper repair is attempted.
std::optional<std::string_view> strip_code_fence(std::string_view text) {
    std::string_view s = trim(text);
    if (s.size() < 6 || s.substr(0, 3) != "```") return std::nullopt;
    s.remove_prefix(3);
    while (!s.empty() && std::isalpha(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);  // optional language tag
    if (s.size() < 3 || s.substr(s.size() - 3) != "```") return std::nullopt;
    s.remove_suffix(3);
    return trim(s);
}

}  // namespace

ParsedPrediction parse_model_output(std::string_view raw) {
    ParsedPrediction prediction;
    if (auto names = try_parse_name_array(raw)) {
        prediction.names = std::move(*names);
        prediction.parse_path = ParsePath::strict;
        return prediction;
    }
    if (auto inner = strip_code_fence(raw)) {
        if (auto names = try_parse_name_array(*inner)) {
            prediction.names = std::move(*names);
            prediction.parse_path = ParsePath::fence_stripped;
            return prediction;
        }
    }
    prediction.parse_failed = true;
    prediction.parse_path = ParsePath::failed;
    return prediction;
}

ScoredRun score(const ParsedPrediction& pred, const GroundTruth& gt) {
    ScoredRun run;
    MetricRow& row = run.row;
    row.parse_failed = pred.parse_failed;
    row.parse_path = pred.parse_path;

    if (pred.parse_failed) {
        run.fn_names.assign(gt.active_names.begin(), gt.active_names.end());
    } else {
        for (const std::string& name : pred.names) {
            if (gt.active_names.count(name)) {
                run.tp_names.push_back(name);
            } else {
                run.fp_names.push_back(name);
            }
        }
        for (const std::string& name : gt.active_names) {
            if (!pred.names.count(name)) run.fn_names.push_back(name);
        }
    }

    row.tp = static_cast<int>(run.tp_names.size());
    row.fp = static_cast<int>(run.fp_names.size());
    row.fn = static_cast<int>(run.fn_names.size());
    row.precision = row.tp + row.fp > 0
                        ? static_cast<double>(row.tp) / (row.tp + row.fp)
                        : 0.0;
    row.recall = row.tp + row.fn > 0
                     ? static_cast<double>(row.tp) / (row.tp + row.fn)
                     : 0.0;
    row.f1 = row.precision + row.recall > 0.0
                 ? 2.0 * row.precision * row.recall / (row.precision + row.recall)
                 : 0.0;
    row.perfect = row.f1 == 1.0;
    row.zero = row.f1 == 0.0;
    return run;
}

const char* to_string(FailureClass c) {
    switch (c) {
        case FailureClass::parseable: return "parseable";
        case FailureClass::garbled: return "garbled";
        case FailureClass::prompt_echo: return "prompt_echo";
        case FailureClass::empty: return "empty";
        case FailureClass::greeting: return "greeting";
    }
    return "garbled";
}

const std::vector<std::string>& default_greeting_lexicon() {
    static const std::vector<std::string> lexicon = {
        "hello",          "hi",
        "hey",            "greetings",
        "good morning",   "good afternoon",
        "good evening",   "how can i help",
        "i'm happy to help", "welcome",
    };
    return lexicon;
}

namespace {

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

bool contains_word_aligned(std::string_view haystack, std::string_view needle) {
    if (needle.empty() || needle.size() > haystack.size()) return false;
    for (size_t pos = 0; pos + needle.size() <= haystack.size(); ++pos) {
        if (haystack.compare(pos, needle.size(), needle) != 0) continue;
        bool left_ok = pos == 0 || !is_word_char(haystack[pos - 1]);
        size_t end = pos + needle.size();
        bool right_ok = end == haystack.size() || !is_word_char(haystack[end]);
        if (left_ok && right_ok) return true;
    }
    return false;
}

}  // namespace

FailureClass classify_failure(std::string_view raw, std::string_view prompt,
                              const FailureRules& rules) {
    if (!parse_model_output(raw).parse_failed) {
        return FailureClass::parseable;
    }
    if (trim(raw).empty()) {
        return FailureClass::empty;
    }

    size_t common = 0;
    size_t limit = std::min(raw.size(), prompt.size());
    while (common < limit && raw[common] == prompt[common]) ++common;
    if (common >= static_cast<size_t>(rules.echo_prefix_chars)) {
        return FailureClass::prompt_echo;
    }

    std::string window(raw.substr(
        0, std::min(raw.size(), static_cast<size_t>(rules.greeting_window_chars))));
    std::transform(window.begin(), window.end(), window.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    const auto& lexicon =
        rules.greeting_lexicon.empty() ? default_greeting_lexicon() : rules.greeting_lexicon;
    for (const std::string& phrase : lexicon) {
        if (contains_word_aligned(window, phrase)) {
            return FailureClass::greeting;
        }
    }
    return FailureClass::garbled;
}

double median_lower(std::vector<double> values) {
    if (values.empty()) throw data_error("median of empty sequence");
    std::sort(values.begin(), values.end());
    return values[(values.size() - 1) / 2];
}

std::vector<AggregateRow> aggregate(const std::vector<MetricRow>& rows) {
    if (rows.empty()) throw data_error("aggregate: no metric rows");

    std::map<std::pair<std::string, char>, std::vector<const MetricRow*>> groups;
    for (const MetricRow& row : rows) {
        groups[{row.model_id, strategy_code(row.strategy)}].push_back(&row);
    }

    std::vector<AggregateRow> out;
    out.reserve(groups.size());
    for (const auto& [key, group] : groups) {
        AggregateRow agg;
        agg.model_id = key.first;
        agg.strategy = *strategy_from_code(key.second);
        agg.n_runs = static_cast<int>(group.size());
        std::vector<double> f1s;
        f1s.reserve(group.size());
        for (const MetricRow* row : group) {
            agg.mean_precision += row->precision;
            agg.mean_recall += row->recall;
            agg.mean_f1 += row->f1;
            f1s.push_back(row->f1);
            agg.perfect_count += row->perfect ? 1 : 0;
            agg.zero_count += row->zero ? 1 : 0;
            agg.parse_fail_count += row->parse_failed ? 1 : 0;
        }
        agg.mean_precision /= agg.n_runs;
        agg.mean_recall /= agg.n_runs;
        agg.mean_f1 /= agg.n_runs;
        agg.median_f1 = median_lower(std::move(f1s));
        out.push_back(std::move(agg));
    }
    return out;
}

}  // namespace medrecon
