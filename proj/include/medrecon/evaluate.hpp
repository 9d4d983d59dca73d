#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "medrecon/fhir.hpp"
#include "medrecon/serialise.hpp"

namespace medrecon {

enum class ParsePath { strict, fence_stripped, failed };

const char* to_string(ParsePath p);

struct ParsedPrediction {
    std::set<std::string> names;  // deduplicated; empty when parse failed
    bool parse_failed = false;
    ParsePath parse_path = ParsePath::failed;
};

/// Strict-parses raw as a JSON array of strings. On failure, strips one
/// leading/trailing code-fence pair plus whitespace and tries once more.
/// Any other shape (object, mixed-type array, prose) is a parse failure --
/// failure is a value here, never an exception. Element whitespace is
/// preserved; duplicates collapse.
ParsedPrediction parse_model_output(std::string_view raw);

struct MetricRow {
    std::string patient_id;
    std::string model_id;
    Strategy strategy = Strategy::A_raw_json;
    int tp = 0, fp = 0, fn = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0;
    bool perfect = false;       // f1 == 1
    bool zero = false;          // f1 == 0
    bool parse_failed = false;
    ParsePath parse_path = ParsePath::failed;
};

struct ScoredRun {
    MetricRow row;
    std::vector<std::string> tp_names;
    std::vector<std::string> fp_names;
    std::vector<std::string> fn_names;  // = all of gt for parse failures
};

/// Exact byte-for-byte string matching: tp = |pred ∩ gt|, fp = |pred \ gt|,
/// fn = |gt \ pred|. A parse failure, or an empty prediction against
/// non-empty ground truth, scores precision = recall = f1 = 0.
/// Identifier fields of the returned row are left for the caller.
ScoredRun score(const ParsedPrediction& pred, const GroundTruth& gt);

enum class FailureClass { parseable, garbled, prompt_echo, empty, greeting };

const char* to_string(FailureClass c);

struct FailureRules {
    int echo_prefix_chars = 80;     // common-prefix length that makes an echo
    int greeting_window_chars = 40; // lexicon search window
    std::vector<std::string> greeting_lexicon;  // empty = defaults
};

const std::vector<std::string>& default_greeting_lexicon();

/// Total, single-valued classification of arbitrary byte strings:
/// parseable if parse succeeds; else empty when whitespace-only; else
/// prompt_echo when the longest common prefix with the prompt reaches the
/// threshold; else greeting when a lexicon phrase appears word-aligned in
/// the opening window; else garbled.
FailureClass classify_failure(std::string_view raw, std::string_view prompt,
                              const FailureRules& rules = {});

struct AggregateRow {
    std::string model_id;
    Strategy strategy = Strategy::A_raw_json;
    int n_runs = 0;
    double mean_precision = 0.0;
    double mean_recall = 0.0;
    double mean_f1 = 0.0;
    double median_f1 = 0.0;  // lower-middle element for even counts
    int perfect_count = 0;
    int zero_count = 0;
    int parse_fail_count = 0;
};

/// Lower-middle median: element at (n-1)/2 of the sorted values.
double median_lower(std::vector<double> values);

/// Folds per-run rows into one summary row per (model, strategy), sorted by
/// model then strategy. Throws data_error on empty input.
std::vector<AggregateRow> aggregate(const std::vector<MetricRow>& rows);

}  // namespace medrecon
