#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "medrecon/evaluate.hpp"

namespace medrecon {

enum class WilcoxonMethod { exact, normal_approx };

struct WilcoxonOutcome {
    double W = 0.0;        // sum of positive-difference ranks
    double z_score = 0.0;  // tie-corrected, continuity-corrected
    double p_raw = 1.0;    // two-sided
    double p_corrected = 1.0;
    double r_effect = 0.0;  // |z| / sqrt(n_pairs)
    int n_pairs = 0;        // all pairs, zero differences included
    int n_nonzero = 0;      // pairs entering the ranking
    WilcoxonMethod method = WilcoxonMethod::exact;
};

/// Paired Wilcoxon signed-rank test on differences b - a. Zero differences
/// are discarded from the ranking (classic convention) but still count in
/// n_pairs, which is the N used for the effect size. |d| is ranked with
/// average ranks for ties. For n_nonzero <= exact_max_n the two-sided p
/// comes from the exact, tie-aware null distribution over all sign
/// assignments; above that, a tie-corrected normal approximation with
/// continuity correction. n_nonzero == 0 yields W = 0, z = 0, p = 1.
/// Throws data_error on empty input.
WilcoxonOutcome wilcoxon_signed_rank(
    std::span<const std::pair<double, double>> pairs, int exact_max_n = 25);

/// min(1, k * p).
double bonferroni(double p, int k);

double effect_size_r(double z, int n_pairs);

enum class EffectLabel { below_small, small_effect, medium_effect, large_effect };

/// 0.1 / 0.3 / 0.5 thresholds.
EffectLabel effect_label(double r);
const char* to_string(EffectLabel label);

/// Two-sided tail probability of a standard normal at |z|.
double normal_two_sided_p(double z);

/// "***" p<0.001, "**" p<0.01, "*" p<0.05, "ns" otherwise.
std::string significance_marker(double p);

struct ComparisonRow {
    std::string model_label;  // "Mistral-7B" or "Mistral-7B vs Llama-3.1-8B"
    std::string test_label;   // "A vs C" or "strategy C"
    WilcoxonOutcome outcome;
    std::string significance;
};

/// Within-model strategy comparison, pairs aligned by patient_id. Throws
/// data_error when the two strategies cover different patient sets.
ComparisonRow compare_strategies(const std::vector<MetricRow>& rows,
                                 const std::string& model_id,
                                 Strategy baseline, Strategy challenger,
                                 int bonferroni_k);

/// Cross-model comparison on a fixed strategy, paired by patient.
ComparisonRow compare_models(const std::vector<MetricRow>& rows,
                             const std::string& model_a,
                             const std::string& model_b, Strategy strategy,
                             int bonferroni_k = 1);

struct StratifiedRecall {
    std::string bin_label;
    double bin_lo = 0.0;
    double bin_hi = 0.0;  // exclusive; +inf for the open bin
    double mean_recall = 0.0;
    int n_patients = 0;
};

/// Mean recall binned by ground-truth active-medication count: singleton
/// bins 1..max_singleton plus one open "N+" bin. Rows must belong to one
/// (model, strategy) group; every patient lands in exactly one bin.
std::vector<StratifiedRecall> recall_by_active_count(
    const std::vector<MetricRow>& group_rows,
    const std::map<std::string, GroundTruth>& ground_truth,
    int max_singleton = 10);

/// Mean recall binned by history span: [10,15), [15,20), [20,25), [25,inf).
std::vector<StratifiedRecall> recall_by_history_span(
    const std::vector<MetricRow>& group_rows,
    const std::map<std::string, double>& span_years);

struct OmissionReport {
    std::map<std::string, int> fn_counts;  // per-name omission counts
    int total_fn = 0;
    int total_tp = 0;
    double long_share_fn = 0.0;  // share of omissions longer than the threshold
    double long_share_tp = 0.0;  // same share among true positives
    std::vector<std::pair<std::string, int>> top_missed;  // count desc, ties alphabetical
    int threshold_chars = 50;
};

OmissionReport omission_analysis(const std::vector<ScoredRun>& runs,
                                 int threshold_chars = 50, int top_k = 5);

/// Classifies every (raw output, prompt) pair of one group; counts sum to
/// the group size.
std::map<FailureClass, int> failure_breakdown(
    const std::vector<std::pair<std::string, std::string>>& raw_and_prompt,
    const FailureRules& rules = {});

}  // namespace medrecon
