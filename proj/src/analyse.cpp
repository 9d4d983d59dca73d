#include "medrecon/analyse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "medrecon/errors.hpp"

namespace medrecon {

namespace {

// Ascending average ranks of |d|, kept as doubled integers so tied ranks
// (x.5) stay exact. Returns doubled ranks aligned with the input order plus
// the tie-group sizes.
struct RankedDiffs {
    std::vector<int64_t> doubled_ranks;
    std::vector<int> tie_sizes;
};

RankedDiffs rank_absolute(const std::vector<double>& diffs) {
    const size_t n = diffs.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return std::abs(diffs[a]) < std::abs(diffs[b]);
    });

    RankedDiffs out;
    out.doubled_ranks.assign(n, 0);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n &&
               std::abs(diffs[order[j + 1]]) == std::abs(diffs[order[i]])) {
            ++j;
        }
        // ranks i+1 .. j+1 share the average (i+j+2)/2; doubled = i+j+2
        int64_t doubled = static_cast<int64_t>(i) + static_cast<int64_t>(j) + 2;
        for (size_t k = i; k <= j; ++k) out.doubled_ranks[order[k]] = doubled;
        out.tie_sizes.push_back(static_cast<int>(j - i + 1));
        i = j + 1;
    }
    return out;
}

// Exact two-sided p over all 2^n sign assignments, tie-aware. Counting runs
// on the doubled-rank lattice, so the distribution is computed without any
// floating-point comparison.
double exact_two_sided_p(const std::vector<int64_t>& doubled_ranks,
                         int64_t observed_doubled_w) {
    const size_t n = doubled_ranks.size();
    int64_t total = std::accumulate(doubled_ranks.begin(), doubled_ranks.end(),
                                    int64_t{0});
    std::vector<uint64_t> counts(static_cast<size_t>(total) + 1, 0);
    counts[0] = 1;
    for (int64_t rank : doubled_ranks) {
        for (int64_t w = total; w >= rank; --w) {
            counts[static_cast<size_t>(w)] += counts[static_cast<size_t>(w - rank)];
        }
    }
    uint64_t count_le = 0;
    uint64_t count_ge = 0;
    for (int64_t w = 0; w <= total; ++w) {
        if (w <= observed_doubled_w) count_le += counts[static_cast<size_t>(w)];
        if (w >= observed_doubled_w) count_ge += counts[static_cast<size_t>(w)];
    }
    double denom = std::ldexp(1.0, static_cast<int>(n));  // 2^n, exact
    double tail = static_cast<double>(std::min(count_le, count_ge));
    return std::min(1.0, 2.0 * tail / denom);
}

}  // namespace

double normal_two_sided_p(double z) {
    return std::erfc(std::abs(z) / std::sqrt(2.0));
}

WilcoxonOutcome wilcoxon_signed_rank(
    std::span<const std::pair<double, double>> pairs, int exact_max_n) {
    if (pairs.empty()) {
        throw data_error("wilcoxon_signed_rank: no pairs");
    }

    WilcoxonOutcome outcome;
    outcome.n_pairs = static_cast<int>(pairs.size());

    std::vector<double> diffs;
    diffs.reserve(pairs.size());
    for (const auto& [a, b] : pairs) {
        double d = b - a;
        if (d != 0.0) diffs.push_back(d);
    }
    outcome.n_nonzero = static_cast<int>(diffs.size());
    if (diffs.empty()) {
        outcome.method = WilcoxonMethod::exact;
        return outcome;  // W = 0, z = 0, p = 1, r = 0
    }

    RankedDiffs ranked = rank_absolute(diffs);
    int64_t doubled_w = 0;
    for (size_t i = 0; i < diffs.size(); ++i) {
        if (diffs[i] > 0.0) doubled_w += ranked.doubled_ranks[i];
    }
    outcome.W = static_cast<double>(doubled_w) / 2.0;

    // Tie-corrected normal z with continuity correction, reported for both
    // methods: the effect size is always derived from it.
    const double n = outcome.n_nonzero;
    const double mean = n * (n + 1.0) / 4.0;
    double tie_term = 0.0;
    for (int t : ranked.tie_sizes) {
        tie_term += static_cast<double>(t) * t * t - t;
    }
    const double variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    const double sigma = std::sqrt(variance);
    if (sigma > 0.0 && outcome.W != mean) {
        double shifted = outcome.W - mean;
        shifted += shifted > 0.0 ? -0.5 : 0.5;  // continuity correction
        outcome.z_score = shifted / sigma;
    }

    if (outcome.n_nonzero <= exact_max_n) {
        outcome.method = WilcoxonMethod::exact;
        outcome.p_raw = exact_two_sided_p(ranked.doubled_ranks, doubled_w);
    } else {
        outcome.method = WilcoxonMethod::normal_approx;
        outcome.p_raw = normal_two_sided_p(outcome.z_score);
    }
    outcome.p_corrected = outcome.p_raw;
    outcome.r_effect = effect_size_r(outcome.z_score, outcome.n_pairs);
    return outcome;
}

double bonferroni(double p, int k) {
    return std::min(1.0, p * static_cast<double>(k));
}

double effect_size_r(double z, int n_pairs) {
    return std::abs(z) / std::sqrt(static_cast<double>(n_pairs));
}

EffectLabel effect_label(double r) {
    if (r >= 0.5) return EffectLabel::large_effect;
    if (r >= 0.3) return EffectLabel::medium_effect;
    if (r >= 0.1) return EffectLabel::small_effect;
    return EffectLabel::below_small;
}

const char* to_string(EffectLabel label) {
    switch (label) {
        case EffectLabel::below_small: return "below-small";
        case EffectLabel::small_effect: return "small";
        case EffectLabel::medium_effect: return "medium";
        case EffectLabel::large_effect: return "large";
    }
    return "below-small";
}

std::string significance_marker(double p) {
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    return "ns";
}

namespace {

std::map<std::string, double> f1_by_patient(const std::vector<MetricRow>& rows,
                                            const std::string& model_id,
                                            Strategy strategy) {
    std::map<std::string, double> out;
    for (const MetricRow& row : rows) {
        if (row.model_id == model_id && row.strategy == strategy) {
            out[row.patient_id] = row.f1;
        }
    }
    return out;
}

std::vector<std::pair<double, double>> align_pairs(
    const std::map<std::string, double>& a,
    const std::map<std::string, double>& b, const std::string& what) {
    if (a.size() != b.size()) {
        throw data_error(what + ": patient sets misaligned (" +
                         std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + " patients)");
    }
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(a.size());
    for (const auto& [patient_id, f1_a] : a) {
        auto it = b.find(patient_id);
        if (it == b.end()) {
            throw data_error(what + ": patient " + patient_id +
                             " missing from one side");
        }
        pairs.emplace_back(f1_a, it->second);
    }
    return pairs;
}

}  // namespace

ComparisonRow compare_strategies(const std::vector<MetricRow>& rows,
                                 const std::string& model_id, Strategy baseline,
                                 Strategy challenger, int bonferroni_k) {
    std::string test_label = std::string(1, strategy_code(baseline)) + " vs " +
                             strategy_code(challenger);
    auto base = f1_by_patient(rows, model_id, baseline);
    auto chal = f1_by_patient(rows, model_id, challenger);
    if (base.empty() || chal.empty()) {
        throw data_error("compare_strategies: no rows for " + model_id + " " +
                         test_label);
    }
    ComparisonRow row;
    row.model_label = model_id;
    row.test_label = test_label;
    row.outcome =
        wilcoxon_signed_rank(align_pairs(base, chal, model_id + " " + test_label));
    row.outcome.p_corrected = bonferroni(row.outcome.p_raw, bonferroni_k);
    row.significance = significance_marker(row.outcome.p_corrected);
    return row;
}

ComparisonRow compare_models(const std::vector<MetricRow>& rows,
                             const std::string& model_a,
                             const std::string& model_b, Strategy strategy,
                             int bonferroni_k) {
    auto a = f1_by_patient(rows, model_a, strategy);
    auto b = f1_by_patient(rows, model_b, strategy);
    std::string label = model_a + " vs " + model_b;
    if (a.empty() || b.empty()) {
        throw data_error("compare_models: no rows for " + label);
    }
    ComparisonRow row;
    row.model_label = label;
    row.test_label = std::string("strategy ") + strategy_code(strategy);
    row.outcome = wilcoxon_signed_rank(align_pairs(a, b, label));
    row.outcome.p_corrected = bonferroni(row.outcome.p_raw, bonferroni_k);
    row.significance = significance_marker(row.outcome.p_corrected);
    return row;
}

std::vector<StratifiedRecall> recall_by_active_count(
    const std::vector<MetricRow>& group_rows,
    const std::map<std::string, GroundTruth>& ground_truth, int max_singleton) {
    std::map<int, std::pair<double, int>> bins;  // bin -> (recall sum, count)
    for (const MetricRow& row : group_rows) {
        auto it = ground_truth.find(row.patient_id);
        if (it == ground_truth.end()) {
            throw data_error("recall_by_active_count: no ground truth for " +
                             row.patient_id);
        }
        int actives = static_cast<int>(it->second.active_names.size());
        int bin = actives <= max_singleton ? actives : max_singleton + 1;
        auto& [sum, count] = bins[bin];
        sum += row.recall;
        ++count;
    }

    std::vector<StratifiedRecall> out;
    for (const auto& [bin, acc] : bins) {
        StratifiedRecall sr;
        if (bin <= max_singleton) {
            sr.bin_label = std::to_string(bin);
            sr.bin_lo = bin;
            sr.bin_hi = bin + 1;
        } else {
            sr.bin_label = std::to_string(max_singleton + 1) + "+";
            sr.bin_lo = max_singleton + 1;
            sr.bin_hi = std::numeric_limits<double>::infinity();
        }
        sr.mean_recall = acc.first / acc.second;
        sr.n_patients = acc.second;
        out.push_back(std::move(sr));
    }
    return out;
}

std::vector<StratifiedRecall> recall_by_history_span(
    const std::vector<MetricRow>& group_rows,
    const std::map<std::string, double>& span_years) {
    // Cohort spans are >= 10 by construction; anything below lands in the
    // first bin rather than being dropped.
    static constexpr double kEdges[] = {10.0, 15.0, 20.0, 25.0};
    std::map<int, std::pair<double, int>> bins;
    for (const MetricRow& row : group_rows) {
        auto it = span_years.find(row.patient_id);
        if (it == span_years.end()) {
            throw data_error("recall_by_history_span: no span for " +
                             row.patient_id);
        }
        int bin = 0;
        for (int i = 1; i < 4; ++i) {
            if (it->second >= kEdges[i]) bin = i;
        }
        auto& [sum, count] = bins[bin];
        sum += row.recall;
        ++count;
    }

    std::vector<StratifiedRecall> out;
    for (const auto& [bin, acc] : bins) {
        StratifiedRecall sr;
        sr.bin_lo = kEdges[bin];
        if (bin < 3) {
            sr.bin_hi = kEdges[bin + 1];
            sr.bin_label = "[" + std::to_string(static_cast<int>(sr.bin_lo)) + "," +
                           std::to_string(static_cast<int>(sr.bin_hi)) + ")";
        } else {
            sr.bin_hi = std::numeric_limits<double>::infinity();
            sr.bin_label = "25+";
        }
        sr.mean_recall = acc.first / acc.second;
        sr.n_patients = acc.second;
        out.push_back(std::move(sr));
    }
    return out;
}

OmissionReport omission_analysis(const std::vector<ScoredRun>& runs,
                                 int threshold_chars, int top_k) {
    OmissionReport report;
    report.threshold_chars = threshold_chars;
    int long_fn = 0;
    int long_tp = 0;
    for (const ScoredRun& run : runs) {
        for (const std::string& name : run.fn_names) {
            ++report.fn_counts[name];
            ++report.total_fn;
            if (static_cast<int>(name.size()) > threshold_chars) ++long_fn;
        }
        for (const std::string& name : run.tp_names) {
            ++report.total_tp;
            if (static_cast<int>(name.size()) > threshold_chars) ++long_tp;
        }
    }
    report.long_share_fn =
        report.total_fn > 0 ? static_cast<double>(long_fn) / report.total_fn : 0.0;
    report.long_share_tp =
        report.total_tp > 0 ? static_cast<double>(long_tp) / report.total_tp : 0.0;

    std::vector<std::pair<std::string, int>> ranked(report.fn_counts.begin(),
                                                    report.fn_counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (static_cast<int>(ranked.size()) > top_k) ranked.resize(top_k);
    report.top_missed = std::move(ranked);
    return report;
}

std::map<FailureClass, int> failure_breakdown(
    const std::vector<std::pair<std::string, std::string>>& raw_and_prompt,
    const FailureRules& rules) {
    std::map<FailureClass, int> counts = {
        {FailureClass::parseable, 0}, {FailureClass::garbled, 0},
        {FailureClass::prompt_echo, 0}, {FailureClass::empty, 0},
        {FailureClass::greeting, 0},
    };
    for (const auto& [raw, prompt] : raw_and_prompt) {
        ++counts[classify_failure(raw, prompt, rules)];
    }
    return counts;
}

}  // namespace medrecon
