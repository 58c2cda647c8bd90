#pragma once

#include <cstddef>
#include <vector>

// Statistical post-processing for beat-series analysis: ordinary least
// squares over lagged predictor/interval pairs, the Wilcoxon signed-rank
// paired test (exact null distribution for small samples, tie-corrected
// normal approximation for large ones), and mean +- SEM summaries.

namespace sbsa {

// One lagged point for baroreflex-style regressions: x is the predictor
// taken from beat n (|lambda_1|, SBP, or PP), y the pulse interval of beat
// n+1 in ms. Produced by the beat pipeline, consumed here.
struct BrsPair {
    double x = 0.0;
    double y = 0.0;
};

struct RegressionResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0; // 1 - SSres/SStot, in [0, 1]
    std::size_t n = 0;
};

struct PairedTestResult {
    double statistic = 0.0;    // W = sum of ranks of positive differences
    double p_value = 1.0;      // two-sided, in (0, 1]
    std::size_t n_effective = 0; // pairs remaining after dropping zeros
    bool exact = false;        // true if p came from full enumeration
};

struct SummaryStat {
    double mean = 0.0;
    double sem = 0.0; // sample stddev / sqrt(n)
    std::size_t n = 0;
};

// Ordinary least squares of y on x. Needs >= 3 pairs and non-constant x
// (zero x-variance throws input_error). When y is constant while x varies
// the fit is the horizontal line: slope 0, r_squared 0.
RegressionResult linear_regression(const std::vector<BrsPair>& pairs);

// Two-sided Wilcoxon signed-rank test of before vs after (paired). Zero
// differences are dropped; ties among |differences| get midranks. The null
// distribution is enumerated exactly for n_effective <= 20 and approximated
// by a tie-corrected normal with continuity correction above that. Throws
// input_error on length mismatch, insufficient_data_error when fewer than 5
// non-zero differences remain.
PairedTestResult wilcoxon_signed_rank(const std::vector<double>& before,
                                      const std::vector<double>& after);

// Mean and standard error (sample stddev / sqrt(n)); needs n >= 2.
SummaryStat summarize(const std::vector<double>& values);

namespace detail {

// Midranks of the absolute differences (average rank within tied groups).
std::vector<double> midranks(std::vector<double> abs_values);

// Exact two-sided p: enumerate all 2^n sign assignments of the given ranks
// (subset-sum counting over doubled ranks, which are integers) and take
// 2 * min(P(W <= w), P(W >= w)) capped at 1.
double wilcoxon_exact_p(double w, const std::vector<double>& ranks);

// Tie-corrected normal approximation with 0.5 continuity correction:
// sigma^2 = n(n+1)(2n+1)/24 - sum(t^3 - t)/48 over tie group sizes t.
double wilcoxon_normal_p(double w, const std::vector<double>& ranks);

} // namespace detail

} // namespace sbsa
