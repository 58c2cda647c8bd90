#include "sbsa/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

#include "sbsa/errors.hpp"

namespace sbsa {

RegressionResult linear_regression(const std::vector<BrsPair>& pairs) {
    const std::size_t n = pairs.size();
    if (n < 3)
        throw insufficient_data_error("linear regression needs at least 3 pairs, got " +
                                      std::to_string(n));
    for (const BrsPair& p : pairs)
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw input_error("linear regression input contains a non-finite value");

    double min_x = pairs[0].x, max_x = pairs[0].x;
    double min_y = pairs[0].y, max_y = pairs[0].y;
    double mx = 0.0, my = 0.0;
    for (const BrsPair& p : pairs) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
        mx += p.x;
        my += p.y;
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    if (min_x == max_x)
        throw input_error("linear regression x values are degenerate (zero variance)");

    RegressionResult r;
    r.n = n;
    if (min_y == max_y) {
        // horizontal data: the fit is the constant line and explains nothing
        r.slope = 0.0;
        r.intercept = my;
        r.r_squared = 0.0;
        return r;
    }

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const BrsPair& p : pairs) {
        const double dx = p.x - mx;
        const double dy = p.y - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;

    double ss_res = 0.0;
    for (const BrsPair& p : pairs) {
        const double e = p.y - (r.intercept + r.slope * p.x);
        ss_res += e * e;
    }
    r.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    return r;
}

SummaryStat summarize(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n < 2)
        throw insufficient_data_error("summary statistics need at least 2 values, got " +
                                      std::to_string(n));
    for (double v : values)
        if (!std::isfinite(v)) throw input_error("summary input contains a non-finite value");

    SummaryStat s;
    s.n = n;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) {
        const double d = v - s.mean;
        ss += d * d;
    }
    // sem = sample stddev / sqrt(n) = sqrt(ss / ((n-1) n))
    s.sem = std::sqrt(ss / (static_cast<double>(n - 1) * static_cast<double>(n)));
    return s;
}

namespace detail {

std::vector<double> midranks(std::vector<double> abs_values) {
    const std::size_t n = abs_values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return abs_values[a] < abs_values[b];
    });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && abs_values[order[j + 1]] == abs_values[order[i]]) ++j;
        // positions i..j (0-based) share the average of ranks i+1..j+1
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double wilcoxon_exact_p(double w, const std::vector<double>& ranks) {
    const std::size_t n = ranks.size();
    // doubled midranks are exact integers, so the whole distribution lives on
    // an integer lattice of span n(n+1)
    std::vector<std::size_t> r2(n);
    std::size_t span = 0;
    for (std::size_t i = 0; i < n; ++i) {
        r2[i] = static_cast<std::size_t>(std::llround(2.0 * ranks[i]));
        span += r2[i];
    }
    std::vector<std::uint64_t> counts(span + 1, 0);
    counts[0] = 1;
    std::size_t used = 0;
    for (std::size_t i = 0; i < n; ++i) {
        used += r2[i];
        for (std::size_t s = used + 1; s-- > r2[i];) counts[s] += counts[s - r2[i]];
    }
    const auto w2 = static_cast<std::size_t>(std::llround(2.0 * w));
    std::uint64_t below = 0, above = 0;
    for (std::size_t s = 0; s <= span; ++s) {
        if (s <= w2) below += counts[s];
        if (s >= w2) above += counts[s];
    }
    const double total = std::ldexp(1.0, static_cast<int>(n)); // 2^n
    const double tail = static_cast<double>(std::min(below, above)) / total;
    return std::min(1.0, 2.0 * tail);
}

double wilcoxon_normal_p(double w, const std::vector<double>& ranks) {
    const auto n = static_cast<double>(ranks.size());
    const double mu = n * (n + 1.0) / 4.0;
    double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
    // tie correction: subtract sum(t^3 - t)/48 over tied groups
    std::vector<double> sorted(ranks);
    std::sort(sorted.begin(), sorted.end());
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        const auto t = static_cast<double>(j - i + 1);
        var -= (t * t * t - t) / 48.0;
        i = j + 1;
    }
    const double sigma = std::sqrt(var);
    const double z = std::max(std::fabs(w - mu) - 0.5, 0.0) / sigma;
    return std::erfc(z / std::sqrt(2.0));
}

} // namespace detail

PairedTestResult wilcoxon_signed_rank(const std::vector<double>& before,
                                      const std::vector<double>& after) {
    if (before.size() != after.size())
        throw input_error("paired test needs equal-length samples, got " +
                          std::to_string(before.size()) + " and " +
                          std::to_string(after.size()));
    std::vector<double> absd;
    std::vector<bool> positive;
    absd.reserve(before.size());
    for (std::size_t i = 0; i < before.size(); ++i) {
        if (!std::isfinite(before[i]) || !std::isfinite(after[i]))
            throw input_error("paired test input contains a non-finite value");
        const double d = after[i] - before[i];
        if (d == 0.0) continue; // standard practice: zero differences carry no sign
        absd.push_back(std::fabs(d));
        positive.push_back(d > 0.0);
    }
    const std::size_t n = absd.size();
    if (n < 5)
        throw insufficient_data_error("signed-rank test needs at least 5 non-zero "
                                      "differences, got " +
                                      std::to_string(n));

    const std::vector<double> ranks = detail::midranks(absd);
    double w = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (positive[i]) w += ranks[i];

    PairedTestResult res;
    res.statistic = w;
    res.n_effective = n;
    res.exact = n <= 20;
    res.p_value = res.exact ? detail::wilcoxon_exact_p(w, ranks)
                            : detail::wilcoxon_normal_p(w, ranks);
    return res;
}

} // namespace sbsa
