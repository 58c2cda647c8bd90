#include "sbsa/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sbsa/errors.hpp"
#include "sbsa/transform.hpp"

namespace sbsa {

namespace {

// Beat template over absolute time from the beat onset: four gaussian lobes
// (systolic, tidal, dicrotic, late diastolic) with roughly equal amp *
// width^2, so each lobe contributes about two components at a common chi
// rung and the error-target ladder stops at single-digit component counts.
// Lobe times are fixed in seconds -- only the flat diastolic tail stretches
// when the interval changes -- so |lambda_1| does not feed back on beat
// length. The systolic rising width is fixed (upstroke steepness then tracks
// amplitude alone); the falling width carries the per-beat width factor.
struct Lobe {
    double amp, center_s, width_s;
};
constexpr Lobe kLobes[] = {
    {1.00, 0.170, 0.0290},
    {0.55, 0.290, 0.0352},
    {0.35, 0.400, 0.0449},
    {0.22, 0.530, 0.0563},
};
constexpr double kWidthFactorMean = 1.0;
// Smoothstep taper at both window ends: the waveform leaves the pedestal
// with zero value and slope at the onset sample, so the detected foot is the
// construction boundary itself.
constexpr double kTaperS = 0.05;

constexpr std::size_t kMinBeatSamples = 32;

double smoothstep01(double x) {
    x = std::clamp(x, 0.0, 1.0);
    return x * x * (3.0 - 2.0 * x);
}

struct SplitMix64 {
    std::uint64_t state;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    // Irwin-Hall sum of 12 uniforms: mean 6, unit variance.
    double gaussian() {
        double s = 0.0;
        for (int i = 0; i < 12; ++i) s += uniform();
        return s - 6.0;
    }
};

// Mean-reverting AR(1) walk, clamped at 2.25 stationary deviations so slope
// ratios and pedestal positivity hold for every beat.
struct Walk {
    static constexpr double kRho = 0.9;
    double mean, sd, value;
    Walk(double m, double s) : mean(m), sd(s), value(m) {}
    double step(SplitMix64& rng) {
        value = mean + kRho * (value - mean) +
                sd * std::sqrt(1.0 - kRho * kRho) * rng.gaussian();
        value = std::clamp(value, mean - 2.25 * sd, mean + 2.25 * sd);
        return value;
    }
};

double template_value(double t, double width_factor) {
    double v = 0.0;
    for (std::size_t i = 0; i < std::size(kLobes); ++i) {
        double w = kLobes[i].width_s;
        if (i == 0 && t > kLobes[i].center_s) w *= width_factor;
        const double z = (t - kLobes[i].center_s) / w;
        v += kLobes[i].amp * std::exp(-0.5 * z * z);
    }
    return v;
}

// Appends one beat of `length` samples at spacing dt. The taper pins both
// window ends to the pedestal with zero slope, so consecutive beats join
// without spikes or dips and the waveform stays >= pedestal throughout.
void append_beat(std::vector<double>& out, std::size_t length, double dt,
                 double pedestal, double amp, double width_factor) {
    const double span = static_cast<double>(length) * dt;
    const std::size_t start = out.size();
    double vmax = 0.0;
    for (std::size_t j = 0; j < length; ++j) {
        const double t = static_cast<double>(j) * dt;
        const double v = template_value(t, width_factor) * smoothstep01(t / kTaperS) *
                         smoothstep01((span - t) / kTaperS);
        vmax = std::max(vmax, v);
        out.push_back(v);
    }
    const double scale = amp / vmax;
    for (std::size_t j = start; j < out.size(); ++j)
        out[j] = pedestal + scale * out[j];
}

double measure_lambda1(const std::vector<double>& samples, std::size_t start,
                       std::size_t length, double dt, const BeatConfig& analysis) {
    Signal beat;
    beat.samples.assign(samples.begin() + static_cast<std::ptrdiff_t>(start),
                        samples.begin() + static_cast<std::ptrdiff_t>(start + length));
    beat.dt = dt;
    beat.t0 = dt * static_cast<double>(start);
    const SbsaResult res = select_chi(beat, analysis.chi);
    if (res.decomposition.empty()) return 0.0;
    const double k1 = res.decomposition.kappas[0];
    return k1 * k1;
}

void validate(const SyntheticAbpConfig& cfg) {
    if (!(cfg.rate_hz > 0.0) || !std::isfinite(cfg.rate_hz))
        throw input_error("abp synthesis: sample rate must be positive, got " +
                          std::to_string(cfg.rate_hz));
    if (!(cfg.duration_s > 0.0) || !std::isfinite(cfg.duration_s))
        throw input_error("abp synthesis: duration must be positive, got " +
                          std::to_string(cfg.duration_s));
    if (!(cfg.pulse_mmhg > 0.0))
        throw input_error("abp synthesis: pulse amplitude must be positive");
    if (!(cfg.dbp_mmhg > 0.0) || !(cfg.dbp_mmhg - 2.25 * cfg.dbp_sd_mmhg >= 0.0))
        throw input_error("abp synthesis: pedestal must stay positive; need "
                          "dbp_mmhg > 2.25 * dbp_sd_mmhg");
    if (!(cfg.amp_variability >= 0.0 && cfg.amp_variability <= 0.13))
        throw input_error("abp synthesis: amp_variability must lie in [0, 0.13] so "
                          "every upstroke stays above half the corpus slope maximum");
    if (!(cfg.width_variability >= 0.0 && cfg.width_variability <= 0.25))
        throw input_error("abp synthesis: width_variability must lie in [0, 0.25]");
    if (!(cfg.target_pi_ms >= 800.0 && cfg.target_pi_ms <= 2500.0))
        throw input_error("abp synthesis: target_pi_ms must lie in [800, 2500] so the "
                          "shortest beat still holds the full lobe complex");
    if (!(cfg.pi_noise_ms >= 0.0))
        throw input_error("abp synthesis: pi_noise_ms must be nonnegative");
    if (!std::isfinite(cfg.pi_slope))
        throw input_error("abp synthesis: pi_slope must be finite");
}

} // namespace

SyntheticAbpRecording synthesize_abp_recording(const SyntheticAbpConfig& cfg) {
    validate(cfg);
    const double dt = 1.0 / cfg.rate_hz;
    const std::size_t total =
        static_cast<std::size_t>(std::llround(cfg.duration_s * cfg.rate_hz));
    const std::size_t nominal_len =
        static_cast<std::size_t>(std::llround(cfg.target_pi_ms / 1000.0 / dt));
    if (nominal_len < kMinBeatSamples || total < 2 * nominal_len)
        throw input_error("abp synthesis: recording must span at least two beats "
                          "at the target interval");

    // Nominal beat fixes the coupling intercept: the mean-parameter beat maps
    // to the target interval exactly.
    std::vector<double> scratch;
    append_beat(scratch, nominal_len, dt, cfg.dbp_mmhg, cfg.pulse_mmhg, kWidthFactorMean);
    const double lambda_nominal =
        measure_lambda1(scratch, 0, nominal_len, dt, cfg.analysis);
    const double intercept = cfg.pi_intercept_ms != 0.0
                                 ? cfg.pi_intercept_ms
                                 : cfg.target_pi_ms - cfg.pi_slope * lambda_nominal;

    SplitMix64 rng(cfg.seed);
    Walk amp(cfg.pulse_mmhg, cfg.pulse_mmhg * cfg.amp_variability);
    Walk pedestal(cfg.dbp_mmhg, cfg.dbp_sd_mmhg);
    Walk width(kWidthFactorMean, kWidthFactorMean * cfg.width_variability);

    SyntheticAbpRecording rec;
    rec.pi_intercept_ms = intercept;
    rec.signal.dt = dt;
    rec.signal.t0 = 0.0;
    std::vector<double>& samples = rec.signal.samples;
    samples.reserve(total);

    std::size_t len = nominal_len;
    double last_pedestal = cfg.dbp_mmhg;
    while (samples.size() + len <= total) {
        const std::size_t onset = samples.size();
        const double a = amp.step(rng);
        const double p = pedestal.step(rng);
        const double w = width.step(rng);
        append_beat(samples, len, dt, p, a, w);
        last_pedestal = p;

        const double lambda1 = measure_lambda1(samples, onset, len, dt, cfg.analysis);
        rec.onsets.push_back(onset);
        rec.lambda1_abs.push_back(lambda1);
        rec.programmed_pi_ms.push_back(static_cast<double>(len) * dt * 1000.0);

        double pi_next = cfg.pi_slope * lambda1 + intercept + cfg.pi_noise_ms * rng.gaussian();
        // Keep programmed intervals physiological and long enough for the
        // fixed lobe complex plus its end taper.
        pi_next = std::clamp(pi_next, std::max(0.70 * cfg.target_pi_ms, 730.0),
                             1.35 * cfg.target_pi_ms);
        len = std::max<std::size_t>(
            kMinBeatSamples,
            static_cast<std::size_t>(std::llround(pi_next / 1000.0 / dt)));
    }

    // Flat pedestal tail: no upstroke there, so segmentation ends at the last
    // complete beat instead of finding a truncated one.
    samples.resize(total, last_pedestal);
    return rec;
}

} // namespace sbsa
