#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sbsa/cardio.hpp"
#include "sbsa/signal.hpp"

// Seeded generator for arterial-pressure-like test recordings. Beats are
// gaussian-lobe pulses on a diastolic pedestal; the interval to the next
// beat is programmed from the current beat's measured |lambda_1|, so the
// lagged-pair regression has a known ground-truth slope. Fully deterministic
// for a given config.

namespace sbsa {

struct SyntheticAbpConfig {
    std::uint64_t seed = 1;
    double duration_s = 120.0;
    double rate_hz = 500.0;

    // Interval coupling: pi_ms(n+1) = pi_slope * |lambda_1|(n) + intercept
    // + gaussian noise, quantized to the sample grid. |lambda_1| is measured
    // by the same analysis the pipeline runs, so the coupling is exact by
    // construction. intercept 0 means "derive it so the nominal beat lands
    // on target_pi_ms".
    double pi_slope = -0.105;     // ms per 1/s^2
    double pi_intercept_ms = 0.0; // 0 -> auto
    double target_pi_ms = 1000.0;
    double pi_noise_ms = 1.0;

    // Waveform scale. The pedestal is kept small on purpose: the soliton sum
    // vanishes at the window edges, so a tall diastolic offset leaves an
    // edge-layer mismatch that no practical component count can fit. Beats
    // that decay near zero at their feet reach the default error target with
    // single-digit component counts.
    double dbp_mmhg = 0.5;    // diastolic pedestal
    double pulse_mmhg = 45.0; // nominal pulse amplitude (SBP - DBP)

    // Stationary beat-to-beat variability (sd/mean for the relative knobs).
    // The rising edge has fixed relative width, so upstroke steepness tracks
    // amplitude alone and stays above half the corpus maximum; the falling
    // width wobbles independently, which moves |lambda_1| without moving SBP.
    double amp_variability = 0.04;
    double width_variability = 0.18;
    double dbp_sd_mmhg = 0.15;

    // Analysis used to measure |lambda_1| while generating.
    BeatConfig analysis;
};

struct SyntheticAbpRecording {
    Signal signal;
    std::vector<std::size_t> onsets;      // ground-truth foot samples, one per beat
    std::vector<double> lambda1_abs;      // measured during generation, per beat
    std::vector<double> programmed_pi_ms; // interval from onset n to onset n+1
    double pi_intercept_ms = 0.0;         // intercept actually used
};

SyntheticAbpRecording synthesize_abp_recording(const SyntheticAbpConfig& cfg);

} // namespace sbsa
