#pragma once

#include <cstddef>
#include <vector>

#include "sbsa/invariants.hpp"
#include "sbsa/signal.hpp"
#include "sbsa/stats.hpp"
#include "sbsa/transform.hpp"

// Beat-to-beat analysis of continuous arterial-pressure-like recordings:
// segmentation into foot-to-foot beat windows, per-beat spectral analysis
// (chi selection, eigenvalues, invariants, classical pressure indices), and
// lagged pairing of per-beat predictors with the next pulse interval.

namespace sbsa {

struct SegmentationConfig {
    // A sample is part of an upstroke when the centered slope exceeds this
    // fraction of the recording's global maximum slope.
    double threshold_fraction = 0.5;
    // Minimum spacing between consecutive detected upstrokes.
    double refractory_s = 0.25;
    // How far back from an upstroke to look for the preceding foot.
    double foot_lookback_s = 0.35;
    // Windows shorter than this are treated as detection artifacts.
    std::size_t min_samples = 16;
    // Optional externally supplied beat-onset sample indices (ascending).
    // When non-empty, detection is bypassed and windows run between
    // consecutive annotations.
    std::vector<std::size_t> annotations;
};

struct BeatWindow {
    std::size_t start_index = 0; // first sample of the beat
    std::size_t end_index = 0;   // one past the last sample
    double onset_time = 0.0;     // seconds, start_index on the time axis

    std::size_t length() const { return end_index - start_index; }
};

struct BeatRecord {
    std::size_t beat_index = 0;
    double pi_ms = 0.0;       // onset-to-next-onset pulse interval
    bool pi_flagged = false;  // outside the [250, 2500] ms plausibility band
    double sbp = 0.0;         // window maximum
    double dbp = 0.0;         // window minimum
    double mbp = 0.0;         // window mean
    double pp = 0.0;          // sbp - dbp
    double lambda1_abs = 0.0; // |lambda_1| = kappa_1^2
    double lambda2_abs = 0.0; // |lambda_2| = kappa_2^2, 0 when absent
    InvariantSet invariants;
    double chi_hat = 0.0;
    std::size_t n_chi = 0; // component count at chi_hat
};

struct BeatConfig {
    ChiSelectionConfig chi;          // default: ErrorTarget at 1e-3
    std::size_t n_s = 3;             // fast/slow cutoff requested; clamped to
                                     // the available component count per beat
};

enum class Predictor { Lambda1, SBP, PP };

// Physiological plausibility band for pulse intervals (24-240 bpm).
// Out-of-band beats are flagged, never dropped.
inline bool pi_interval_plausible(double pi_ms) {
    return pi_ms >= 250.0 && pi_ms <= 2500.0;
}

// Foot-to-foot beat windows. Upstrokes are slope maxima above the threshold
// fraction of the global slope maximum, separated by the refractory period;
// each beat starts at the local minimum preceding its upstroke. The final
// (incomplete) foot-to-end stretch is not emitted as a window. Throws
// input_error when no complete beat is found or annotations are invalid.
std::vector<BeatWindow> segment_beats(const Signal& recording,
                                      const SegmentationConfig& cfg = {});

// Analyze one beat window: chi selection, spectrum, invariants, classical
// indices. next_onset_time is the onset of the following beat (seconds on
// the recording's time axis); the pulse interval is the difference in ms.
// Chi-selection failures are rethrown with the beat index attached.
BeatRecord analyze_beat(const Signal& recording, const BeatWindow& w,
                        double next_onset_time, std::size_t beat_index,
                        const BeatConfig& cfg = {});

// All complete beats of a segmented recording, in beat order. The last
// window's pulse interval needs the end of the recording as a pseudo-onset,
// so it is computed only when a following window exists; hence K windows
// yield K-1 records. Analysis runs in parallel; results (including thrown
// errors) are identical to serial execution.
std::vector<BeatRecord> analyze_all(const Signal& recording,
                                    const std::vector<BeatWindow>& windows,
                                    const BeatConfig& cfg = {});

// Lagged pairs (predictor of beat n, pulse interval of beat n+1). Throws
// insufficient_data_error for fewer than 3 records.
std::vector<BrsPair> brs_pairs(const std::vector<BeatRecord>& records,
                               Predictor predictor);

} // namespace sbsa
