#include "sbsa/cardio.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "sbsa/errors.hpp"

namespace sbsa {

namespace {

std::vector<BeatWindow> windows_from_feet(const Signal& recording,
                                          const std::vector<std::size_t>& feet) {
    std::vector<BeatWindow> out;
    out.reserve(feet.size() > 0 ? feet.size() - 1 : 0);
    for (std::size_t k = 0; k + 1 < feet.size(); ++k) {
        BeatWindow w;
        w.start_index = feet[k];
        w.end_index = feet[k + 1];
        w.onset_time = recording.time_at(feet[k]);
        out.push_back(w);
    }
    return out;
}

std::vector<BeatWindow> windows_from_annotations(const Signal& recording,
                                                 const SegmentationConfig& cfg) {
    const std::vector<std::size_t>& a = cfg.annotations;
    if (a.size() < 2)
        throw input_error("beat annotations: need at least 2 onsets to form a window, got " +
                          std::to_string(a.size()));
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k] >= recording.size())
            throw input_error("beat annotations: onset " + std::to_string(k) + " at sample " +
                              std::to_string(a[k]) + " is outside the recording (length " +
                              std::to_string(recording.size()) + ")");
        if (k > 0 && a[k] <= a[k - 1])
            throw input_error("beat annotations: onsets must be strictly ascending, got " +
                              std::to_string(a[k - 1]) + " then " + std::to_string(a[k]) +
                              " at position " + std::to_string(k));
        if (k > 0 && a[k] - a[k - 1] < cfg.min_samples)
            throw input_error("beat annotations: window " + std::to_string(k - 1) + " has " +
                              std::to_string(a[k] - a[k - 1]) + " samples, need at least " +
                              std::to_string(cfg.min_samples));
    }
    return windows_from_feet(recording, a);
}

} // namespace

std::vector<BeatWindow> segment_beats(const Signal& recording,
                                      const SegmentationConfig& cfg) {
    validate_signal(recording);
    if (!(cfg.threshold_fraction > 0.0 && cfg.threshold_fraction < 1.0))
        throw input_error("segmentation: threshold fraction must lie in (0, 1), got " +
                          std::to_string(cfg.threshold_fraction));
    if (!(cfg.refractory_s > 0.0))
        throw input_error("segmentation: refractory period must be positive, got " +
                          std::to_string(cfg.refractory_s));
    if (cfg.min_samples < 2)
        throw input_error("segmentation: min_samples must be at least 2");

    if (!cfg.annotations.empty()) return windows_from_annotations(recording, cfg);

    const std::vector<double>& y = recording.samples;
    const std::size_t n = y.size();

    // Centered slope; the endpoints never carry an upstroke.
    std::vector<double> slope(n, 0.0);
    const double inv2dt = 1.0 / (2.0 * recording.dt);
    for (std::size_t i = 1; i + 1 < n; ++i) slope[i] = (y[i + 1] - y[i - 1]) * inv2dt;

    const double smax = *std::max_element(slope.begin(), slope.end());
    if (!(smax > 0.0))
        throw input_error("segmentation: no rising edge in the recording "
                          "(constant or non-increasing signal)");
    const double threshold = cfg.threshold_fraction * smax;
    const std::size_t refractory =
        static_cast<std::size_t>(std::ceil(cfg.refractory_s / recording.dt));
    const std::size_t lookback =
        std::max<std::size_t>(1, static_cast<std::size_t>(
                                     std::ceil(cfg.foot_lookback_s / recording.dt)));

    // Upstroke = point of maximal slope within a run of samples above the
    // threshold. Runs closer than the refractory period to the previous
    // accepted upstroke either replace it (steeper) or are dropped.
    std::vector<std::size_t> upstrokes;
    std::size_t i = 1;
    while (i + 1 < n) {
        if (slope[i] < threshold) {
            ++i;
            continue;
        }
        std::size_t peak = i;
        while (i + 1 < n && slope[i] >= threshold) {
            if (slope[i] > slope[peak]) peak = i;
            ++i;
        }
        if (!upstrokes.empty() && peak - upstrokes.back() < refractory) {
            if (slope[peak] > slope[upstrokes.back()]) upstrokes.back() = peak;
        } else {
            upstrokes.push_back(peak);
        }
    }

    // Foot = the minimum over the lookback stretch before the upstroke,
    // taking the latest sample on ties so flat diastolic floors resolve to
    // the point just before the rise.
    std::vector<std::size_t> feet;
    feet.reserve(upstrokes.size());
    for (std::size_t u : upstrokes) {
        const std::size_t lo = u > lookback ? u - lookback : 0;
        std::size_t foot = lo;
        for (std::size_t j = lo; j <= u; ++j)
            if (y[j] <= y[foot]) foot = j;
        if (!feet.empty() && foot <= feet.back() + cfg.min_samples - 1) continue;
        feet.push_back(foot);
    }

    std::vector<BeatWindow> windows = windows_from_feet(recording, feet);
    if (windows.empty())
        throw input_error("segmentation: no complete beat found "
                          "(the recording must span at least two beat feet)");
    return windows;
}

BeatRecord analyze_beat(const Signal& recording, const BeatWindow& w,
                        double next_onset_time, std::size_t beat_index,
                        const BeatConfig& cfg) {
    if (w.end_index > recording.size() || w.start_index >= w.end_index)
        throw input_error("beat " + std::to_string(beat_index) + ": window [" +
                          std::to_string(w.start_index) + ", " + std::to_string(w.end_index) +
                          ") does not fit the recording (length " +
                          std::to_string(recording.size()) + ")");

    Signal beat;
    beat.samples.assign(recording.samples.begin() + static_cast<std::ptrdiff_t>(w.start_index),
                        recording.samples.begin() + static_cast<std::ptrdiff_t>(w.end_index));
    beat.dt = recording.dt;
    beat.t0 = recording.time_at(w.start_index);

    SbsaResult res;
    try {
        res = select_chi(beat, cfg.chi);
    } catch (const input_error& e) {
        throw input_error("beat " + std::to_string(beat_index) + ": " + e.what());
    } catch (const numeric_error& e) {
        throw numeric_error("beat " + std::to_string(beat_index) + ": " + e.what());
    }

    BeatRecord r;
    r.beat_index = beat_index;
    r.pi_ms = (next_onset_time - w.onset_time) * 1000.0;
    r.pi_flagged = !pi_interval_plausible(r.pi_ms);

    const std::vector<double>& s = beat.samples;
    r.sbp = *std::max_element(s.begin(), s.end());
    r.dbp = *std::min_element(s.begin(), s.end());
    r.mbp = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    r.pp = r.sbp - r.dbp;

    const std::vector<double>& kappas = res.decomposition.kappas;
    r.n_chi = kappas.size();
    r.chi_hat = res.chi_hat;
    if (!kappas.empty()) r.lambda1_abs = kappas[0] * kappas[0];
    if (kappas.size() > 1) r.lambda2_abs = kappas[1] * kappas[1];

    const std::size_t n_s = std::min<std::size_t>(cfg.n_s, kappas.size());
    r.invariants = invariant_set(res.decomposition, beat, n_s);
    return r;
}

std::vector<BeatRecord> analyze_all(const Signal& recording,
                                    const std::vector<BeatWindow>& windows,
                                    const BeatConfig& cfg) {
    if (windows.size() < 2) return {};
    const std::size_t m = windows.size() - 1;
    std::vector<BeatRecord> out(m);
    std::vector<std::exception_ptr> errors(m);

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next.fetch_add(1); i < m; i = next.fetch_add(1)) {
            try {
                out[i] = analyze_beat(recording, windows[i], windows[i + 1].onset_time, i, cfg);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    const unsigned hw = std::thread::hardware_concurrency();
    const std::size_t threads =
        std::min<std::size_t>(m, hw == 0 ? 1 : static_cast<std::size_t>(hw));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    // Zero-argument rethrow of the lowest-index failure keeps parallel runs
    // indistinguishable from serial ones.
    for (std::size_t i = 0; i < m; ++i)
        if (errors[i]) std::rethrow_exception(errors[i]);
    return out;
}

std::vector<BrsPair> brs_pairs(const std::vector<BeatRecord>& records,
                               Predictor predictor) {
    if (records.size() < 3)
        throw insufficient_data_error("lagged pairing needs at least 3 beats, got " +
                                      std::to_string(records.size()));
    std::vector<BrsPair> pairs;
    pairs.reserve(records.size() - 1);
    for (std::size_t k = 0; k + 1 < records.size(); ++k) {
        double x = 0.0;
        switch (predictor) {
        case Predictor::Lambda1: x = records[k].lambda1_abs; break;
        case Predictor::SBP: x = records[k].sbp; break;
        case Predictor::PP: x = records[k].pp; break;
        }
        pairs.push_back(BrsPair{x, records[k + 1].pi_ms});
    }
    return pairs;
}

} // namespace sbsa
