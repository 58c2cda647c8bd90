#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sbsa/cardio.hpp"
#include "sbsa/signal.hpp"
#include "sbsa/transform.hpp"

// File formats shared by the CLI and the tests. Everything is plain CSV with
// a header row; '#' lines and blank lines are ignored; doubles are written
// with 17 significant digits so save -> load -> save is byte-identical.
// Malformed content raises input_error carrying the 1-based line number.

namespace sbsa {

// Shortest decimal form that round-trips the exact double ("%.17g").
std::string format_double(double v);

// Load a signal from CSV. Two layouts:
//   time,value   -- time in seconds, strictly increasing
//   value        -- single column; rate_hz must then be > 0
// A header row is detected automatically (first content row that does not
// parse as numbers). Non-uniform timestamps are linearly resampled onto a
// uniform grid at the median step and a note is appended to `warnings`.
// NaN/inf samples, non-monotone time, unparseable fields and short files
// (< 3 samples) raise input_error with the offending line number.
Signal load_signal(const std::string& path, double rate_hz = 0.0,
                   std::vector<std::string>* warnings = nullptr);

// Two-column CSV "time_s,<value_header>" of the signal on its own grid.
void save_signal_csv(const std::string& path, const Signal& s,
                     const std::string& value_header = "value");

// Generic two-column plot file.
void save_xy_csv(const std::string& path, const std::string& x_header,
                 const std::string& y_header, const std::vector<double>& x,
                 const std::vector<double>& y);

// Beat-onset sample indices, one per line (optional "index" header).
// Ordering/spacing is validated later by segment_beats.
std::vector<std::size_t> load_annotations(const std::string& path);

// Per-beat table schema used by `pipeline`, `brs` and `compare`.
inline constexpr const char* kBeatCsvHeader =
    "beat,pi_ms,sbp,dbp,mbp,pp,lambda1,lambda2,"
    "inv1g,inv1s,inv1d,inv2g,inv2s,inv2d,chi,n";

void save_beat_records_csv(const std::string& path,
                           const std::vector<BeatRecord>& records);

// Inverse of save_beat_records_csv. The header must match kBeatCsvHeader
// exactly. pi_flagged is re-derived from the plausibility band; the direct
// integrals and residuals (not part of the table) are left at zero.
std::vector<BeatRecord> load_beat_records_csv(const std::string& path);

// Declarative run configuration: "key = value" lines, '#' comments, every
// key optional. Unknown keys raise input_error with the line number. See
// default_run_config_text() for the full key list with defaults.
struct RunConfig {
    ChiSelectionConfig chi;         // chi_mode/chi_target_n/chi_mse_tolerance/
                                    // chi_min/chi_max/chi_max_iterations
    std::size_t n_s = 3;            // n_s
    SegmentationConfig segmentation; // seg_* keys; annotations filled by the
                                     // CLI from annotations_path
    std::string annotations_path;   // annotations (empty = slope detection)
    Predictor predictor = Predictor::Lambda1; // predictor
    std::string output_dir = ".";   // output_dir
    std::uint64_t seed = 1;         // seed
    double rate_hz = 0.0;           // rate_hz (0 = input must carry time)
};

RunConfig load_run_config(const std::string& path);

// Canonical commented config listing every key at its default. Parsing this
// text yields a default-constructed RunConfig.
std::string default_run_config_text();

} // namespace sbsa
