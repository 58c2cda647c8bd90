#pragma once

// Command-line front end. Subcommands wrap the library layers 1:1:
//
//   decompose    signal -> chi, kappas, reconstruction
//   reconstruct  signal -> reconstruction + systolic/diastolic split
//   invariants   signal -> scattering invariants and sum-rule residuals
//   pipeline     recording -> per-beat table and index time series
//   brs          per-beat table -> lagged regression of the pulse interval
//   compare      two per-beat tables -> paired summary with significance
//   synth        reflectionless profiles / synthetic pressure recordings
//
// Every run is deterministic: no timestamps, fixed file names inside the
// output directory, doubles at 17 significant digits in CSV reports.
//
// Exit codes: 0 success (including --help/--version), 2 input or usage
// errors, 3 numerical failures, 4 not enough data for a statistic.

namespace sbsa {

int run_cli(int argc, char** argv);

} // namespace sbsa
