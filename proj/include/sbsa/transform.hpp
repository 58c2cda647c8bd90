#pragma once

#include <cstddef>
#include <vector>

#include "sbsa/signal.hpp"
#include "sbsa/spectral.hpp"

// The scattering transform proper: rebuild a signal from its negative
// spectrum as a sum of soliton components (4/chi) kappa_n psi_n^2, choose the
// well-depth parameter chi, split the reconstruction into fast/slow parts,
// and synthesize exact reflectionless profiles for round-trip testing.

namespace sbsa {

enum class ChiMode {
    FixedComponentCount, // smallest chi whose decomposition has target_n states
    ErrorTarget,         // grow chi until the relative MSE drops below tolerance
};

struct ChiSelectionConfig {
    ChiMode mode = ChiMode::ErrorTarget;
    int target_n = 7;            // FixedComponentCount mode
    double mse_tolerance = 1e-3; // ErrorTarget mode, relative MSE
    double chi_min = 1e-2;
    double chi_max = 1e6;
    int max_iterations = 60;
};

struct SbsaResult {
    SpectralDecomposition decomposition;
    double chi_hat = 0.0;
    Signal reconstruction;
    double relative_mse = 0.0;
    // ErrorTarget mode: tolerance was reached. Always true in
    // FixedComponentCount mode.
    bool converged = true;
};

// Fast ("systolic") part = the n_s largest-kappa components, slow
// ("diastolic") part = the rest. Each part accumulates its own components in
// descending-kappa order, so systolic[i] + diastolic[i] reproduces the
// grouped-order reconstruction exactly; total() performs that one addition.
struct PhaseSplit {
    Signal systolic;
    Signal diastolic;
    std::size_t n_s = 0;
    Signal total() const;
};

// y_chi[i] = (4/chi) sum_n kappa_n psi_n[i]^2, accumulated in descending
// kappa order. Empty decomposition -> all-zero signal.
Signal reconstruct(const SpectralDecomposition& d);

// Single term (4/chi) kappa_n psi_n^2; n is 1-based, 1 <= n <= N.
// Summing the components in order reproduces reconstruct() bit for bit.
Signal soliton_component(const SpectralDecomposition& d, std::size_t n);

// sum((y - approx)^2) / sum(y^2). Lengths must match; y must not be all zero.
double relative_mse(const Signal& y, const Signal& approx);

// Pick chi per the config and return the decomposition, reconstruction and
// fit at the chosen value. See ChiMode for the two strategies.
SbsaResult select_chi(const Signal& y, const ChiSelectionConfig& cfg);

// Partition the reconstruction after the n_s-th component (0 <= n_s <= N).
PhaseSplit split_phases(const SpectralDecomposition& d, std::size_t n_s);

// Exact N-soliton profile: the nonnegative signal -V with
// V(x) = -2 d^2/dx^2 log det(I + A(x)),
// A_mn = c_m c_n exp((kappa_m + kappa_n) x) / (kappa_m + kappa_n),
// evaluated on the sample grid of `grid` (its values are ignored). The
// log-determinant is computed in a shifted form with bounded matrix entries,
// so large kappa*x never overflows; the second derivative uses central
// differences on an 8x refined grid.
Signal synthesize_reflectionless(const std::vector<double>& kappas,
                                 const std::vector<double>& norming_constants,
                                 const Signal& grid);

// Norming constants that center the N-soliton profile at x = 0:
// c_n^2 = 2 kappa_n prod_{m != n} |(kappa_n + kappa_m)/(kappa_n - kappa_m)|.
// For kappas {N, N-1, ..., 1} this yields exactly N(N+1) sech^2(x).
std::vector<double> balanced_norming_constants(const std::vector<double>& kappas);

namespace detail {
// Shared soliton coefficient so every accumulation path rounds identically.
inline double component_coeff(double chi, double kappa) {
    return (4.0 / chi) * kappa;
}
} // namespace detail

} // namespace sbsa
