#pragma once

#include <cstddef>
#include <vector>

#include "sbsa/signal.hpp"

// Discrete negative spectrum of the Schrodinger operator
//
//     H(-chi*y) = -d^2/dt^2 - chi*y(t)
//
// on the signal's uniform grid with Dirichlet walls at the window edges
// (the signal is treated as compactly supported on its window). A 3-point
// central difference gives the symmetric tridiagonal matrix
//
//     diag[i] = 2/dt^2 - chi*y[i],   off[i] = -1/dt^2,
//
// whose eigenvalues below zero are the bound-state energies lambda_n =
// -kappa_n^2. Eigenvalues come from Sturm-count bisection restricted to the
// negative axis; eigenvectors from shifted inverse iteration with
// re-orthogonalization inside near-degenerate clusters.

namespace sbsa {

struct TridiagonalOperator {
    std::vector<double> diagonal;     // 2/dt^2 - chi*y[i], units 1/s^2
    std::vector<double> off_diagonal; // all -1/dt^2, length diagonal.size()-1
    double dt = 0.0;
    double chi = 0.0;
    double t0 = 0.0;

    std::size_t size() const { return diagonal.size(); }
};

// Bound-state data: kappas descending (so lambda_n = -kappa_n^2 ascending),
// eigenfunction rows normalized to sum(psi^2)*dt = 1 with the largest-|psi|
// entry positive.
struct SpectralDecomposition {
    double chi = 0.0;
    std::vector<double> kappas;         // strictly descending, > 0, units 1/s
    std::vector<double> eigenfunctions; // row-major N x M, units 1/sqrt(s)
    double dt = 0.0;
    double t0 = 0.0;
    std::size_t signal_length = 0;

    std::size_t count() const { return kappas.size(); }
    bool empty() const { return kappas.empty(); }
    const double* eigenfunction(std::size_t n) const {
        return eigenfunctions.data() + n * signal_length;
    }
    double lambda(std::size_t n) const { return -kappas[n] * kappas[n]; }
};

// Build the tridiagonal matrix for H(-chi*y). chi must be > 0 (throws
// std::domain_error otherwise); the signal may contain negative samples,
// which pass straight through to the diagonal.
TridiagonalOperator discretize_operator(const Signal& y, double chi);

// All eigenvalues strictly below zero with normalized eigenvectors. Discrete
// eigenvalues within 1e-12 * (2/dt^2) of zero are treated as zero and
// excluded. No bound states is a valid empty result, not an error; inverse
// iteration failure throws numeric_error with iteration diagnostics.
SpectralDecomposition negative_spectrum(const TridiagonalOperator& op);

// Same eigenvalues, but skips the eigenvector solve and leaves the
// eigenfunction matrix empty. Invariants depend only on the kappas, and on
// very fine grids the N x M eigenfunction storage dominates the cost.
SpectralDecomposition negative_spectrum_values(const TridiagonalOperator& op);

// Number of negative eigenvalues by a single Sturm count, no eigenvectors.
// Agrees exactly with negative_spectrum(op).count().
int count_negative_eigenvalues(const TridiagonalOperator& op);
int count_negative_eigenvalues(const Signal& y, double chi);

namespace detail {

// Counting threshold used for "strictly negative": eigenvalues in
// [-zero_cut, 0) are considered numerically zero.
double negative_cut(const TridiagonalOperator& op);

// Pivot guard for the Sturm recurrence, LAPACK-style.
double sturm_pivmin(const TridiagonalOperator& op);

// Eigenvalues of (diag, off) strictly below `cut`, ascending, by bisection.
std::vector<double> eigenvalues_below(const std::vector<double>& diag,
                                      const std::vector<double>& off,
                                      double cut);

} // namespace detail

} // namespace sbsa
