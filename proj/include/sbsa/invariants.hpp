#pragma once

#include <cstddef>

#include "sbsa/signal.hpp"
#include "sbsa/spectral.hpp"

// Scattering invariants: Riesz means of the negative spectrum, the first two
// invariants INV1 = (4/chi) sum kappa and INV2 = (16/(3 chi^2)) sum kappa^3
// with their fast/slow splits, the direct integrals they estimate, and the
// residuals left over from the continuous spectrum.

namespace sbsa {

struct InvariantSet {
    // (4/chi) sum kappa over all / the fast group / the rest (signal-unit*s)
    double inv1_global = 0.0;
    double inv1_systolic = 0.0;
    double inv1_diastolic = 0.0;
    // (16/(3 chi^2)) sum kappa^3, same split (signal-unit^2*s)
    double inv2_global = 0.0;
    double inv2_systolic = 0.0;
    double inv2_diastolic = 0.0;
    // trapezoid integrals of y and y^2
    double direct_inv1 = 0.0;
    double direct_inv2 = 0.0;
    // continuous-spectrum remainders by subtraction: direct - discrete.
    // Sum rules give residual1 <= 0 and residual2 >= 0 up to grid error.
    double residual1 = 0.0;
    double residual2 = 0.0;
    // Number of components in the fast group after resolving ties at the
    // cutoff eigenvalue; equals the requested n_s when no eigenvalues tie.
    std::size_t n_s_effective = 0;
};

// sum of |lambda_n|^gamma over eigenvalues lambda_n <= lambda_cut.
// gamma must be >= 0 and lambda_cut <= 0.
double riesz_mean(const SpectralDecomposition& d, double gamma, double lambda_cut);

// Full invariant set for a decomposition of y with fast-group size n_s
// (0 <= n_s <= N). The cutoff is the n_s-th eigenvalue itself, inclusive:
// eigenvalues exactly equal to it join the fast group. Global values are
// computed as systolic + diastolic so the split is additive bit for bit.
InvariantSet invariant_set(const SpectralDecomposition& d, const Signal& y,
                           std::size_t n_s);

// Semiclassical limit L_gamma^cl * integral y^(gamma + 1/2) dt with
// L_{1/2} = 1/4 and L_{3/2} = 3/16; other gamma >= 0 via the Gamma-function
// formula. Requires y >= 0.
double semiclassical_reference(const Signal& y, double gamma);

} // namespace sbsa
