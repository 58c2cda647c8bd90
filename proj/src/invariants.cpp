#include "sbsa/invariants.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "sbsa/errors.hpp"
#include "sbsa/kernels.hpp"

namespace sbsa {

namespace {

// |lambda|^gamma = kappa^(2 gamma); avoid pow() for the two canonical powers
// so the invariants inherit no libm rounding quirks.
double kappa_power(double kappa, double gamma) {
    if (gamma == 0.5) return kappa;
    if (gamma == 1.5) return kappa * kappa * kappa;
    if (gamma == 0.0) return 1.0;
    return std::pow(kappa * kappa, gamma);
}

// Fast group = indices [0, split): kappas at least as large as the n_s-th,
// extending through exact ties at the cutoff.
std::size_t split_index(const SpectralDecomposition& d, std::size_t n_s) {
    if (n_s == 0) return 0;
    const double cutoff = d.kappas[n_s - 1];
    std::size_t split = n_s;
    while (split < d.count() && d.kappas[split] == cutoff) ++split;
    return split;
}

double sum_powers(const SpectralDecomposition& d, double gamma, std::size_t first,
                  std::size_t last) {
    double acc = 0.0;
    for (std::size_t n = first; n < last; ++n) acc += kappa_power(d.kappas[n], gamma);
    return acc;
}

} // namespace

double riesz_mean(const SpectralDecomposition& d, double gamma, double lambda_cut) {
    if (!(gamma >= 0.0)) throw std::domain_error("riesz_mean: gamma must be >= 0");
    if (!(lambda_cut <= 0.0)) throw std::domain_error("riesz_mean: cutoff must be <= 0");
    double acc = 0.0;
    for (double kappa : d.kappas)
        if (-(kappa * kappa) <= lambda_cut) acc += kappa_power(kappa, gamma);
    return acc;
}

InvariantSet invariant_set(const SpectralDecomposition& d, const Signal& y,
                           std::size_t n_s) {
    if (n_s > d.count())
        throw std::out_of_range("invariant cutoff n_s = " + std::to_string(n_s) +
                                ", decomposition has " + std::to_string(d.count()) +
                                " components");
    validate_signal(y);
    if (y.samples.size() != d.signal_length || y.dt != d.dt)
        throw input_error("signal grid does not match the decomposition (" +
                          std::to_string(y.samples.size()) + " samples at dt " +
                          std::to_string(y.dt) + " vs " + std::to_string(d.signal_length) +
                          " at " + std::to_string(d.dt) + ")");

    InvariantSet inv;
    const std::size_t split = split_index(d, n_s);
    inv.n_s_effective = split;

    const double c1 = 4.0 / d.chi;
    const double c2 = 16.0 / (3.0 * d.chi * d.chi);
    inv.inv1_systolic = c1 * sum_powers(d, 0.5, 0, split);
    inv.inv1_diastolic = c1 * sum_powers(d, 0.5, split, d.count());
    inv.inv1_global = inv.inv1_systolic + inv.inv1_diastolic;
    inv.inv2_systolic = c2 * sum_powers(d, 1.5, 0, split);
    inv.inv2_diastolic = c2 * sum_powers(d, 1.5, split, d.count());
    inv.inv2_global = inv.inv2_systolic + inv.inv2_diastolic;

    const std::size_t m = y.samples.size();
    inv.direct_inv1 = kernels::trapezoid(y.samples.data(), m, y.dt);
    std::vector<double> y2(m);
    for (std::size_t i = 0; i < m; ++i) y2[i] = y.samples[i] * y.samples[i];
    inv.direct_inv2 = kernels::trapezoid(y2.data(), m, y.dt);

    inv.residual1 = inv.direct_inv1 - inv.inv1_global;
    inv.residual2 = inv.direct_inv2 - inv.inv2_global;
    return inv;
}

double semiclassical_reference(const Signal& y, double gamma) {
    validate_signal(y);
    if (!(gamma >= 0.0))
        throw std::domain_error("semiclassical reference: gamma must be >= 0");
    for (std::size_t i = 0; i < y.samples.size(); ++i)
        if (y.samples[i] < 0.0)
            throw std::domain_error("semiclassical reference: sample " +
                                    std::to_string(i) + " is negative");

    double lcl;
    if (gamma == 0.5)
        lcl = 0.25;
    else if (gamma == 1.5)
        lcl = 3.0 / 16.0;
    else
        lcl = std::tgamma(gamma + 1.0) /
              (std::sqrt(4.0 * std::numbers::pi) * std::tgamma(gamma + 1.5));

    const double p = gamma + 0.5;
    const std::size_t m = y.samples.size();
    std::vector<double> yp(m);
    if (p == 1.0)
        yp = y.samples;
    else if (p == 2.0)
        for (std::size_t i = 0; i < m; ++i) yp[i] = y.samples[i] * y.samples[i];
    else
        for (std::size_t i = 0; i < m; ++i) yp[i] = std::pow(y.samples[i], p);
    return lcl * kernels::trapezoid(yp.data(), m, y.dt);
}

} // namespace sbsa
