#include "sbsa/transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "sbsa/errors.hpp"
#include "sbsa/kernels.hpp"

namespace sbsa {

namespace {

constexpr double kChiGrowth = 1.5;       // ErrorTarget sweep ratio
constexpr double kChiRelTol = 1e-6;      // FixedComponentCount bracket width
constexpr double kChiFloor = 1e-12;      // absolute expansion limits
constexpr double kChiCeil = 1e12;

Signal zero_like(const SpectralDecomposition& d) {
    Signal s;
    s.samples.assign(d.signal_length, 0.0);
    s.dt = d.dt;
    s.t0 = d.t0;
    return s;
}

void accumulate_components(Signal& out, const SpectralDecomposition& d,
                           std::size_t first, std::size_t last) {
    for (std::size_t n = first; n < last; ++n)
        kernels::add_scaled_square(out.samples.data(), d.eigenfunction(n),
                                   detail::component_coeff(d.chi, d.kappas[n]),
                                   d.signal_length);
}

void check_selection_config(const ChiSelectionConfig& cfg) {
    if (!(cfg.chi_min > 0.0) || !(cfg.chi_max > cfg.chi_min))
        throw input_error("chi bracket invalid: need 0 < chi_min < chi_max, got [" +
                          std::to_string(cfg.chi_min) + ", " + std::to_string(cfg.chi_max) + "]");
    if (cfg.max_iterations < 1)
        throw input_error("max_iterations must be at least 1");
    if (cfg.mode == ChiMode::FixedComponentCount && cfg.target_n < 1)
        throw input_error("target_n must be at least 1, got " + std::to_string(cfg.target_n));
    if (cfg.mode == ChiMode::ErrorTarget && !(cfg.mse_tolerance > 0.0))
        throw input_error("mse_tolerance must be positive");
}

void check_analyzable(const Signal& y) {
    validate_signal(y);
    double peak = 0.0;
    for (std::size_t i = 0; i < y.samples.size(); ++i) {
        if (y.samples[i] < 0.0)
            throw input_error("signal sample " + std::to_string(i) +
                              " is negative; the transform requires a nonnegative signal");
        peak = std::max(peak, y.samples[i]);
    }
    if (peak == 0.0)
        throw input_error("signal is identically zero: no well depth produces bound states");
}

SbsaResult evaluate_at(const Signal& y, double chi, double denom) {
    SbsaResult r;
    r.decomposition = negative_spectrum(discretize_operator(y, chi));
    r.chi_hat = chi;
    r.reconstruction = reconstruct(r.decomposition);
    r.relative_mse = kernels::sum_squared_diff(y.samples.data(),
                                               r.reconstruction.samples.data(),
                                               y.samples.size()) /
                     denom;
    return r;
}

SbsaResult select_fixed_count(const Signal& y, const ChiSelectionConfig& cfg) {
    const int target = cfg.target_n;
    auto count_at = [&](double chi) { return count_negative_eigenvalues(y, chi); };

    double lo = cfg.chi_min, hi = cfg.chi_max;
    int nlo = count_at(lo), nhi = count_at(hi);
    while (nlo >= target && lo > kChiFloor) {
        hi = lo;
        nhi = nlo;
        lo = std::max(lo / 10.0, kChiFloor);
        nlo = count_at(lo);
    }
    while (nhi < target && hi < kChiCeil) {
        lo = hi;
        nlo = nhi;
        hi = std::min(hi * 10.0, kChiCeil);
        nhi = count_at(hi);
    }
    if (nlo >= target || nhi < target)
        throw input_error("component target " + std::to_string(target) +
                          " not bracketable: achievable counts span [" +
                          std::to_string(nlo) + ", " + std::to_string(nhi) + "]");

    while (hi > lo * (1.0 + kChiRelTol)) {
        const double mid = std::sqrt(lo * hi);
        if (count_at(mid) >= target)
            hi = mid;
        else
            lo = mid;
    }

    const double denom = kernels::dot(y.samples.data(), y.samples.data(), y.samples.size());
    SbsaResult r = evaluate_at(y, hi, denom);
    if (r.decomposition.count() != static_cast<std::size_t>(target))
        throw input_error("no chi yields exactly " + std::to_string(target) +
                          " components: the count steps from " + std::to_string(count_at(lo)) +
                          " to " + std::to_string(r.decomposition.count()) + " near chi = " +
                          std::to_string(hi));
    return r;
}

SbsaResult select_error_target(const Signal& y, const ChiSelectionConfig& cfg) {
    const double denom =
        kernels::dot(y.samples.data(), y.samples.data(), y.samples.size());
    SbsaResult best;
    best.relative_mse = std::numeric_limits<double>::infinity();
    best.converged = false;

    double chi = cfg.chi_min;
    for (int it = 0; it < cfg.max_iterations; ++it) {
        SbsaResult cur = evaluate_at(y, chi, denom);
        cur.converged = false;
        if (cur.relative_mse < best.relative_mse) best = std::move(cur);
        if (best.relative_mse <= cfg.mse_tolerance) {
            best.converged = true;
            break;
        }
        if (chi >= cfg.chi_max) break;
        chi = std::min(chi * kChiGrowth, cfg.chi_max);
    }
    return best;
}

} // namespace

Signal PhaseSplit::total() const {
    Signal t = systolic;
    for (std::size_t i = 0; i < t.samples.size(); ++i)
        t.samples[i] += diastolic.samples[i];
    return t;
}

Signal reconstruct(const SpectralDecomposition& d) {
    Signal out = zero_like(d);
    accumulate_components(out, d, 0, d.count());
    return out;
}

Signal soliton_component(const SpectralDecomposition& d, std::size_t n) {
    if (n < 1 || n > d.count())
        throw std::out_of_range("soliton component " + std::to_string(n) +
                                " out of range 1.." + std::to_string(d.count()));
    Signal out = zero_like(d);
    accumulate_components(out, d, n - 1, n);
    return out;
}

double relative_mse(const Signal& y, const Signal& approx) {
    if (y.samples.size() != approx.samples.size())
        throw input_error("relative_mse: length mismatch (" +
                          std::to_string(y.samples.size()) + " vs " +
                          std::to_string(approx.samples.size()) + ")");
    const double denom =
        kernels::dot(y.samples.data(), y.samples.data(), y.samples.size());
    if (denom == 0.0) throw input_error("relative_mse: reference signal is identically zero");
    return kernels::sum_squared_diff(y.samples.data(), approx.samples.data(),
                                     y.samples.size()) /
           denom;
}

SbsaResult select_chi(const Signal& y, const ChiSelectionConfig& cfg) {
    check_selection_config(cfg);
    check_analyzable(y);
    return cfg.mode == ChiMode::FixedComponentCount ? select_fixed_count(y, cfg)
                                                    : select_error_target(y, cfg);
}

PhaseSplit split_phases(const SpectralDecomposition& d, std::size_t n_s) {
    if (n_s > d.count())
        throw std::out_of_range("phase split at " + std::to_string(n_s) +
                                " components, decomposition has " +
                                std::to_string(d.count()));
    PhaseSplit p;
    p.n_s = n_s;
    p.systolic = zero_like(d);
    p.diastolic = zero_like(d);
    accumulate_components(p.systolic, d, 0, n_s);
    accumulate_components(p.diastolic, d, n_s, d.count());
    return p;
}

std::vector<double> balanced_norming_constants(const std::vector<double>& kappas) {
    const std::size_t n = kappas.size();
    if (n == 0) throw std::domain_error("no kappas given");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(kappas[i] > 0.0) || !std::isfinite(kappas[i]))
            throw std::domain_error("kappas must be positive and finite");
        if (i > 0 && !(kappas[i] < kappas[i - 1]))
            throw std::domain_error("kappas must be strictly descending");
    }
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) {
        double prod = 2.0 * kappas[i];
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            prod *= std::fabs((kappas[i] + kappas[j]) / (kappas[i] - kappas[j]));
        }
        c[i] = std::sqrt(prod);
    }
    return c;
}

Signal synthesize_reflectionless(const std::vector<double>& kappas,
                                 const std::vector<double>& norming_constants,
                                 const Signal& grid) {
    validate_signal(grid);
    const std::size_t n = kappas.size();
    if (n == 0) throw std::domain_error("no kappas given");
    if (norming_constants.size() != n)
        throw input_error("need one norming constant per kappa (" + std::to_string(n) +
                          " kappas, " + std::to_string(norming_constants.size()) +
                          " constants)");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(kappas[i] > 0.0) || !std::isfinite(kappas[i]))
            throw std::domain_error("kappas must be positive and finite");
        if (i > 0 && !(kappas[i] < kappas[i - 1]))
            throw std::domain_error("kappas must be strictly descending");
        if (!(norming_constants[i] > 0.0) || !std::isfinite(norming_constants[i]))
            throw std::domain_error("norming constants must be positive and finite");
    }

    const std::size_t m = grid.samples.size();
    const int refine = 8;
    const double h = grid.dt / refine;
    const std::size_t nf = (m - 1) * static_cast<std::size_t>(refine) + 3;

    std::vector<double> logc(n);
    for (std::size_t i = 0; i < n; ++i) logc[i] = std::log(norming_constants[i]);

    // F(x) = log det(I + A(x)) in the shifted form
    //   F = 2 sum_n max(t_n, 0) + log det G,
    //   G = diag(exp(-2 max(t_n,0))) + S,
    //   S_nm = exp(min(t_n,0) + min(t_m,0)) / (kappa_n + kappa_m),
    // with t_n = log c_n + kappa_n x. Every entry of G lies in (0, 1 +
    // 1/(2 kappa_N)] and G is symmetric positive definite, so a plain
    // Cholesky factorization gives the log-determinant without overflow for
    // any x.
    std::vector<double> f(nf);
    std::vector<double> em(n), g(n * n);
    for (std::size_t j = 0; j < nf; ++j) {
        const double x = grid.t0 + (static_cast<double>(j) - 1.0) * h;
        double sum_sigma = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            const double t = logc[a] + kappas[a] * x;
            const double sigma = std::max(t, 0.0);
            sum_sigma += sigma;
            em[a] = std::exp(std::min(t, 0.0));
            g[a * n + a] = std::exp(-2.0 * sigma);
        }
        for (std::size_t a = 0; a < n; ++a) {
            g[a * n + a] += em[a] * em[a] / (2.0 * kappas[a]);
            for (std::size_t b = a + 1; b < n; ++b) {
                const double s = em[a] * em[b] / (kappas[a] + kappas[b]);
                g[a * n + b] = s;
                g[b * n + a] = s;
            }
        }
        // in-place Cholesky, log det = 2 sum log L_aa
        double logdet = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            double diag = g[a * n + a];
            for (std::size_t k = 0; k < a; ++k) diag -= g[a * n + k] * g[a * n + k];
            if (!(diag > 0.0))
                throw numeric_error("soliton synthesis: Cholesky pivot " +
                                    std::to_string(diag) + " at x = " + std::to_string(x));
            const double l = std::sqrt(diag);
            g[a * n + a] = l;
            logdet += std::log(l);
            for (std::size_t b = a + 1; b < n; ++b) {
                double v = g[b * n + a];
                for (std::size_t k = 0; k < a; ++k) v -= g[b * n + k] * g[a * n + k];
                g[b * n + a] = v / l;
            }
        }
        f[j] = 2.0 * sum_sigma + 2.0 * logdet;
    }

    Signal out;
    out.dt = grid.dt;
    out.t0 = grid.t0;
    out.samples.resize(m);
    const double inv_h2 = 1.0 / (h * h);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = 1 + static_cast<std::size_t>(refine) * i;
        const double v = 2.0 * (f[j + 1] - 2.0 * f[j] + f[j - 1]) * inv_h2;
        out.samples[i] = std::max(v, 0.0); // -V is nonnegative; clamp FD noise at zeros
    }
    return out;
}

} // namespace sbsa
