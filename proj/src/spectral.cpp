#include "sbsa/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "sbsa/errors.hpp"
#include "sbsa/kernels.hpp"

namespace sbsa {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kSafmin = std::numeric_limits<double>::min();

// Deterministic starting vectors for inverse iteration; splitmix64 streams
// keyed by the eigenvalue index so results do not depend on call order.
struct SplitMix64 {
    std::uint64_t state;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    // uniform in [-1, 1)
    double next_double() {
        return (static_cast<double>(next() >> 11) / 9007199254740992.0) * 2.0 - 1.0;
    }
};

double infinity_norm(const std::vector<double>& diag, const std::vector<double>& off) {
    const std::size_t m = diag.size();
    double a = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double row = std::fabs(diag[i]);
        if (i > 0) row += std::fabs(off[i - 1]);
        if (i + 1 < m) row += std::fabs(off[i]);
        a = std::max(a, row);
    }
    return a;
}

double gershgorin_lower(const std::vector<double>& diag, const std::vector<double>& off) {
    const std::size_t m = diag.size();
    double gl = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < m; ++i) {
        double r = 0.0;
        if (i > 0) r += std::fabs(off[i - 1]);
        if (i + 1 < m) r += std::fabs(off[i]);
        gl = std::min(gl, diag[i] - r);
    }
    return gl - 2.0 * kEps * std::fabs(gl);
}

double pivmin_for(const std::vector<double>& off) {
    double e2max = 1.0;
    for (double e : off) e2max = std::max(e2max, e * e);
    return kSafmin * e2max;
}

// Tridiagonal LU with partial pivoting (dgttrf-style, 0-based). dl/d/du are
// overwritten by the factors, du2 receives the second-superdiagonal fill-in.
struct TriFactor {
    std::vector<double> dl, d, du, du2;
    std::vector<int> swapped; // row i exchanged with i+1
};

TriFactor factor_shifted(const std::vector<double>& diag, const std::vector<double>& off,
                         double shift, double piv_floor) {
    const std::size_t n = diag.size();
    TriFactor f;
    f.d.resize(n);
    f.dl.assign(off.begin(), off.end());
    f.du.assign(off.begin(), off.end());
    f.du2.assign(n >= 2 ? n - 2 : 0, 0.0);
    f.swapped.assign(n >= 1 ? n - 1 : 0, 0);
    for (std::size_t i = 0; i < n; ++i) f.d[i] = diag[i] - shift;

    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::fabs(f.d[i]) >= std::fabs(f.dl[i])) {
            if (f.d[i] != 0.0) {
                const double fact = f.dl[i] / f.d[i];
                f.dl[i] = fact;
                f.d[i + 1] -= fact * f.du[i];
            } else {
                f.dl[i] = 0.0;
            }
            if (i + 2 < n) f.du2[i] = 0.0;
        } else {
            const double fact = f.d[i] / f.dl[i];
            f.d[i] = f.dl[i];
            f.dl[i] = fact;
            const double temp = f.du[i];
            f.du[i] = f.d[i + 1];
            f.d[i + 1] = temp - fact * f.d[i + 1];
            if (i + 2 < n) {
                f.du2[i] = f.du[i + 1];
                f.du[i + 1] = -fact * f.du[i + 1];
            }
            f.swapped[i] = 1;
        }
    }
    // A singular pivot would be division by zero at solve time; inverse
    // iteration only needs the shifted system to be solvable, so nudge.
    for (std::size_t i = 0; i < n; ++i) {
        if (std::fabs(f.d[i]) < piv_floor)
            f.d[i] = (f.d[i] < 0.0) ? -piv_floor : piv_floor;
    }
    return f;
}

void solve_factored(const TriFactor& f, std::vector<double>& x) {
    const std::size_t n = f.d.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (f.swapped[i]) {
            const double temp = x[i];
            x[i] = x[i + 1];
            x[i + 1] = temp - f.dl[i] * x[i];
        } else {
            x[i + 1] -= f.dl[i] * x[i];
        }
    }
    x[n - 1] /= f.d[n - 1];
    if (n >= 2) x[n - 2] = (x[n - 2] - f.du[n - 2] * x[n - 1]) / f.d[n - 2];
    for (std::size_t k = n >= 3 ? n - 2 : 0; k-- > 0;) {
        double v = x[k] - f.du[k] * x[k + 1];
        if (k + 2 < n) v -= f.du2[k] * x[k + 2];
        x[k] = v / f.d[k];
    }
}

double residual_inf(const std::vector<double>& diag, const std::vector<double>& off,
                    double lambda, const std::vector<double>& v) {
    const std::size_t n = diag.size();
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double w = (diag[i] - lambda) * v[i];
        if (i > 0) w += off[i - 1] * v[i - 1];
        if (i + 1 < n) w += off[i] * v[i + 1];
        r = std::max(r, std::fabs(w));
    }
    return r;
}

} // namespace

namespace detail {

double negative_cut(const TridiagonalOperator& op) {
    return 1e-12 * (2.0 / (op.dt * op.dt));
}

double sturm_pivmin(const TridiagonalOperator& op) {
    return pivmin_for(op.off_diagonal);
}

std::vector<double> eigenvalues_below(const std::vector<double>& diag,
                                      const std::vector<double>& off, double cut) {
    const std::size_t m = diag.size();
    const double pivmin = pivmin_for(off);
    std::vector<double> off2(off.size());
    for (std::size_t i = 0; i < off.size(); ++i) off2[i] = off[i] * off[i];

    int nneg = 0;
    kernels::sturm_counts(diag.data(), off2.data(), m, &cut, &nneg, 1, pivmin);
    if (nneg <= 0) return {};

    const double gl = gershgorin_lower(diag, off);
    std::vector<double> lambdas(static_cast<std::size_t>(nneg));

    // Bisect for the k-th smallest eigenvalue, four targets per sweep so the
    // batched Sturm kernel keeps all lanes busy.
    const int max_iter = 160;
    for (int base = 0; base < nneg; base += 4) {
        const int nb = std::min(4, nneg - base);
        double lo[4], hi[4], mid[4];
        int target[4], counts[4];
        bool done[4];
        for (int j = 0; j < nb; ++j) {
            lo[j] = gl;
            hi[j] = cut;
            target[j] = base + j + 1;
            done[j] = false;
        }
        for (int it = 0; it < max_iter; ++it) {
            bool all_done = true;
            for (int j = 0; j < nb; ++j) {
                mid[j] = 0.5 * (lo[j] + hi[j]);
                if (!done[j]) all_done = false;
            }
            if (all_done) break;
            kernels::sturm_counts(diag.data(), off2.data(), m, mid, counts,
                                  static_cast<std::size_t>(nb), pivmin);
            for (int j = 0; j < nb; ++j) {
                if (done[j]) continue;
                if (counts[j] >= target[j])
                    hi[j] = mid[j];
                else
                    lo[j] = mid[j];
                const double tol =
                    kEps * (std::fabs(lo[j]) + std::fabs(hi[j])) + 2.0 * pivmin;
                if (hi[j] - lo[j] <= tol) done[j] = true;
            }
        }
        for (int j = 0; j < nb; ++j)
            lambdas[static_cast<std::size_t>(base + j)] = 0.5 * (lo[j] + hi[j]);
    }
    std::sort(lambdas.begin(), lambdas.end());
    return lambdas;
}

} // namespace detail

TridiagonalOperator discretize_operator(const Signal& y, double chi) {
    validate_signal(y);
    if (!(chi > 0.0) || !std::isfinite(chi))
        throw std::domain_error("chi must be strictly positive and finite");

    const std::size_t m = y.samples.size();
    TridiagonalOperator op;
    op.dt = y.dt;
    op.chi = chi;
    op.t0 = y.t0;
    op.diagonal.resize(m);
    op.off_diagonal.assign(m - 1, -1.0 / (y.dt * y.dt));
    const double d0 = 2.0 / (y.dt * y.dt);
    for (std::size_t i = 0; i < m; ++i) op.diagonal[i] = d0 - chi * y.samples[i];
    return op;
}

int count_negative_eigenvalues(const TridiagonalOperator& op) {
    const std::size_t m = op.size();
    std::vector<double> off2(op.off_diagonal.size());
    for (std::size_t i = 0; i < off2.size(); ++i)
        off2[i] = op.off_diagonal[i] * op.off_diagonal[i];
    const double cut = -detail::negative_cut(op);
    int count = 0;
    kernels::sturm_counts(op.diagonal.data(), off2.data(), m, &cut, &count, 1,
                          detail::sturm_pivmin(op));
    return count;
}

int count_negative_eigenvalues(const Signal& y, double chi) {
    return count_negative_eigenvalues(discretize_operator(y, chi));
}

SpectralDecomposition negative_spectrum(const TridiagonalOperator& op) {
    const std::size_t m = op.size();
    SpectralDecomposition dec;
    dec.chi = op.chi;
    dec.dt = op.dt;
    dec.t0 = op.t0;
    dec.signal_length = m;

    const double cut = -detail::negative_cut(op);
    const std::vector<double> lambdas =
        detail::eigenvalues_below(op.diagonal, op.off_diagonal, cut);
    const std::size_t n = lambdas.size();
    if (n == 0) return dec;

    const double anorm = infinity_norm(op.diagonal, op.off_diagonal);
    const double piv_floor = kEps * std::max(anorm, 1.0);

    // Near-degenerate eigenvalues get a common orthogonalization group:
    // inverse iteration mixes members of a cluster arbitrarily, and even a
    // modest gap leaves cross-talk of order eps*|T|/gap, so group whenever
    // the gap cannot guarantee clean separation.
    std::vector<std::size_t> cluster_start(n, 0);
    for (std::size_t i = 1; i < n; ++i) {
        const double gap = lambdas[i] - lambdas[i - 1];
        const double cluster_gap =
            std::max(1e-7 * anorm, 2e-9 * std::fabs(lambdas[i]));
        cluster_start[i] = (gap <= cluster_gap) ? cluster_start[i - 1] : i;
    }

    dec.eigenfunctions.assign(n * m, 0.0);
    std::vector<std::vector<double>> vecs(n);

    const int max_it = 12;
    for (std::size_t k = 0; k < n; ++k) {
        const double lambda = lambdas[k];
        const TriFactor fac = factor_shifted(op.diagonal, op.off_diagonal, lambda, piv_floor);

        SplitMix64 rng(0x5b5ad4e1ULL ^ (static_cast<std::uint64_t>(k) * 0x100000001b3ULL));
        std::vector<double> v(m);
        for (std::size_t i = 0; i < m; ++i) v[i] = rng.next_double();

        const double cluster_span = lambda - lambdas[cluster_start[k]];
        const double resid_tol = 1024.0 * kEps * anorm + 2.0 * cluster_span;

        double resid = std::numeric_limits<double>::max();
        int used_it = 0;
        for (int it = 0; it < max_it; ++it) {
            used_it = it + 1;
            // project out previously converged members of the same cluster
            for (std::size_t j = cluster_start[k]; j < k; ++j) {
                const double c = kernels::dot(v.data(), vecs[j].data(), m);
                for (std::size_t i = 0; i < m; ++i) v[i] -= c * vecs[j][i];
            }
            double nrm = std::sqrt(kernels::dot(v.data(), v.data(), m));
            if (!(nrm > kSafmin)) {
                for (std::size_t i = 0; i < m; ++i) v[i] = rng.next_double();
                nrm = std::sqrt(kernels::dot(v.data(), v.data(), m));
            }
            for (std::size_t i = 0; i < m; ++i) v[i] /= nrm;

            solve_factored(fac, v);
            nrm = std::sqrt(kernels::dot(v.data(), v.data(), m));
            if (!(nrm > 0.0) || !std::isfinite(nrm)) {
                for (std::size_t i = 0; i < m; ++i) v[i] = rng.next_double();
                continue;
            }
            for (std::size_t i = 0; i < m; ++i) v[i] /= nrm;
            resid = residual_inf(op.diagonal, op.off_diagonal, lambda, v);
            if (resid <= resid_tol) break;
        }
        if (resid > resid_tol)
            throw numeric_error("inverse iteration did not converge for eigenvalue " +
                                std::to_string(lambda) + " (index " + std::to_string(k) +
                                "): residual " + std::to_string(resid) + " after " +
                                std::to_string(used_it) + " iterations, tolerance " +
                                std::to_string(resid_tol));

        // final cluster clean-up pass
        for (std::size_t j = cluster_start[k]; j < k; ++j) {
            const double c = kernels::dot(v.data(), vecs[j].data(), m);
            for (std::size_t i = 0; i < m; ++i) v[i] -= c * vecs[j][i];
        }
        const double nrm = std::sqrt(kernels::dot(v.data(), v.data(), m));
        for (std::size_t i = 0; i < m; ++i) v[i] /= nrm;
        vecs[k] = v;
    }

    dec.kappas.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        dec.kappas[k] = std::sqrt(-lambdas[k]);
        std::vector<double>& v = vecs[k];

        // grid normalization: sum(psi^2)*dt = 1
        const double scale = std::sqrt(kernels::dot(v.data(), v.data(), m) * op.dt);
        for (std::size_t i = 0; i < m; ++i) v[i] /= scale;

        // sign convention: entry of largest magnitude positive
        std::size_t imax = 0;
        for (std::size_t i = 1; i < m; ++i)
            if (std::fabs(v[i]) > std::fabs(v[imax])) imax = i;
        if (v[imax] < 0.0)
            for (std::size_t i = 0; i < m; ++i) v[i] = -v[i];

        std::copy(v.begin(), v.end(), dec.eigenfunctions.begin() + k * m);
    }
    return dec;
}

SpectralDecomposition negative_spectrum_values(const TridiagonalOperator& op) {
    SpectralDecomposition dec;
    dec.chi = op.chi;
    dec.dt = op.dt;
    dec.t0 = op.t0;
    dec.signal_length = op.size();

    const double cut = -detail::negative_cut(op);
    const std::vector<double> lambdas =
        detail::eigenvalues_below(op.diagonal, op.off_diagonal, cut);
    dec.kappas.resize(lambdas.size());
    for (std::size_t k = 0; k < lambdas.size(); ++k)
        dec.kappas[k] = std::sqrt(-lambdas[k]);
    return dec;
}

} // namespace sbsa
