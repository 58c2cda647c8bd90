#include <cmath>
#include <cstddef>

#include "sbsa/kernels.hpp"

// Scalar reference kernels. Reductions use the same four-lane accumulation
// tree as the vector variants (see kernels.hpp); this file is the definition
// of that tree. Built with -ffp-contract=off so no mul+add pair fuses.

namespace sbsa::kernels::detail {
namespace {

double sum_scalar(const double* x, std::size_t n) {
    double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
    std::size_t i = 0;
    const std::size_t n4 = n - n % 4;
    for (; i < n4; i += 4) {
        acc0 += x[i];
        acc1 += x[i + 1];
        acc2 += x[i + 2];
        acc3 += x[i + 3];
    }
    double lane[4] = {acc0, acc1, acc2, acc3};
    for (std::size_t j = 0; i < n; ++i, ++j) lane[j] += x[i];
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
    std::size_t i = 0;
    const std::size_t n4 = n - n % 4;
    for (; i < n4; i += 4) {
        acc0 += a[i] * b[i];
        acc1 += a[i + 1] * b[i + 1];
        acc2 += a[i + 2] * b[i + 2];
        acc3 += a[i + 3] * b[i + 3];
    }
    double lane[4] = {acc0, acc1, acc2, acc3};
    for (std::size_t j = 0; i < n; ++i, ++j) lane[j] += a[i] * b[i];
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double sum_squared_diff_scalar(const double* a, const double* b, std::size_t n) {
    double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
    std::size_t i = 0;
    const std::size_t n4 = n - n % 4;
    for (; i < n4; i += 4) {
        const double d0 = a[i] - b[i];
        const double d1 = a[i + 1] - b[i + 1];
        const double d2 = a[i + 2] - b[i + 2];
        const double d3 = a[i + 3] - b[i + 3];
        acc0 += d0 * d0;
        acc1 += d1 * d1;
        acc2 += d2 * d2;
        acc3 += d3 * d3;
    }
    double lane[4] = {acc0, acc1, acc2, acc3};
    for (std::size_t j = 0; i < n; ++i, ++j) {
        const double d = a[i] - b[i];
        lane[j] += d * d;
    }
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

void add_scaled_square_scalar(double* out, const double* psi, double coeff,
                              std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] += coeff * (psi[i] * psi[i]);
}

// One shift of the pivot-sign count: the LDL^T recurrence
//   d <- diag[i] - shift - off2[i-1]/d,
// counting negative pivots; |d| <= pivmin is replaced by -pivmin.
int sturm_count_one(const double* diag, const double* off2, std::size_t m,
                    double shift, double pivmin) {
    int count = 0;
    double d = diag[0] - shift;
    if (std::fabs(d) <= pivmin) d = -pivmin;
    if (d < 0.0) ++count;
    for (std::size_t i = 1; i < m; ++i) {
        d = (diag[i] - shift) - off2[i - 1] / d;
        if (std::fabs(d) <= pivmin) d = -pivmin;
        if (d < 0.0) ++count;
    }
    return count;
}

void sturm_counts_scalar(const double* diag, const double* off2, std::size_t m,
                         const double* shifts, int* counts, std::size_t nshifts,
                         double pivmin) {
    for (std::size_t k = 0; k < nshifts; ++k)
        counts[k] = sturm_count_one(diag, off2, m, shifts[k], pivmin);
}

} // namespace

const KernelTable& scalar_table() {
    static const KernelTable t{
        &sum_scalar,
        &dot_scalar,
        &sum_squared_diff_scalar,
        &add_scaled_square_scalar,
        &sturm_counts_scalar,
    };
    return t;
}

} // namespace sbsa::kernels::detail
