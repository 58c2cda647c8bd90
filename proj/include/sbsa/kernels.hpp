#pragma once

#include <cstddef>
#include <span>

// Data-parallel inner loops used by the eigensolver and the transform layer:
// reductions (sum, dot, squared differences), the per-component reconstruction
// update, and batched Sturm pivot counts for spectral bisection.
//
// Every kernel exists as a scalar reference and, on x86-64, an AVX2 variant;
// the active variant is picked once at startup from CPUID. The two variants
// are bit-identical by construction: reductions commit to a fixed four-lane
// accumulation tree (lane j owns elements i with i % 4 == j, lanes combine as
// (l0+l1)+(l2+l3)), elementwise kernels perform the same rounded operations
// per element, and the Sturm recurrence runs each shift independently. The
// scalar reference implements that same tree, so switching backends never
// changes a single output bit. Tests assert the equivalence exactly.

namespace sbsa::kernels {

enum class Backend { scalar, avx2 };

// Variant compiled in and usable on this CPU.
bool available(Backend b);

// Currently dispatched variant.
Backend active_backend();

// Test hook: pin dispatch to one variant. Throws input_error if unavailable.
void force_backend(Backend b);

// Undo force_backend; resume automatic selection.
void reset_backend();

// sum over x[0..n) with the fixed accumulation tree.
double sum(const double* x, std::size_t n);

// dot product a.b, same tree.
double dot(const double* a, const double* b, std::size_t n);

// sum of (a[i]-b[i])^2, same tree.
double sum_squared_diff(const double* a, const double* b, std::size_t n);

// out[i] += coeff * psi[i]^2, elementwise (one rounding per op, no fma).
void add_scaled_square(double* out, const double* psi, double coeff, std::size_t n);

// For each shift s, counts[k] = number of eigenvalues of the symmetric
// tridiagonal matrix (diag, off) strictly below shifts[k], by the LDL^T pivot
// sign count. off2 holds the squared off-diagonal entries (length m-1).
// pivmin guards tiny pivots the way LAPACK's bisection does: any pivot with
// |d| <= pivmin is replaced by -pivmin.
void sturm_counts(const double* diag, const double* off2, std::size_t m,
                  const double* shifts, int* counts, std::size_t nshifts,
                  double pivmin);

// Trapezoid quadrature dt * (sum(y) - (y[0]+y[n-1])/2); n >= 2.
double trapezoid(const double* y, std::size_t n, double dt);

// span sugar
inline double sum(std::span<const double> x) { return sum(x.data(), x.size()); }
inline double dot(std::span<const double> a, std::span<const double> b) {
    return dot(a.data(), b.data(), a.size());
}
inline double sum_squared_diff(std::span<const double> a, std::span<const double> b) {
    return sum_squared_diff(a.data(), b.data(), a.size());
}
inline double trapezoid(std::span<const double> y, double dt) {
    return trapezoid(y.data(), y.size(), dt);
}

namespace detail {

struct KernelTable {
    double (*sum)(const double*, std::size_t);
    double (*dot)(const double*, const double*, std::size_t);
    double (*sum_squared_diff)(const double*, const double*, std::size_t);
    void (*add_scaled_square)(double*, const double*, double, std::size_t);
    void (*sturm_counts)(const double*, const double*, std::size_t,
                         const double*, int*, std::size_t, double);
};

const KernelTable& scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
const KernelTable& avx2_table();
#endif

} // namespace detail

} // namespace sbsa::kernels
