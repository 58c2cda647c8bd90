#include "sbsa/kernels.hpp"

#include <atomic>

#include "sbsa/errors.hpp"

namespace sbsa::kernels {

namespace {

bool avx2_compiled() {
#if defined(__x86_64__) || defined(_M_X64)
    return true;
#else
    return false;
#endif
}

bool avx2_usable() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

const detail::KernelTable* pick_auto() {
#if defined(__x86_64__) || defined(_M_X64)
    if (avx2_usable()) return &detail::avx2_table();
#endif
    return &detail::scalar_table();
}

std::atomic<const detail::KernelTable*> g_table{nullptr};
std::atomic<Backend> g_backend{Backend::scalar};

const detail::KernelTable& table() {
    const detail::KernelTable* t = g_table.load(std::memory_order_acquire);
    if (t == nullptr) {
        t = pick_auto();
        g_backend.store(t == &detail::scalar_table() ? Backend::scalar : Backend::avx2,
                        std::memory_order_relaxed);
        g_table.store(t, std::memory_order_release);
    }
    return *t;
}

} // namespace

bool available(Backend b) {
    switch (b) {
        case Backend::scalar: return true;
        case Backend::avx2: return avx2_compiled() && avx2_usable();
    }
    return false;
}

Backend active_backend() {
    table();
    return g_backend.load(std::memory_order_relaxed);
}

void force_backend(Backend b) {
    if (!available(b)) throw input_error("requested kernel backend is not available");
#if defined(__x86_64__) || defined(_M_X64)
    g_table.store(b == Backend::avx2 ? &detail::avx2_table() : &detail::scalar_table(),
                  std::memory_order_release);
#else
    g_table.store(&detail::scalar_table(), std::memory_order_release);
#endif
    g_backend.store(b, std::memory_order_relaxed);
}

void reset_backend() {
    g_table.store(nullptr, std::memory_order_release);
}

double sum(const double* x, std::size_t n) { return table().sum(x, n); }

double dot(const double* a, const double* b, std::size_t n) {
    return table().dot(a, b, n);
}

double sum_squared_diff(const double* a, const double* b, std::size_t n) {
    return table().sum_squared_diff(a, b, n);
}

void add_scaled_square(double* out, const double* psi, double coeff, std::size_t n) {
    table().add_scaled_square(out, psi, coeff, n);
}

void sturm_counts(const double* diag, const double* off2, std::size_t m,
                  const double* shifts, int* counts, std::size_t nshifts,
                  double pivmin) {
    table().sturm_counts(diag, off2, m, shifts, counts, nshifts, pivmin);
}

double trapezoid(const double* y, std::size_t n, double dt) {
    if (n < 2) return 0.0;
    return (sum(y, n) - 0.5 * (y[0] + y[n - 1])) * dt;
}

} // namespace sbsa::kernels
