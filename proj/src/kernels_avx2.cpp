// AVX2 kernel variants. Compiled with -mavx2 only on x86-64; dispatch in
// kernels.cpp guards on CPUID. Lane j of a vector accumulator is the scalar
// reference's acc_j, combines stay (l0+l1)+(l2+l3), and mul/add are kept
// separate (no fma), so every result is bit-identical to the scalar path.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstddef>

#include "sbsa/kernels.hpp"

namespace sbsa::kernels::detail {
namespace {

inline double combine_with_tail(__m256d acc, const double* tail_a,
                                const double* tail_b, std::size_t tail_n,
                                bool squared_diff) {
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    for (std::size_t j = 0; j < tail_n; ++j) {
        if (tail_b == nullptr) {
            lane[j] += tail_a[j];
        } else if (squared_diff) {
            const double d = tail_a[j] - tail_b[j];
            lane[j] += d * d;
        } else {
            lane[j] += tail_a[j] * tail_b[j];
        }
    }
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double sum_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    const std::size_t n4 = n - n % 4;
    for (; i < n4; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    return combine_with_tail(acc, x + i, nullptr, n - i, false);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    const std::size_t n4 = n - n % 4;
    for (; i < n4; i += 4) {
        const __m256d p = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, p);
    }
    return combine_with_tail(acc, a + i, b + i, n - i, false);
}

double sum_squared_diff_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    const std::size_t n4 = n - n % 4;
    for (; i < n4; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    return combine_with_tail(acc, a + i, b + i, n - i, true);
}

void add_scaled_square_avx2(double* out, const double* psi, double coeff,
                            std::size_t n) {
    const __m256d c = _mm256_set1_pd(coeff);
    std::size_t i = 0;
    const std::size_t n4 = n - n % 4;
    for (; i < n4; i += 4) {
        const __m256d p = _mm256_loadu_pd(psi + i);
        const __m256d t = _mm256_mul_pd(c, _mm256_mul_pd(p, p));
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(out + i), t));
    }
    for (; i < n; ++i) out[i] += coeff * (psi[i] * psi[i]);
}

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

// Four shifts advance through the recurrence together, one per lane.
void sturm_counts_avx2(const double* diag, const double* off2, std::size_t m,
                       const double* shifts, int* counts, std::size_t nshifts,
                       double pivmin) {
    const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    const __m256d vpivmin = _mm256_set1_pd(pivmin);
    const __m256d vneg_pivmin = _mm256_set1_pd(-pivmin);
    const __m256d vzero = _mm256_setzero_pd();
    const __m256d vone = _mm256_set1_pd(1.0);

    std::size_t k = 0;
    for (; k + 4 <= nshifts; k += 4) {
        const __m256d vshift = _mm256_loadu_pd(shifts + k);
        __m256d cnt = vzero;

        __m256d d = _mm256_sub_pd(_mm256_set1_pd(diag[0]), vshift);
        __m256d small = _mm256_cmp_pd(_mm256_and_pd(d, abs_mask), vpivmin, _CMP_LE_OQ);
        d = _mm256_blendv_pd(d, vneg_pivmin, small);
        cnt = _mm256_add_pd(cnt, _mm256_and_pd(_mm256_cmp_pd(d, vzero, _CMP_LT_OQ), vone));

        for (std::size_t i = 1; i < m; ++i) {
            const __m256d q = _mm256_div_pd(_mm256_set1_pd(off2[i - 1]), d);
            d = _mm256_sub_pd(_mm256_sub_pd(_mm256_set1_pd(diag[i]), vshift), q);
            small = _mm256_cmp_pd(_mm256_and_pd(d, abs_mask), vpivmin, _CMP_LE_OQ);
            d = _mm256_blendv_pd(d, vneg_pivmin, small);
            cnt = _mm256_add_pd(cnt, _mm256_and_pd(_mm256_cmp_pd(d, vzero, _CMP_LT_OQ), vone));
        }

        alignas(32) double lane[4];
        _mm256_store_pd(lane, cnt);
        for (int j = 0; j < 4; ++j) counts[k + j] = static_cast<int>(lane[j]);
    }
    for (; k < nshifts; ++k)
        counts[k] = sturm_count_one(diag, off2, m, shifts[k], pivmin);
}

} // namespace

const KernelTable& avx2_table() {
    static const KernelTable t{
        &sum_avx2,
        &dot_avx2,
        &sum_squared_diff_avx2,
        &add_scaled_square_avx2,
        &sturm_counts_avx2,
    };
    return t;
}

} // namespace sbsa::kernels::detail

#endif // x86-64
