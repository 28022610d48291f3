// Compiled with -mavx2 only (no -mfma): multiply and add stay separate, matching the scalar path bit for bit.
#include <immintrin.h>

#include "bbmlab/simd/kernels.hpp"

namespace bbm::simd::detail {

void correlate_avx2(const double* in, const double* taps, std::size_t ntaps, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d acc0 = _mm256_setzero_pd();
        __m256d acc1 = _mm256_setzero_pd();
        for (std::size_t k = 0; k < ntaps; ++k) {
            const __m256d w = _mm256_broadcast_sd(taps + k);
            acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(w, _mm256_loadu_pd(in + i + k)));
            acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(w, _mm256_loadu_pd(in + i + k + 4)));
        }
        _mm256_storeu_pd(out + i, acc0);
        _mm256_storeu_pd(out + i + 4, acc1);
    }
    for (; i + 4 <= n; i += 4) {
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t k = 0; k < ntaps; ++k) {
            acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_broadcast_sd(taps + k), _mm256_loadu_pd(in + i + k)));
        }
        _mm256_storeu_pd(out + i, acc);
    }
    if (i < n) correlate_scalar(in + i, taps, ntaps, out + i, n - i);
}

void three_point_avx2(const double* in, double side, double centre, double* out, std::size_t n) {
    const __m256d s = _mm256_set1_pd(side);
    const __m256d c = _mm256_set1_pd(centre);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d l = _mm256_loadu_pd(in + i);
        const __m256d m = _mm256_loadu_pd(in + i + 1);
        const __m256d r = _mm256_loadu_pd(in + i + 2);
        const __m256d v = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(s, l), _mm256_mul_pd(c, m)),
                                        _mm256_mul_pd(s, r));
        _mm256_storeu_pd(out + i, v);
    }
    if (i < n) three_point_scalar(in + i, side, centre, out + i, n - i);
}

}  // namespace bbm::simd::detail
