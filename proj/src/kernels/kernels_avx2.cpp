#include "mmapq/kernels.hpp"

// AVX2 + FMA variants. This translation unit is compiled with -mavx2 -mfma
// and is only entered after the dispatcher has checked cpu support.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace mmapq::kernels {

namespace {

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    __m256d acc = _mm256_add_pd(acc0, acc1);
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double sum = (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

std::complex<double> cdot_avx2(const std::complex<double>* ca,
                               const std::complex<double>* cb, std::size_t n) {
    const double* a = reinterpret_cast<const double*>(ca);
    const double* b = reinterpret_cast<const double*>(cb);
    // Lanes hold [re0, im0, re1, im1]; straight products feed the real part,
    // swapped products feed the imaginary part.
    __m256d acc_str = _mm256_setzero_pd();
    __m256d acc_swp = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d va = _mm256_loadu_pd(a + 2 * i);
        __m256d vb = _mm256_loadu_pd(b + 2 * i);
        __m256d vbs = _mm256_shuffle_pd(vb, vb, 0x5);
        acc_str = _mm256_fmadd_pd(va, vb, acc_str);
        acc_swp = _mm256_fmadd_pd(va, vbs, acc_swp);
    }
    alignas(32) double s[4], w[4];
    _mm256_store_pd(s, acc_str);
    _mm256_store_pd(w, acc_swp);
    double re = (s[0] + s[2]) - (s[1] + s[3]);
    double im = (w[0] + w[2]) + (w[1] + w[3]);
    for (; i < n; ++i) {
        re += ca[i].real() * cb[i].real() - ca[i].imag() * cb[i].imag();
        im += ca[i].real() * cb[i].imag() + ca[i].imag() * cb[i].real();
    }
    return {re, im};
}

}  // namespace

extern const Ops avx2_ops{dot_avx2, axpy_avx2, cdot_avx2};

}  // namespace mmapq::kernels

#endif  // x86_64
