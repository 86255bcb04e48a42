#include "mmapq/kernels.hpp"

// NEON variants for aarch64, where 128-bit SIMD is baseline.

#if defined(__aarch64__)

#include <arm_neon.h>

namespace mmapq::kernels {

namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    for (; i + 2 <= n; i += 2) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    }
    double sum = vaddvq_f64(acc0) + vaddvq_f64(acc1);
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t vy = vld1q_f64(y + i);
        vy = vfmaq_f64(vy, va, vld1q_f64(x + i));
        vst1q_f64(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

std::complex<double> cdot_neon(const std::complex<double>* ca,
                               const std::complex<double>* cb, std::size_t n) {
    const double* a = reinterpret_cast<const double*>(ca);
    const double* b = reinterpret_cast<const double*>(cb);
    float64x2_t acc_str = vdupq_n_f64(0.0);  // [re*re, im*im]
    float64x2_t acc_swp = vdupq_n_f64(0.0);  // [re*im, im*re]
    std::size_t i = 0;
    for (; i < n; ++i) {
        float64x2_t va = vld1q_f64(a + 2 * i);
        float64x2_t vb = vld1q_f64(b + 2 * i);
        float64x2_t vbs = vextq_f64(vb, vb, 1);
        acc_str = vfmaq_f64(acc_str, va, vb);
        acc_swp = vfmaq_f64(acc_swp, va, vbs);
    }
    double re = vgetq_lane_f64(acc_str, 0) - vgetq_lane_f64(acc_str, 1);
    double im = vgetq_lane_f64(acc_swp, 0) + vgetq_lane_f64(acc_swp, 1);
    return {re, im};
}

}  // namespace

extern const Ops neon_ops{dot_neon, axpy_neon, cdot_neon};

}  // namespace mmapq::kernels

#endif  // aarch64
