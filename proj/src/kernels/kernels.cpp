#include "mmapq/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace mmapq::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

std::complex<double> cdot_scalar(const std::complex<double>* a,
                                 const std::complex<double>* b, std::size_t n) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        re += a[i].real() * b[i].real() - a[i].imag() * b[i].imag();
        im += a[i].real() * b[i].imag() + a[i].imag() * b[i].real();
    }
    return {re, im};
}

constexpr Ops kScalarOps{dot_scalar, axpy_scalar, cdot_scalar};

struct State {
    Backend backend = Backend::scalar;
    Ops ops = kScalarOps;
};

State& state() {
    static State s = [] {
        State init;
        init.backend = Backend::scalar;
        init.ops = kScalarOps;
        return init;
    }();
    return s;
}

bool auto_selected = [] {
    select_auto();
    return true;
}();

}  // namespace

#if defined(__x86_64__) || defined(_M_X64)
extern const Ops avx2_ops;  // kernels_avx2.cpp
#endif
#if defined(__aarch64__)
extern const Ops neon_ops;  // kernels_neon.cpp
#endif

bool supported(Backend b) noexcept {
    switch (b) {
        case Backend::scalar:
            return true;
        case Backend::avx2:
#if defined(__x86_64__) || defined(_M_X64)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Backend::neon:
#if defined(__aarch64__)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Backend active() noexcept { return state().backend; }

std::string_view backend_name(Backend b) noexcept {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
        case Backend::neon: return "neon";
    }
    return "unknown";
}

void select(Backend b) {
    if (!supported(b))
        throw std::invalid_argument("kernel backend not supported on this cpu: " +
                                    std::string(backend_name(b)));
    State& s = state();
    s.backend = b;
    switch (b) {
        case Backend::scalar:
            s.ops = kScalarOps;
            break;
        case Backend::avx2:
#if defined(__x86_64__) || defined(_M_X64)
            s.ops = avx2_ops;
#endif
            break;
        case Backend::neon:
#if defined(__aarch64__)
            s.ops = neon_ops;
#endif
            break;
    }
}

void select_auto() {
    if (const char* env = std::getenv("MMAPQ_KERNELS")) {
        const std::string want(env);
        for (Backend b : {Backend::scalar, Backend::avx2, Backend::neon}) {
            if (want == backend_name(b) && supported(b)) {
                select(b);
                return;
            }
        }
    }
    if (supported(Backend::avx2)) {
        select(Backend::avx2);
    } else if (supported(Backend::neon)) {
        select(Backend::neon);
    } else {
        select(Backend::scalar);
    }
}

const Ops& scalar_ops() noexcept { return kScalarOps; }

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
    return state().ops.dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("axpy: length mismatch");
    state().ops.axpy(alpha, x.data(), y.data(), x.size());
}

std::complex<double> cdot(std::span<const std::complex<double>> a,
                          std::span<const std::complex<double>> b) {
    if (a.size() != b.size()) throw std::invalid_argument("cdot: length mismatch");
    return state().ops.cdot(a.data(), b.data(), a.size());
}

void caxpy(double alpha, std::span<const std::complex<double>> x,
           std::span<std::complex<double>> y) {
    if (x.size() != y.size()) throw std::invalid_argument("caxpy: length mismatch");
    // std::complex<double> is layout-compatible with double[2].
    state().ops.axpy(alpha, reinterpret_cast<const double*>(x.data()),
                     reinterpret_cast<double*>(y.data()), 2 * x.size());
}

}  // namespace mmapq::kernels
