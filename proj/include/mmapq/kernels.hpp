#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

// Grid-math inner loops (quadrature sums, renewal convolutions, DFT
// inversion). A scalar reference implementation is always available;
// vectorized variants are selected at runtime from CPU capabilities and
// must stay numerically equivalent to the reference (see test_kernels).
namespace mmapq::kernels {

enum class Backend { scalar, avx2, neon };

// Raw function table; one table per backend.
struct Ops {
    double (*dot)(const double* a, const double* b, std::size_t n);
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    std::complex<double> (*cdot)(const std::complex<double>* a,
                                 const std::complex<double>* b, std::size_t n);
};

bool supported(Backend b) noexcept;
Backend active() noexcept;
std::string_view backend_name(Backend b) noexcept;

// Force a specific backend (tests); throws std::invalid_argument when the
// backend is not supported on this machine. Not safe while kernels run on
// other threads.
void select(Backend b);

// Pick the best supported backend, honoring the MMAPQ_KERNELS environment
// variable ("scalar", "avx2", "neon") when set to a supported value.
void select_auto();

const Ops& scalar_ops() noexcept;

// sum_i a[i] * b[i]
double dot(std::span<const double> a, std::span<const double> b);

// y[i] += alpha * x[i]
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// sum_i a[i] * b[i], no conjugation
std::complex<double> cdot(std::span<const std::complex<double>> a,
                          std::span<const std::complex<double>> b);

// y[i] += alpha * x[i] over complex sequences with a real coefficient;
// runs as a real axpy on the interleaved re/im layout.
void caxpy(double alpha, std::span<const std::complex<double>> x,
           std::span<std::complex<double>> y);

}  // namespace mmapq::kernels
