#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "mmapq/errors.hpp"
#include "mmapq/kernels.hpp"

namespace mmapq {

// Uniform time grid t_k = k * step, k = 0..nodes-1.
struct Grid {
    double step = 0.0;
    std::size_t nodes = 0;

    static Grid over(double horizon, double step) {
        if (!(step > 0.0)) throw GridError("step must be > 0");
        if (horizon < 0.0) throw GridError("horizon must be >= 0");
        const double ratio = horizon / step;
        const double r = std::round(ratio);
        if (std::abs(ratio - r) > 1e-9 * (1.0 + ratio))
            throw GridError("horizon must be an integer multiple of step");
        return Grid{step, static_cast<std::size_t>(r) + 1};
    }

    double horizon() const { return step * static_cast<double>(nodes - 1); }
    double time(std::size_t k) const { return step * static_cast<double>(k); }

    std::size_t index_of(double t) const {
        const double ratio = t / step;
        const double r = std::round(ratio);
        if (r < 0 || std::abs(ratio - r) > 1e-9 * (1.0 + std::abs(ratio)))
            throw GridError("time is not a grid node");
        const auto k = static_cast<std::size_t>(r);
        if (k >= nodes) throw GridError("time beyond grid horizon");
        return k;
    }

    bool contains(double t) const {
        const double ratio = t / step;
        const double r = std::round(ratio);
        return r >= 0 && std::abs(ratio - r) <= 1e-9 * (1.0 + std::abs(ratio)) &&
               static_cast<std::size_t>(r) < nodes;
    }
};

// A fixed-dimension block of values per grid node, stored flat so the
// convolution/quadrature kernels can run over contiguous memory.
template <class T>
class GridSeq {
  public:
    GridSeq() = default;
    GridSeq(Grid g, std::size_t dim) : grid_(g), dim_(dim), data_(g.nodes * dim) {}

    const Grid& grid() const { return grid_; }
    std::size_t dim() const { return dim_; }

    std::span<T> at(std::size_t k) { return {data_.data() + k * dim_, dim_}; }
    std::span<const T> at(std::size_t k) const { return {data_.data() + k * dim_, dim_}; }
    std::span<T> flat() { return data_; }
    std::span<const T> flat() const { return data_; }

  private:
    Grid grid_;
    std::size_t dim_ = 0;
    std::vector<T> data_;
};

using GridComplexSeq = GridSeq<std::complex<double>>;
using GridRealSeq = GridSeq<double>;

// Cumulative trapezoid over a piecewise-smooth integrand sampled from the
// right at the start of each cell and from the left at its end; the two
// sequences coincide for continuous integrands. out(k) = int_0^{t_k}.
inline GridComplexSeq cumulative_trapezoid(const GridComplexSeq& right,
                                           const GridComplexSeq& left) {
    GridComplexSeq out(right.grid(), right.dim());
    const double h = 0.5 * right.grid().step;
    for (std::size_t k = 1; k < right.grid().nodes; ++k) {
        auto acc = out.at(k);
        std::copy(out.at(k - 1).begin(), out.at(k - 1).end(), acc.begin());
        kernels::caxpy(h, right.at(k - 1), acc);
        kernels::caxpy(h, left.at(k), acc);
    }
    return out;
}

}  // namespace mmapq
