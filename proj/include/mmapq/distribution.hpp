#pragma once

#include <string>
#include <vector>

#include "mmapq/rng.hpp"

namespace mmapq {

enum class DistFamily { deterministic, exponential, erlang, hyperexponential, uniform };

// One nonnegative service/sojourn/resource law. Every family has closed-form
// CDF, mean, LST and integrated survival, plus inverse-CDF or composition
// sampling, so analytic formulas and the simulator draw from the same object.
class Distribution {
  public:
    static Distribution deterministic(double value);
    static Distribution exponential(double rate);
    static Distribution erlang(int shape, double rate);
    static Distribution hyperexponential(std::vector<double> weights,
                                         std::vector<double> rates);
    static Distribution uniform(double low, double high);

    DistFamily family() const noexcept { return family_; }

    // Family constraint violations ("rate must be > 0", ...). Empty when valid.
    std::vector<std::string> check() const;

    double cdf(double t) const;       // P(X <= t), right-continuous
    double cdf_left(double t) const;  // P(X < t); differs from cdf only at atoms
    double survival(double t) const { return 1.0 - cdf(t); }
    double mean() const;
    double lst(double s) const;                  // E[e^{-sX}]
    double integrated_survival(double t) const;  // int_0^t (1-F(u)) du
    double survival_quantile(double eps) const;  // inf{t : 1-F(t) <= eps}
    double sample(RngStream& rng) const;

    // True when the CDF has an atom (only the deterministic family here).
    bool has_atom() const noexcept { return family_ == DistFamily::deterministic; }
    double atom_location() const noexcept { return a_; }

    // raw parameters, for serialization
    double value() const noexcept { return a_; }
    double rate() const noexcept { return a_; }
    int shape() const noexcept { return shape_; }
    double low() const noexcept { return a_; }
    double high() const noexcept { return b_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    const std::vector<double>& rates() const noexcept { return rates_; }

    bool operator==(const Distribution&) const = default;

  private:
    Distribution() = default;
    DistFamily family_ = DistFamily::exponential;
    double a_ = 1.0;  // value | rate | low
    double b_ = 0.0;  // high
    int shape_ = 1;
    std::vector<double> weights_;
    std::vector<double> rates_;
};

std::string family_name(DistFamily f);

}  // namespace mmapq
