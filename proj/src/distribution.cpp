#include "mmapq/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mmapq {

namespace {

double erlang_cdf(int shape, double rate, double t) {
    if (t <= 0.0) return 0.0;
    // 1 - e^{-rt} sum_{j<shape} (rt)^j / j!
    const double x = rate * t;
    double term = 1.0, sum = 1.0;
    for (int j = 1; j < shape; ++j) {
        term *= x / j;
        sum += term;
    }
    return 1.0 - std::exp(-x) * sum;
}

// (1 - e^{-x}) / x, stable near 0
double em1_over(double x) {
    if (x == 0.0) return 1.0;
    return -std::expm1(-x) / x;
}

}  // namespace

Distribution Distribution::deterministic(double value) {
    Distribution d;
    d.family_ = DistFamily::deterministic;
    d.a_ = value;
    return d;
}

Distribution Distribution::exponential(double rate) {
    Distribution d;
    d.family_ = DistFamily::exponential;
    d.a_ = rate;
    return d;
}

Distribution Distribution::erlang(int shape, double rate) {
    Distribution d;
    d.family_ = DistFamily::erlang;
    d.shape_ = shape;
    d.a_ = rate;
    return d;
}

Distribution Distribution::hyperexponential(std::vector<double> weights,
                                            std::vector<double> rates) {
    Distribution d;
    d.family_ = DistFamily::hyperexponential;
    d.weights_ = std::move(weights);
    d.rates_ = std::move(rates);
    return d;
}

Distribution Distribution::uniform(double low, double high) {
    Distribution d;
    d.family_ = DistFamily::uniform;
    d.a_ = low;
    d.b_ = high;
    return d;
}

std::vector<std::string> Distribution::check() const {
    std::vector<std::string> bad;
    switch (family_) {
        case DistFamily::deterministic:
            if (!(a_ >= 0.0) || !std::isfinite(a_)) bad.push_back("value must be >= 0");
            break;
        case DistFamily::exponential:
            if (!(a_ > 0.0) || !std::isfinite(a_)) bad.push_back("rate must be > 0");
            break;
        case DistFamily::erlang:
            if (shape_ < 1) bad.push_back("shape must be a positive integer");
            if (!(a_ > 0.0) || !std::isfinite(a_)) bad.push_back("rate must be > 0");
            break;
        case DistFamily::hyperexponential: {
            if (weights_.empty() || weights_.size() != rates_.size())
                bad.push_back("weights and rates must be nonempty and matched");
            for (double w : weights_)
                if (!(w >= 0.0)) bad.push_back("weights must be >= 0");
            for (double r : rates_)
                if (!(r > 0.0)) bad.push_back("rates must be > 0");
            const double s = std::accumulate(weights_.begin(), weights_.end(), 0.0);
            if (std::abs(s - 1.0) > 1e-10) bad.push_back("weights must sum to 1");
            break;
        }
        case DistFamily::uniform:
            if (!(a_ >= 0.0)) bad.push_back("low must be >= 0");
            if (!(b_ > a_)) bad.push_back("high must be > low");
            break;
    }
    return bad;
}

double Distribution::cdf(double t) const {
    switch (family_) {
        case DistFamily::deterministic:
            return t >= a_ ? 1.0 : 0.0;
        case DistFamily::exponential:
            return t <= 0.0 ? 0.0 : -std::expm1(-a_ * t);
        case DistFamily::erlang:
            return erlang_cdf(shape_, a_, t);
        case DistFamily::hyperexponential: {
            if (t <= 0.0) return 0.0;
            double f = 0.0;
            for (std::size_t i = 0; i < weights_.size(); ++i)
                f += weights_[i] * -std::expm1(-rates_[i] * t);
            return f;
        }
        case DistFamily::uniform:
            if (t <= a_) return 0.0;
            if (t >= b_) return 1.0;
            return (t - a_) / (b_ - a_);
    }
    return 0.0;
}

double Distribution::cdf_left(double t) const {
    if (family_ == DistFamily::deterministic) return t > a_ ? 1.0 : 0.0;
    return cdf(t);
}

double Distribution::mean() const {
    switch (family_) {
        case DistFamily::deterministic:
            return a_;
        case DistFamily::exponential:
            return 1.0 / a_;
        case DistFamily::erlang:
            return shape_ / a_;
        case DistFamily::hyperexponential: {
            double m = 0.0;
            for (std::size_t i = 0; i < weights_.size(); ++i) m += weights_[i] / rates_[i];
            return m;
        }
        case DistFamily::uniform:
            return 0.5 * (a_ + b_);
    }
    return 0.0;
}

double Distribution::lst(double s) const {
    switch (family_) {
        case DistFamily::deterministic:
            return std::exp(-s * a_);
        case DistFamily::exponential:
            return a_ / (a_ + s);
        case DistFamily::erlang:
            return std::pow(a_ / (a_ + s), shape_);
        case DistFamily::hyperexponential: {
            double v = 0.0;
            for (std::size_t i = 0; i < weights_.size(); ++i)
                v += weights_[i] * rates_[i] / (rates_[i] + s);
            return v;
        }
        case DistFamily::uniform:
            return std::exp(-s * a_) * em1_over(s * (b_ - a_));
    }
    return 0.0;
}

double Distribution::integrated_survival(double t) const {
    if (t <= 0.0) return 0.0;
    switch (family_) {
        case DistFamily::deterministic:
            return std::min(t, a_);
        case DistFamily::exponential:
            return -std::expm1(-a_ * t) / a_;
        case DistFamily::erlang: {
            // (1/rate) * sum_{j=1..shape} P(Erlang(j, rate) <= t)
            double s = 0.0;
            for (int j = 1; j <= shape_; ++j) s += erlang_cdf(j, a_, t);
            return s / a_;
        }
        case DistFamily::hyperexponential: {
            double s = 0.0;
            for (std::size_t i = 0; i < weights_.size(); ++i)
                s += weights_[i] * -std::expm1(-rates_[i] * t) / rates_[i];
            return s;
        }
        case DistFamily::uniform: {
            if (t >= b_) return mean();
            if (t <= a_) return t;
            const double w = b_ - a_;
            const double x = t - a_;
            return a_ + x - 0.5 * x * x / w;
        }
    }
    return 0.0;
}

double Distribution::survival_quantile(double eps) const {
    switch (family_) {
        case DistFamily::deterministic:
            return a_;
        case DistFamily::exponential:
            return -std::log(eps) / a_;
        case DistFamily::uniform:
            return b_ - eps * (b_ - a_);
        default: {
            double hi = std::max(mean(), 1e-12);
            while (survival(hi) > eps) hi *= 2.0;
            double lo = 0.0;
            for (int it = 0; it < 200 && hi - lo > 1e-12 * (1.0 + hi); ++it) {
                const double mid = 0.5 * (lo + hi);
                (survival(mid) > eps ? lo : hi) = mid;
            }
            return hi;
        }
    }
}

double Distribution::sample(RngStream& rng) const {
    switch (family_) {
        case DistFamily::deterministic:
            return a_;
        case DistFamily::exponential:
            return -std::log(rng.uniform()) / a_;
        case DistFamily::erlang: {
            double logs = 0.0;
            for (int j = 0; j < shape_; ++j) logs += std::log(rng.uniform());
            return -logs / a_;
        }
        case DistFamily::hyperexponential: {
            const double u = rng.uniform();
            double acc = 0.0;
            std::size_t pick = weights_.size() - 1;
            for (std::size_t i = 0; i < weights_.size(); ++i) {
                acc += weights_[i];
                if (u <= acc) {
                    pick = i;
                    break;
                }
            }
            return -std::log(rng.uniform()) / rates_[pick];
        }
        case DistFamily::uniform:
            return a_ + (b_ - a_) * rng.uniform();
    }
    return 0.0;
}

std::string family_name(DistFamily f) {
    switch (f) {
        case DistFamily::deterministic: return "deterministic";
        case DistFamily::exponential: return "exponential";
        case DistFamily::erlang: return "erlang";
        case DistFamily::hyperexponential: return "hyperexponential";
        case DistFamily::uniform: return "uniform";
    }
    return "unknown";
}

}  // namespace mmapq
