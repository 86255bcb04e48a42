#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mmapq/distribution.hpp"
#include "mmapq/rng.hpp"

using namespace mmapq;

namespace {

std::vector<Distribution> all_families() {
    return {
        Distribution::deterministic(1.5),
        Distribution::exponential(2.0),
        Distribution::erlang(3, 2.0),
        Distribution::hyperexponential({0.3, 0.7}, {0.5, 4.0}),
        Distribution::uniform(0.25, 2.0),
    };
}

// numeric integral of the survival over [0, t]; the range is split at atoms
// and each piece samples the right limit at its start and the left limit at
// its end, so jumps never straddle a cell
double numeric_integrated_survival(const Distribution& d, double t,
                                   std::size_t cells) {
    std::vector<double> breaks{0.0};
    if (d.has_atom() && d.atom_location() > 0.0 && d.atom_location() < t)
        breaks.push_back(d.atom_location());
    breaks.push_back(t);

    double acc = 0.0;
    for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
        const double lo = breaks[b], hi = breaks[b + 1];
        const double step = (hi - lo) / cells;
        for (std::size_t i = 0; i < cells; ++i)
            acc += 0.5 * step *
                   (d.survival(lo + step * i) + (1.0 - d.cdf_left(lo + step * (i + 1))));
    }
    return acc;
}

double numeric_mean(const Distribution& d) {
    return numeric_integrated_survival(d, d.survival_quantile(1e-14), 4'000'000);
}

// numeric LST via product integration of e^{-st} dF
double numeric_lst(const Distribution& d, double s) {
    if (d.family() == DistFamily::deterministic) return std::exp(-s * d.value());
    const double hi = d.survival_quantile(1e-14);
    const std::size_t cells = 2'000'000;
    const double step = hi / cells;
    double acc = 0.0, prev = d.cdf(0.0);
    for (std::size_t i = 1; i <= cells; ++i) {
        const double cur = d.cdf(step * i);
        acc += (cur - prev) * 0.5 *
               (std::exp(-s * step * (i - 1)) + std::exp(-s * step * i));
        prev = cur;
    }
    return acc;
}

}  // namespace

TEST_CASE("closed-form means match numeric integration of the survival") {
    for (const auto& d : all_families()) {
        CAPTURE(family_name(d.family()));
        CHECK(d.mean() == doctest::Approx(numeric_mean(d)).epsilon(1e-8));
    }
}

TEST_CASE("lst(0) is 1 and lst matches numeric transform") {
    for (const auto& d : all_families()) {
        CAPTURE(family_name(d.family()));
        CHECK(d.lst(0.0) == doctest::Approx(1.0).epsilon(1e-12));
        for (double s : {0.3, 1.0, 2.5})
            CHECK(d.lst(s) == doctest::Approx(numeric_lst(d, s)).epsilon(1e-6));
    }
}

TEST_CASE("integrated survival matches quadrature and saturates at the mean") {
    for (const auto& d : all_families()) {
        CAPTURE(family_name(d.family()));
        for (double t : {0.1, 0.7, 1.3, 4.0})
            CHECK(d.integrated_survival(t) ==
                  doctest::Approx(numeric_integrated_survival(d, t, 400'000))
                      .epsilon(1e-7));
        CHECK(d.integrated_survival(d.survival_quantile(1e-13) + 1.0) ==
              doctest::Approx(d.mean()).epsilon(1e-9));
    }
}

TEST_CASE("cdf is a proper right-continuous distribution function") {
    for (const auto& d : all_families()) {
        CAPTURE(family_name(d.family()));
        CHECK(d.cdf(-1.0) == 0.0);
        double prev = 0.0;
        for (double t = 0.0; t < 8.0; t += 0.05) {
            const double cur = d.cdf(t);
            CHECK(cur >= prev);
            CHECK(cur <= 1.0);
            CHECK(d.cdf_left(t) <= cur);
            prev = cur;
        }
        CHECK(d.cdf(d.survival_quantile(1e-12) + 1.0) == doctest::Approx(1.0));
    }
    // atom semantics
    const auto det = Distribution::deterministic(3.0);
    CHECK(det.cdf(3.0) == 1.0);
    CHECK(det.cdf_left(3.0) == 0.0);
    CHECK(det.cdf(2.999999) == 0.0);
}

TEST_CASE("sampling: deterministic(3) always returns 3") {
    RngStream rng(1, 0, 0);
    const auto d = Distribution::deterministic(3.0);
    for (int i = 0; i < 100; ++i) CHECK(d.sample(rng) == 3.0);
}

TEST_CASE("sampling: empirical means over 1e6 draws sit within 4 standard errors") {
    struct Case {
        Distribution d;
        double var;
    };
    const std::vector<Case> cases = {
        {Distribution::exponential(2.0), 0.25},
        {Distribution::erlang(2, 2.0), 0.5},
        {Distribution::uniform(0.25, 2.0), (2.0 - 0.25) * (2.0 - 0.25) / 12.0},
        {Distribution::hyperexponential({0.3, 0.7}, {0.5, 4.0}),
         2.0 * (0.3 / 0.25 + 0.7 / 16.0) - std::pow(0.3 / 0.5 + 0.7 / 4.0, 2)},
    };
    const int n = 1'000'000;
    for (const auto& [d, var] : cases) {
        CAPTURE(family_name(d.family()));
        RngStream rng(2024, 1, 2);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += d.sample(rng);
        const double se = std::sqrt(var / n);
        CHECK(std::abs(acc / n - d.mean()) <= 4.0 * se);
    }
}

TEST_CASE("sampling is reproducible for a fixed stream") {
    const auto d = Distribution::erlang(2, 1.5);
    RngStream a(99, 7, 3), b(99, 7, 3);
    for (int i = 0; i < 50; ++i) CHECK(d.sample(a) == d.sample(b));
    RngStream c(99, 8, 3);
    bool all_equal = true;
    RngStream a2(99, 7, 3);
    for (int i = 0; i < 50; ++i) all_equal = all_equal && d.sample(a2) == d.sample(c);
    CHECK_FALSE(all_equal);
}

TEST_CASE("family constraint checks") {
    CHECK(Distribution::exponential(2.0).check().empty());
    CHECK_FALSE(Distribution::exponential(-1.0).check().empty());
    CHECK_FALSE(Distribution::erlang(0, 1.0).check().empty());
    CHECK_FALSE(Distribution::uniform(2.0, 1.0).check().empty());
    CHECK_FALSE(Distribution::hyperexponential({0.5, 0.4}, {1.0, 2.0}).check().empty());
    CHECK(Distribution::hyperexponential({0.5, 0.5}, {1.0, 2.0}).check().empty());
}

TEST_CASE("survival quantile brackets the tail") {
    for (const auto& d : all_families()) {
        const double t = d.survival_quantile(1e-10);
        CHECK(d.survival(t) <= 1e-10 * (1.0 + 1e-6));
        if (d.family() != DistFamily::deterministic && d.family() != DistFamily::uniform)
            CHECK(d.survival(t * 0.5) > 1e-10);
    }
}
