#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "mmapq/measures.hpp"

using namespace mmapq;
using namespace mmapq::testing;

namespace {

double poisson_pmf(double mean, int n) {
    double p = std::exp(-mean);
    for (int j = 1; j <= n; ++j) p *= mean / j;
    return p;
}

// derivative of the p0-mixed stationary PGF by Richardson finite differences
double stationary_mean_by_fd(const ValidatedModel& m, Method method) {
    auto pgf = [&](double z) {
        TransformPoint pt = TransformPoint::neutral(m.type_count(), m.resource_dim());
        pt.z1.assign(m.type_count(), cplx(z, 0.0));
        const auto bases = detail::scalar_transform_bases_unchecked(m, pt, method);
        return catastrophe_transform_stationary(m, bases).value[0].real();
    };
    const double h = 1e-3;
    const double d1 = (pgf(1.0 + h) - pgf(1.0 - h)) / (2.0 * h);
    const double d2 = (pgf(1.0 + 0.5 * h) - pgf(1.0 - 0.5 * h)) / h;
    return (4.0 * d2 - d1) / 3.0;
}

}  // namespace

TEST_CASE("pgf_to_pmf") {
    SUBCASE("monomial z^3") {
        const auto pmf = pgf_to_pmf([](cplx z) { return z * z * z; }, 6);
        for (int n = 0; n <= 6; ++n)
            CHECK(pmf.p[n] == doctest::Approx(n == 3 ? 1.0 : 0.0).scale(1.0).epsilon(1e-12));
        CHECK(std::abs(pmf.tail_mass) <= 1e-12);
    }
    SUBCASE("Poisson(1) recovered to 1e-10 for n <= 10") {
        const auto pmf = pgf_to_pmf([](cplx z) { return std::exp(z - 1.0); }, 10);
        for (int n = 0; n <= 10; ++n)
            CHECK(std::abs(pmf.p[n] - poisson_pmf(1.0, n)) <= 1e-10);
    }
    SUBCASE("constant pgf is the point mass at zero") {
        const auto pmf = pgf_to_pmf([](cplx) { return cplx(1.0, 0.0); }, 4);
        CHECK(pmf.p[0] == doctest::Approx(1.0));
        CHECK(pmf.p[1] == doctest::Approx(0.0).scale(1.0));
    }
    SUBCASE("unnormalized pgf is rejected") {
        CHECK_THROWS_AS((void)pgf_to_pmf([](cplx z) { return 1.1 * z; }, 4),
                        NotNormalizedError);
    }
    SUBCASE("tail mass reports the truncated remainder") {
        const auto pmf = pgf_to_pmf([](cplx z) { return std::exp(z - 1.0); }, 1);
        CHECK(pmf.tail_mass ==
              doctest::Approx(1.0 - 2.0 * std::exp(-1.0)).epsilon(1e-9));
    }
}

TEST_CASE("finite differences: second order raw, fourth order after Richardson") {
    auto f = [](double z) { return std::exp(z - 1.0); };  // f'(1) = 1
    auto central = [&](double h) { return (f(1.0 + h) - f(1.0 - h)) / (2.0 * h); };
    const double e1 = std::abs(central(0.1) - 1.0);
    const double e2 = std::abs(central(0.05) - 1.0);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
    auto rich = [&](double h) {
        return (4.0 * central(0.5 * h) - central(h)) / 3.0;
    };
    const double r1 = std::abs(rich(0.2) - 1.0);
    const double r2 = std::abs(rich(0.1) - 1.0);
    CHECK(r1 / r2 == doctest::Approx(16.0).epsilon(0.1));
}

TEST_CASE("transient_queue_means") {
    SUBCASE("empty start: mean is zero at t = 0") {
        const auto m = ValidatedModel::create(
            mm_catastrophe_config(1.0, 1.0, 1.0, 4.0, 1e-3));
        const auto renewal = renewal_matrix(m, m.grid());
        const auto means = transient_queue_means(m, renewal, Method::closed_form);
        CHECK(std::abs(means[0][0]) <= 1e-10);
    }
    SUBCASE("no catastrophes: textbook M|M|infty ramp-up") {
        const auto m = ValidatedModel::create(
            poisson_config(1.0, Distribution::exponential(1.0), 2.0, 1e-3));
        const auto renewal = renewal_matrix(m, m.grid());
        const auto means = transient_queue_means(m, renewal, Method::closed_form);
        const auto idx = m.grid().index_of(1.0);
        CHECK(means[0][idx] == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-6));
    }
    SUBCASE("with catastrophes the mean settles at lambda/(mu+v)") {
        const auto m = ValidatedModel::create(
            mm_catastrophe_config(1.0, 1.0, 1.0, 16.0, 2e-3));
        const auto renewal = renewal_matrix(m, m.grid());
        const auto means = transient_queue_means(m, renewal, Method::closed_form);
        CHECK(means[0].back() == doctest::Approx(0.5).epsilon(1e-4));
    }
    SUBCASE("equals the renewal mixture of per-state no-catastrophe means") {
        const auto m = ValidatedModel::create(sm2_config(12.0, 5e-3));
        const auto renewal = renewal_matrix(m, m.grid());
        const auto route_a = transient_queue_means(m, renewal, Method::closed_form);

        // route B: differentiate each state's base first, then mix
        const double h = 1e-3;
        for (int r = 0; r < m.type_count(); ++r) {
            auto base_at = [&](double z1r) {
                TransformPoint pt = TransformPoint::neutral(2, 1);
                pt.z1[r] = z1r;
                return detail::scalar_transform_bases_unchecked(m, pt,
                                                                Method::closed_form);
            };
            const auto up = base_at(1.0 + h), dn = base_at(1.0 - h);
            const auto up2 = base_at(1.0 + 0.5 * h), dn2 = base_at(1.0 - 0.5 * h);
            std::vector<GridComplexSeq> derived(m.state_count());
            for (int i = 0; i < m.state_count(); ++i) {
                derived[i] = GridComplexSeq(m.grid(), 1);
                for (std::size_t n = 0; n < m.grid().nodes; ++n) {
                    const cplx d1 = (up[i].at(n)[0] - dn[i].at(n)[0]) / (2.0 * h);
                    const cplx d2 = (up2[i].at(n)[0] - dn2[i].at(n)[0]) / h;
                    derived[i].at(n)[0] = (4.0 * d2 - d1) / 3.0;
                }
            }
            const auto route_b = catastrophe_transform_transient(m, derived, renewal, -1);
            for (std::size_t n = 0; n < m.grid().nodes; n += 211)
                CHECK(route_a[r][n] ==
                      doctest::Approx(route_b.at(n)[0].real()).epsilon(1e-6).scale(1.0));
        }
    }
}

TEST_CASE("stationary_kpis: catastrophe M|M|infty closed forms") {
    const auto m = ValidatedModel::create(
        mm_catastrophe_config(2.0, 1.0, 0.5, 48.0, 2e-3));
    const auto kpis = stationary_kpis(m);
    // lambda/(mu+v) = 4/3 for both the time-stationary mean and the
    // per-catastrophe destroyed mean (memoryless sojourns)
    CHECK(kpis.mean_queue_total == doctest::Approx(4.0 / 3.0).epsilon(1e-6));
    CHECK(kpis.loss_per_catastrophe_total == doctest::Approx(4.0 / 3.0).epsilon(1e-6));
    // destroyed per unit time = per-catastrophe / mean cycle
    CHECK(kpis.loss_rate_total == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
    // arrival resources are exponential(2): delta = 0.5 * L_q
    CHECK(kpis.resource_mean_total[0] == doctest::Approx(0.5 * 4.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("deterministic unit resources make delta equal the mean queue") {
    auto cfg = mm_catastrophe_config(2.0, 1.0, 0.5, 48.0, 2e-3);
    cfg.service_resources.arrival_resource[0][0] = Distribution::deterministic(1.0);
    const auto m = ValidatedModel::create(cfg);
    const auto kpis = stationary_kpis(m);
    CHECK(kpis.resource_mean[0][0] ==
          doctest::Approx(kpis.mean_queue[0]).epsilon(1e-12));
}

TEST_CASE("stationary mean agrees with the derivative of the stationary PGF") {
    const auto m = ValidatedModel::create(
        mm_catastrophe_config(2.0, 1.0, 0.5, 48.0, 2e-3));
    const auto kpis = stationary_kpis(m);
    CHECK(kpis.mean_queue_total ==
          doctest::Approx(stationary_mean_by_fd(m, Method::closed_form)).epsilon(1e-5));
}

TEST_CASE("multi-state KPIs stay consistent with the PGF derivative") {
    auto cfg = sm2_config(30.0, 2e-3);
    const auto m = ValidatedModel::create(cfg);
    const auto kpis = stationary_kpis(m);
    CHECK(kpis.mean_queue_total ==
          doctest::Approx(stationary_mean_by_fd(m, Method::closed_form))
              .epsilon(1e-4));
    CHECK(kpis.mean_queue_total ==
          doctest::Approx(kpis.mean_queue[0] + kpis.mean_queue[1]).epsilon(1e-12));
}

TEST_CASE("stationary PMF: nonnegative, normalized, mean matches L_q") {
    const auto m = ValidatedModel::create(
        mm_catastrophe_config(2.0, 1.0, 0.5, 48.0, 2e-3));
    const auto report = build_report(m, Method::closed_form, true);
    const Pmf& pmf = *report.queue_pmf;
    double total = 0.0;
    for (double p : pmf.p) {
        CHECK(p >= 0.0);
        total += p;
    }
    CHECK(total + pmf.tail_mass == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(pmf.mean() ==
          doctest::Approx(report.kpis.mean_queue_total).epsilon(1e-4));
}

TEST_CASE("mgi_special_case") {
    SUBCASE("M|G|infty transient PGF matches the known closed form") {
        const auto m = ValidatedModel::create(
            poisson_config(1.0, Distribution::exponential(1.0), 2.0, 1e-4));
        const MgiSpecialCase mgi(m);
        const CplxVec z{0.0};
        CHECK(mgi.transient_pgf(z, 1.0, 0).real() ==
              doctest::Approx(std::exp(-(1.0 - std::exp(-1.0)))).epsilon(1e-8));
        const CplxVec one{1.0};
        CHECK(mgi.transient_pgf(one, 1.7, 0).real() == doctest::Approx(1.0));
    }
    SUBCASE("pipeline equality on the 2-type batch model") {
        const auto m = ValidatedModel::create(batch_poisson_config(1.0, 3.0, 1e-3));
        const MgiSpecialCase mgi(m);
        std::mt19937_64 gen(7);
        std::uniform_real_distribution<double> uz(0.0, 1.0);
        for (int trial = 0; trial < 20; ++trial) {
            const CplxVec z{uz(gen), uz(gen)};
            const double t = m.grid().time(1 + gen() % (m.grid().nodes - 1));
            TransformPoint pt = TransformPoint::neutral(2, 1);
            pt.z1 = z;
            const Eigen::MatrixXcd generic =
                transient_transform(m, 0, pt, t, Method::closed_form);
            CHECK(std::abs(mgi.transient_pgf(z, t, 0) - generic(0, 0)) <= 1e-8);
        }
    }
    SUBCASE("catastrophe pipelines coincide for the degenerate MMAP") {
        auto cfg = batch_poisson_config(1.0, 30.0, 2e-3);
        cfg.environment.kernel = {{0, 0, 1.0, Distribution::exponential(1.0)}};
        const auto m = ValidatedModel::create(cfg);
        const MgiSpecialCase mgi(m);
        const CplxVec z{0.5, 0.8};
        TransformPoint pt = TransformPoint::neutral(2, 1);
        pt.z1 = z;
        const auto bases = scalar_transform_bases(m, pt, Method::closed_form);
        const auto generic = catastrophe_transform_stationary(m, bases);
        CHECK(std::abs(mgi.stationary_pgf(z) - generic.value[0]) <= 1e-8);

        const auto renewal = renewal_matrix(m, m.grid());
        const auto mixed = catastrophe_transform_transient(m, bases, renewal, -1);
        const double t = 8.0;
        CHECK(std::abs(mgi.catastrophe_pgf(z, t, renewal) -
                       mixed.at(m.grid().index_of(t))[0]) <= 1e-8);
    }
    SUBCASE("loss measures reproduce the generic KPI path") {
        auto cfg = poisson_config(2.0, Distribution::exponential(1.0), 48.0, 2e-3);
        cfg.environment.kernel = {{0, 0, 1.0, Distribution::exponential(0.5)}};
        const auto m = ValidatedModel::create(cfg);
        const MgiSpecialCase mgi(m);
        CHECK(mgi.loss_per_catastrophe_total() == doctest::Approx(4.0 / 3.0).epsilon(1e-6));
        CHECK(mgi.loss_rate_total() == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
    }
    SUBCASE("non-degenerate MMAPs are rejected") {
        const auto m = ValidatedModel::create(
            map2_config(Distribution::exponential(1.0), 2.0, 0.01));
        CHECK_THROWS_AS(MgiSpecialCase{m}, NotDegenerateError);
    }
}
