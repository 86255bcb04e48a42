#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "mmapq/transient.hpp"

using namespace mmapq;
using namespace mmapq::testing;

namespace {

TransformPoint busy_point(const ValidatedModel& m, cplx z1, double s1 = 0.0) {
    TransformPoint pt = TransformPoint::neutral(m.type_count(), m.resource_dim());
    pt.z1.assign(m.type_count(), z1);
    pt.s1.assign(m.resource_dim(), s1);
    return pt;
}

// M|G|infty closed form: exp(lambda (z-1) int_0^t (1-B))
double mg_inf_oracle(double lambda, double z, const Distribution& service, double t) {
    return std::exp(lambda * (z - 1.0) * service.integrated_survival(t));
}

}  // namespace

TEST_CASE("service_kernel") {
    SUBCASE("neutral point restores D - D0") {
        const auto m = ValidatedModel::create(
            map2_config(Distribution::exponential(1.0), 2.0, 0.01));
        const auto pt = TransformPoint::neutral(1, 1);
        const Eigen::MatrixXcd S = service_kernel(m, 0, pt, 1.3);
        CHECK(((S.real() + m.D0(0)) - m.D(0)).cwiseAbs().maxCoeff() <= 1e-12);
    }
    SUBCASE("t = 0 collapses the bracket onto the in-service mark") {
        const auto m = ValidatedModel::create(
            poisson_config(2.0, Distribution::exponential(1.0), 2.0, 0.01));
        TransformPoint pt = busy_point(m, 0.25, 0.7);
        pt.z2.assign(1, cplx(0.4, 0.1));  // must not matter at t = 0
        const double fr = m.arrival_lst(0, 0, pt.s1);
        CHECK(service_kernel(m, 0, pt, 0.0)(0, 0).real() ==
              doctest::Approx(2.0 * 0.25 * fr).epsilon(1e-14));
    }
    SUBCASE("scalar bracket arithmetic at t = 1") {
        const auto m = ValidatedModel::create(
            poisson_config(2.0, Distribution::exponential(1.0), 2.0, 0.01));
        const auto pt = busy_point(m, 0.0);
        CHECK(service_kernel(m, 0, pt, 1.0)(0, 0).real() ==
              doctest::Approx(2.0 * (1.0 - std::exp(-1.0))).epsilon(1e-12));
    }
    SUBCASE("negative s is rejected") {
        const auto m = ValidatedModel::create(
            poisson_config(2.0, Distribution::exponential(1.0), 2.0, 0.01));
        CHECK_THROWS_AS((void)service_kernel(m, 0, busy_point(m, 0.5, -0.1), 1.0),
                        DomainError);
    }
}

TEST_CASE("transient_transform: neutral point equals exp(D t) and is row-stochastic") {
    const auto m =
        ValidatedModel::create(map2_config(Distribution::erlang(2, 2.0), 2.0, 0.001));
    const auto pt = TransformPoint::neutral(1, 1);
    for (Method method : {Method::closed_form, Method::ode}) {
        const Eigen::MatrixXcd A = transient_transform(m, 0, pt, 1.5, method);
        const Eigen::MatrixXcd expected = matrix_exp((m.D(0) * 1.5).cast<cplx>());
        CHECK((A - expected).cwiseAbs().maxCoeff() <= 1e-8);
        for (int i = 0; i < 2; ++i) CHECK(std::abs(A.row(i).sum() - 1.0) <= 1e-8);
    }
}

TEST_CASE("transient_transform: M|M|infty closed form") {
    const auto m = ValidatedModel::create(
        poisson_config(1.0, Distribution::exponential(1.0), 2.0, 1e-4));
    const auto pt = busy_point(m, 0.0);
    for (Method method : {Method::closed_form, Method::ode}) {
        CHECK(transient_transform(m, 0, pt, 1.0, method)(0, 0).real() ==
              doctest::Approx(std::exp(-(1.0 - std::exp(-1.0)))).epsilon(1e-8));
    }
}

TEST_CASE("transient_transform: t = 0 is the identity") {
    const auto m =
        ValidatedModel::create(map2_config(Distribution::exponential(1.0), 2.0, 0.01));
    const auto pt = busy_point(m, 0.3, 0.5);
    for (Method method : {Method::closed_form, Method::ode}) {
        const Eigen::MatrixXcd A = transient_transform(m, 0, pt, 0.0, method);
        CHECK((A - Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("M|G|infty closed form across service families") {
    // exponential, Erlang and deterministic service at a fine grid
    const double lambda = 1.3;
    for (const auto& service :
         {Distribution::exponential(0.8), Distribution::erlang(2, 2.0),
          Distribution::deterministic(0.75)}) {
        CAPTURE(family_name(service.family()));
        const auto m = ValidatedModel::create(poisson_config(lambda, service, 2.5, 1e-4));
        for (double z : {0.0, 0.35, 0.8}) {
            for (double t : {0.5, 1.0, 2.5}) {
                const auto got =
                    transient_transform(m, 0, busy_point(m, z), t, Method::closed_form);
                CHECK(got(0, 0).real() ==
                      doctest::Approx(mg_inf_oracle(lambda, z, service, t)).epsilon(1e-8));
                CHECK(std::abs(got(0, 0).imag()) <= 1e-12);
            }
        }
    }
}

TEST_CASE("deterministic service epochs must sit on the grid") {
    const auto m = ValidatedModel::create(
        poisson_config(1.0, Distribution::deterministic(0.755), 2.0, 0.01));
    CHECK_THROWS_AS(
        (void)transient_transform(m, 0, busy_point(m, 0.5), 1.0, Method::closed_form),
        GridError);
}

TEST_CASE("ode and closed-form agree within 1e-8 for single-phase models") {
    const auto m = ValidatedModel::create(
        poisson_config(1.5, Distribution::erlang(2, 1.5), 2.0, 1e-4));
    const auto pt = busy_point(m, 0.4, 0.6);
    for (double t : {0.5, 2.0}) {
        const auto a = transient_transform(m, 0, pt, t, Method::closed_form);
        const auto b = transient_transform(m, 0, pt, t, Method::ode);
        CHECK(std::abs(a(0, 0) - b(0, 0)) <= 1e-8);
    }
}

TEST_CASE("busy_servers_transform") {
    SUBCASE("z1 = 1, s1 = 0 is row-stochastic exp(D t)") {
        const auto m = ValidatedModel::create(
            map2_config(Distribution::exponential(1.0), 2.0, 0.001));
        const CplxVec z1{1.0};
        const std::vector<double> s1{0.0};
        const Eigen::MatrixXcd P = busy_servers_transform(m, 0, z1, s1, 1.0);
        for (int i = 0; i < 2; ++i) CHECK(std::abs(P.row(i).sum() - 1.0) <= 1e-8);
    }
    SUBCASE("stationary empty probability of M|M|infty") {
        const auto m = ValidatedModel::create(
            poisson_config(1.0, Distribution::exponential(1.0), 20.0, 0.01));
        const CplxVec z1{0.0};
        const std::vector<double> s1{0.0};
        CHECK(busy_servers_transform(m, 0, z1, s1, 20.0)(0, 0).real() ==
              doctest::Approx(std::exp(-1.0)).epsilon(1e-4));
    }
    SUBCASE("huge s1 suppresses resource-marked customers like z1 -> 0") {
        const auto m = ValidatedModel::create(
            poisson_config(1.0, Distribution::exponential(1.0), 2.0, 0.001));
        const CplxVec z{0.7};
        const CplxVec z0{0.0};
        const std::vector<double> s_large{1e6};
        const std::vector<double> s0{0.0};
        const double with_s =
            busy_servers_transform(m, 0, z, s_large, 1.5)(0, 0).real();
        const double zeroed = busy_servers_transform(m, 0, z0, s0, 1.5)(0, 0).real();
        CHECK(with_s == doctest::Approx(zeroed).epsilon(1e-4));
    }
    SUBCASE("marginalization equals the full transform bit for bit") {
        const auto m = ValidatedModel::create(
            map2_config(Distribution::erlang(2, 2.0), 2.0, 0.01));
        const CplxVec z1{cplx(0.4, 0.2)};
        const std::vector<double> s1{0.8};
        TransformPoint pt = TransformPoint::neutral(1, 1);
        pt.z1 = z1;
        pt.s1 = s1;
        const Eigen::MatrixXcd a = busy_servers_transform(m, 0, z1, s1, 1.0);
        const Eigen::MatrixXcd b = transient_transform(m, 0, pt, 1.0, Method::closed_form);
        CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("served_transform") {
    const auto m = ValidatedModel::create(
        poisson_config(1.0, Distribution::exponential(1.0), 2.0, 1e-4));
    const CplxVec z2_one{1.0};
    const CplxVec z2_zero{0.0};
    const std::vector<double> s2{0.0};
    SUBCASE("z2 = 1 is exp(D t)") {
        CHECK(served_transform(m, 0, z2_one, s2, 1.0)(0, 0).real() ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("t = 0: nothing served") {
        CHECK(served_transform(m, 0, z2_zero, s2, 0.0)(0, 0).real() == 1.0);
    }
    SUBCASE("probability of zero served by t = 1") {
        CHECK(served_transform(m, 0, z2_zero, s2, 1.0)(0, 0).real() ==
              doctest::Approx(std::exp(-std::exp(-1.0))).epsilon(1e-8));
    }
}

TEST_CASE("monotone in the resource LST arguments") {
    const auto m = ValidatedModel::create(
        map2_config(Distribution::erlang(2, 2.0), 2.0, 0.001));
    double prev00 = 2.0;
    for (double s : {0.0, 0.5, 1.0, 2.0, 5.0}) {
        TransformPoint pt = busy_point(m, 0.8, s);
        pt.s2.assign(1, s);
        const Eigen::MatrixXcd A = transient_transform(m, 0, pt, 1.5, Method::ode);
        CHECK(A(0, 0).real() <= prev00 + 1e-12);
        prev00 = A(0, 0).real();
    }
}

TEST_CASE("initial_customers_transform") {
    const auto m = ValidatedModel::create(
        poisson_config(1.0, Distribution::uniform(0.0, 2.0), 2.0, 0.01));
    TransformPoint pt = TransformPoint::neutral(1, 1);
    pt.z2.assign(1, cplx(0.0, 0.0));
    SUBCASE("h0 = 0 equals the plain transform") {
        const std::vector<int> h0{0};
        const auto a = initial_customers_transform(m, 0, pt, 1.0, h0);
        const auto b = transient_transform(m, 0, pt, 1.0, Method::closed_form);
        CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("neutral point ignores initial customers") {
        const std::vector<int> h0{5};
        const auto pt1 = TransformPoint::neutral(1, 1);
        CHECK(initial_customers_transform(m, 0, pt1, 1.0, h0)(0, 0).real() ==
              doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("prefactor (1-B)^3 at B = 1/2") {
        // uniform(0,2) service: B(1) = 0.5; z2 = 0 kills served marks
        const std::vector<int> h0{3};
        const auto with_h0 = initial_customers_transform(m, 0, pt, 1.0, h0);
        const auto base = transient_transform(m, 0, pt, 1.0, Method::closed_form);
        CHECK(with_h0(0, 0).real() ==
              doctest::Approx(0.125 * base(0, 0).real()).epsilon(1e-12));
    }
}

TEST_CASE("renewal_input_transform") {
    const auto m = ValidatedModel::create(
        poisson_config(1.3, Distribution::exponential(0.9), 2.0, 0.002));
    BatchLaw law;
    law.entries = {{{1}, 1.0}};
    const Distribution expA = Distribution::exponential(1.3);
    SUBCASE("neutral point solves the renewal identity") {
        const auto pt = TransformPoint::neutral(1, 1);
        for (double t : {0.5, 1.0, 2.0})
            CHECK(renewal_input_transform(m, 0, law, expA, pt, t).real() ==
                  doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("t = 0 is 1") {
        CHECK(renewal_input_transform(m, 0, law, expA, busy_point(m, 0.2), 0.0) ==
              cplx(1.0, 0.0));
    }
    SUBCASE("exponential interarrivals reproduce the Poisson model") {
        const auto pt = busy_point(m, 0.25);
        for (double t : {1.0, 2.0}) {
            const double markov =
                transient_transform(m, 0, pt, t, Method::closed_form)(0, 0).real();
            const double renewal = renewal_input_transform(m, 0, law, expA, pt, t).real();
            // both paths are second order on the shared grid
            CHECK(renewal == doctest::Approx(markov).epsilon(5e-5));
        }
    }
    SUBCASE("halving the step quarters the gap to the exact value") {
        const double z = 0.25, t = 2.0;
        const double exact = mg_inf_oracle(1.3, z, Distribution::exponential(0.9), t);
        double gap[2];
        int idx = 0;
        for (double step : {0.002, 0.001}) {
            const auto mm = ValidatedModel::create(
                poisson_config(1.3, Distribution::exponential(0.9), 2.0, step));
            gap[idx++] = std::abs(
                renewal_input_transform(mm, 0, law, expA, busy_point(mm, z), t).real() -
                exact);
        }
        CHECK(gap[0] / gap[1] > 3.0);
        CHECK(gap[0] / gap[1] < 6.0);
    }
    SUBCASE("batch law must sum to one") {
        BatchLaw bad;
        bad.entries = {{{1}, 0.7}};
        CHECK_THROWS_AS(
            (void)renewal_input_transform(m, 0, bad, expA, busy_point(m, 0.5), 1.0),
            NonProbabilityError);
    }
}

TEST_CASE("batch_service_pgf") {
    SUBCASE("z = 1 is row-stochastic exp(D t)") {
        const auto m = ValidatedModel::create(
            map2_config(Distribution::exponential(1.0), 2.0, 0.001));
        const auto P = batch_service_pgf(m, 0, Distribution::exponential(1.0), 1.0, 1.5,
                                         BatchServiceMode::whole_batch);
        for (int i = 0; i < 2; ++i) CHECK(std::abs(P.row(i).sum() - 1.0) <= 1e-9);
    }
    SUBCASE("t = 0 is the identity") {
        const auto m = ValidatedModel::create(
            poisson_config(2.0, Distribution::exponential(1.0), 2.0, 0.01));
        const auto P = batch_service_pgf(m, 0, Distribution::exponential(1.0), 0.3, 0.0,
                                         BatchServiceMode::same_batch_service);
        CHECK(P(0, 0) == cplx(1.0, 0.0));
    }
    SUBCASE("scalar Poisson whole-batch closed form") {
        const auto m = ValidatedModel::create(
            poisson_config(2.0, Distribution::exponential(1.0), 2.0, 1e-4));
        CHECK(batch_service_pgf(m, 0, Distribution::exponential(1.0), 0.0, 1.0,
                                BatchServiceMode::whole_batch)(0, 0)
                  .real() ==
              doctest::Approx(std::exp(-2.0 * (1.0 - std::exp(-1.0)))).epsilon(1e-8));
    }
    SUBCASE("modes coincide for single-customer batches") {
        const auto m = ValidatedModel::create(
            map2_config(Distribution::erlang(2, 2.0), 2.0, 0.01));
        const auto a = batch_service_pgf(m, 0, Distribution::erlang(2, 2.0), 0.4, 1.0,
                                         BatchServiceMode::whole_batch);
        const auto b = batch_service_pgf(m, 0, Distribution::erlang(2, 2.0), 0.4, 1.0,
                                         BatchServiceMode::same_batch_service);
        CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-14);
    }
    SUBCASE("pair batches square the bracket") {
        // one batch (2): same-batch kernel uses (B + z(1-B))^2
        auto cfg = poisson_config(3.0, Distribution::exponential(1.0), 2.0, 1e-4);
        cfg.mmap.batch_labels = {{2}};
        const auto m = ValidatedModel::create(cfg);
        const double z = 0.5;
        const auto got = batch_service_pgf(m, 0, Distribution::exponential(1.0), z, 1.0,
                                           BatchServiceMode::same_batch_service);
        // scalar oracle by quadrature of the explicit integrand
        const std::size_t cells = 200000;
        double acc = 0.0;
        for (std::size_t i = 0; i < cells; ++i) {
            auto f = [&](double u) {
                const double B = 1.0 - std::exp(-u);
                return -3.0 + 3.0 * std::pow(B + z * (1.0 - B), 2);
            };
            acc += 0.5 * (1.0 / cells) * (f(i * 1.0 / cells) + f((i + 1) * 1.0 / cells));
        }
        CHECK(got(0, 0).real() == doctest::Approx(std::exp(acc)).epsilon(1e-7));
    }
}
