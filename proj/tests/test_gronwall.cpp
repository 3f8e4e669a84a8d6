#include <doctest.h>

#include <cmath>

#include "odes/gronwall.hpp"
#include "odes/rng.hpp"
#include "test_support.hpp"

using namespace odes;

namespace {

OdePair linear_pair() {
    OdePair p;
    p.m = 1;
    p.f = [](double, const std::vector<double>& y) { return y[0]; };
    p.g = p.f;
    p.y0 = {1.0};
    p.z0 = {0.9};
    p.L = 1.0;
    p.phi = [](double) { return 0.0; };
    p.a = 1.0;
    p.b = 3.0;
    p.C0 = 1.0;
    return p;
}

}  // namespace

TEST_CASE("gronwall_bound closed forms") {
    OdePair p = linear_pair();
    p.sup_rhs = 1.0;  // skip the estimation pass for the pure formula checks
    CHECK(gronwall_bound(p, 1.0, 1) == doctest::Approx(0.1 * std::exp(1.0)).epsilon(1e-12));

    OdePair same = p;
    same.z0 = {1.0};
    CHECK(gronwall_bound(same, 0.7, 1) == 0.0);

    OdePair drift = p;
    drift.L = 0.0;
    drift.z0 = {1.0};
    drift.phi = [](double) { return 0.1; };
    CHECK(gronwall_bound(drift, 1.0, 1) == doctest::Approx(0.1).epsilon(1e-9));

    CHECK_THROWS_AS(gronwall_bound(p, 4.0, 1), DomainExceeded);
}

TEST_CASE("gronwall_bound monotonicity") {
    OdePair p = linear_pair();
    p.sup_rhs = 1.0;
    p.phi = [](double x) { return 0.05 * (1.0 + x); };

    double prev = -1.0;
    for (double x : testsupport::linspace(0.0, 1.0, 9)) {
        const double b = gronwall_bound(p, x, 1);
        CHECK(b >= prev);
        prev = b;
    }

    OdePair wider = p;
    wider.z0 = {0.8};  // larger initial gap
    CHECK(gronwall_bound(wider, 0.5, 1) >= gronwall_bound(p, 0.5, 1));

    OdePair louder = p;
    louder.phi = [](double x) { return 0.06 * (1.0 + x); };
    CHECK(gronwall_bound(louder, 0.5, 1) >= gronwall_bound(p, 0.5, 1));
}

TEST_CASE("the linear pair attains the bound exactly") {
    const auto grid = testsupport::linspace(0.0, 1.0, 101);
    const ViolationReport rep = verify_pair(linear_pair(), grid, 1);
    CHECK(rep.max_ratio == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("identical systems report the zero-over-zero convention") {
    OdePair p = linear_pair();
    p.z0 = {1.0};
    const auto rep = verify_pair(p, testsupport::linspace(0.0, 1.0, 21), 1);
    CHECK(rep.max_ratio == 0.0);
    CHECK(rep.zero_over_zero);
}

TEST_CASE("perturbed sine pair stays below its bound") {
    OdePair p;
    p.m = 1;
    p.f = [](double, const std::vector<double>& y) { return std::sin(y[0]); };
    p.g = [](double x, const std::vector<double>& y) {
        return std::sin(y[0]) + 0.05 * std::cos(x);
    };
    p.y0 = {0.5};
    p.z0 = {0.5};
    p.L = 1.0;
    p.phi = [](double) { return 0.05; };
    p.a = 1.0;
    p.b = 3.0;
    p.C0 = 1.0;
    const auto rep = verify_pair(p, testsupport::linspace(0.0, 1.0, 101), 1);
    CHECK(rep.max_ratio <= 1.0 + 1e-8);
}

TEST_CASE("the order-2 bound dominates the order-1 bound on m = 1 inputs") {
    OdePair p = linear_pair();
    p.sup_rhs = 1.0;
    p.phi = [](double) { return 0.02; };
    for (double x : {0.2, 0.5, 0.9})
        CHECK(gronwall_bound(p, x, 2) >= gronwall_bound(p, x, 1));
}

TEST_CASE("companion systems: second order pair") {
    OdePair p;
    p.m = 2;
    // y'' = -y vs z'' = -z + 0.03 cos(x)
    p.f = [](double, const std::vector<double>& w) { return -w[0]; };
    p.g = [](double x, const std::vector<double>& w) { return -w[0] + 0.03 * std::cos(x); };
    p.y0 = {1.0, 0.0};
    p.z0 = {1.0, 0.05};
    p.L = 1.0;
    p.phi = [](double) { return 0.03; };
    p.a = 1.0;
    p.b = 4.0;
    p.C0 = 1.5;
    const auto rep = verify_pair(p, testsupport::linspace(0.0, 1.0, 51), 2);
    CHECK(rep.max_ratio <= 1.0 + 1e-6);
    CHECK(rep.k >= 0);
    CHECK(rep.k <= 1);
}

TEST_CASE("randomized perturbed pairs satisfy the inequality") {
    CounterRng rng(314);
    for (int trial = 0; trial < 20; ++trial) {
        const double amp = 0.3 + 0.7 * rng.uniform();
        const double phase = rng.uniform();
        const double eps = 0.01 + 0.05 * rng.uniform();
        const double freq = 1.0 + 2.0 * rng.uniform();
        OdePair p;
        p.m = 1;
        p.f = [amp, phase](double, const std::vector<double>& y) {
            return amp * std::sin(y[0] + phase);
        };
        p.g = [amp, phase, eps, freq](double x, const std::vector<double>& y) {
            return amp * std::sin(y[0] + phase) + eps * std::cos(freq * x);
        };
        p.y0 = {2.0 * rng.uniform() - 1.0};
        p.z0 = {2.0 * rng.uniform() - 1.0};
        p.L = amp;
        p.phi = [eps](double) { return eps; };
        p.a = 1.0;
        p.b = 3.0;
        p.C0 = 1.0;
        const auto rep = verify_pair(p, testsupport::linspace(0.0, 1.0, 51), 1);
        CHECK(rep.max_ratio <= 1.0 + 1e-6);
    }
}
