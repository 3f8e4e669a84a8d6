#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "odes/deriv.hpp"
#include "odes/kernels.hpp"
#include "odes/rng.hpp"
#include "test_support.hpp"

using namespace odes;

TEST_CASE("kernel_entry closed forms") {
    CHECK(kernel_entry(0, 0.3, 0.7) == doctest::Approx(0.3));
    CHECK(kernel_entry(1, 1.0, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(kernel_entry(1, 0.5, 1.0) == doctest::Approx(5.0 / 48.0).epsilon(1e-14));
    CHECK(kernel_entry(2, 0.0, 0.9) == 0.0);
    CHECK_THROWS_AS(kernel_entry(1, -0.1, 0.5), DomainError);
    CHECK_THROWS_AS(kernel_entry(1, 0.1, 1.5), DomainError);
}

TEST_CASE("Gauss-Legendre kernel values match slow midpoint quadrature") {
    CounterRng rng(11);
    for (int k = 1; k <= 6; ++k) {
        const double kfact = factorial(k);
        for (int trial = 0; trial < 17; ++trial) {
            const double x = rng.uniform();
            const double x2 = rng.uniform();
            const double slow = testsupport::midpoint_quadrature(
                                    [&](double t) {
                                        const double u = std::max(x - t, 0.0);
                                        const double v = std::max(x2 - t, 0.0);
                                        return std::pow(u, k) * std::pow(v, k);
                                    },
                                    0.0, 1.0, 100000) /
                                (kfact * kfact);
            CHECK(kernel_entry(k, x, x2) == doctest::Approx(slow).epsilon(1e-9));
        }
    }
}

TEST_CASE("build_kernel shapes and PSD") {
    const auto single = build_kernel(2, {0.4});
    CHECK(single.matrix.rows() == 1);
    CHECK(single.matrix(0, 0) == doctest::Approx(kernel_entry(2, 0.4, 0.4)));

    const auto min_kernel = build_kernel(0, {0.25, 0.5, 1.0});
    CHECK(min_kernel.matrix(0, 0) == doctest::Approx(0.25));
    CHECK(min_kernel.matrix(0, 1) == doctest::Approx(0.25));
    CHECK(min_kernel.matrix(0, 2) == doctest::Approx(0.25));
    CHECK(min_kernel.matrix(1, 1) == doctest::Approx(0.5));
    CHECK(min_kernel.matrix(1, 2) == doctest::Approx(0.5));
    CHECK(min_kernel.matrix(2, 2) == doctest::Approx(1.0));
    CHECK((min_kernel.matrix - min_kernel.matrix.transpose()).norm() == 0.0);

    const auto k1 = build_kernel(1, testsupport::linspace(0.0, 1.0, 32));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k1.matrix);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
}
