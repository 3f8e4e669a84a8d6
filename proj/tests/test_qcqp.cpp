#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "odes/qcqp.hpp"
#include "odes/rng.hpp"

using namespace odes;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_psd(int n, CounterRng& rng, double scale = 1.0) {
    MatrixXd B(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) B(i, j) = rng.gaussian();
    return scale * (B.transpose() * B) / n;
}

VectorXd random_vec(int n, CounterRng& rng) {
    VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.gaussian();
    return v;
}

// the ridge-free least squares solution through the normal equations,
// with the intercept block appended
VectorXd normal_equations(const MatrixXd& G, const VectorXd& y, const MatrixXd& Z) {
    const int n = static_cast<int>(G.rows());
    MatrixXd X(n, Z.cols() + G.cols());
    X << Z, G;
    return (X.transpose() * X).ldlt().solve(X.transpose() * y);
}

}  // namespace

TEST_CASE("unconstrained case agrees with the normal equations") {
    CounterRng rng(101);
    for (int trial = 0; trial < 5; ++trial) {
        // tall design so the least squares solution is unique
        const int n = 24, m = 10;
        MatrixXd G(n, m);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) G(i, j) = rng.gaussian();
        MatrixXd Z = MatrixXd::Ones(n, 1);
        VectorXd y = random_vec(n, rng);

        std::vector<Ellipsoid> ells{{MatrixXd::Identity(m, m), 1e12}};
        const QcqpResult res = qcqp_solve(G, y, Z, ells);
        const VectorXd direct = normal_equations(G, y, Z);

        CHECK(res.slacks[0] > 0.0);
        CHECK(res.kkt_residual <= 1e-6);
        CHECK(res.intercepts[0] == doctest::Approx(direct[0]).epsilon(1e-8));
        for (int i = 0; i < m; ++i)
            CHECK(res.weights[i] == doctest::Approx(direct[i + 1]).epsilon(1e-7));
    }
}

TEST_CASE("radius zero with a definite matrix forces zero weights") {
    const int n = 6;
    CounterRng rng(7);
    MatrixXd G = MatrixXd::Identity(n, n);
    VectorXd y = random_vec(n, rng);
    std::vector<Ellipsoid> ells{{MatrixXd::Identity(n, n), 0.0}};
    const QcqpResult res = qcqp_solve(G, y, VectorXd{}.asDiagonal() * MatrixXd::Zero(n, 0), ells);
    CHECK(res.weights.norm() == 0.0);
}

TEST_CASE("two-dimensional projection toy") {
    MatrixXd G = MatrixXd::Identity(2, 2);
    VectorXd y(2);
    y << 2.0, 0.0;
    std::vector<Ellipsoid> ells{{MatrixXd::Identity(2, 2), 1.0}};
    const QcqpResult res = qcqp_solve(G, y, MatrixXd::Zero(2, 0), ells);
    CHECK(res.weights[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(res.weights[1] == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(res.kkt_residual <= 1e-6);
}

TEST_CASE("randomized instances satisfy the KKT conditions") {
    CounterRng rng(2024);
    for (int trial = 0; trial < 12; ++trial) {
        const int n = 8 + static_cast<int>(rng.uniform() * 24);
        const int J = 2 + static_cast<int>(rng.uniform() * 4);
        MatrixXd G = random_psd(n, rng) + 0.1 * MatrixXd::Identity(n, n);
        MatrixXd Z = MatrixXd::Ones(n, 1);
        VectorXd y = 3.0 * random_vec(n, rng);

        std::vector<Ellipsoid> ells;
        for (int j = 0; j < J; ++j) {
            const double radius = (j == 0) ? 0.05 + 0.2 * rng.uniform()
                                           : 0.5 + 5.0 * rng.uniform();
            ells.push_back({random_psd(n, rng) + 1e-6 * MatrixXd::Identity(n, n), radius});
        }
        const QcqpResult res = qcqp_solve(G, y, Z, ells);
        for (double s : res.slacks) CHECK(s >= -1e-8);
        CHECK(res.kkt_residual <= 1e-6);
        for (double m : res.multipliers) CHECK(m >= 0.0);
    }
}

TEST_CASE("identical inputs give bit-identical output") {
    CounterRng rng(5);
    const int n = 16;
    MatrixXd G = random_psd(n, rng) + MatrixXd::Identity(n, n);
    VectorXd y = random_vec(n, rng);
    MatrixXd Z = MatrixXd::Ones(n, 1);
    std::vector<Ellipsoid> ells{{random_psd(n, rng), 0.01},
                                {random_psd(n, rng), 0.02}};
    const QcqpResult a = qcqp_solve(G, y, Z, ells);
    const QcqpResult b = qcqp_solve(G, y, Z, ells);
    CHECK(a.weights == b.weights);
    CHECK(a.intercepts == b.intercepts);
    CHECK(a.objective == b.objective);
}

TEST_CASE("cached single-ellipsoid solver matches the general path") {
    CounterRng rng(41);
    const int n = 20;
    MatrixXd K = random_psd(n, rng) + 0.5 * MatrixXd::Identity(n, n);
    MatrixXd G = K / std::sqrt(static_cast<double>(n));
    MatrixXd Z(n, 2);
    for (int i = 0; i < n; ++i) {
        Z(i, 0) = 1.0;
        Z(i, 1) = i / static_cast<double>(n);
    }
    MatrixXd Q = K / n;

    EllipsoidSolver cached(G, Z, Q);
    for (int trial = 0; trial < 4; ++trial) {
        VectorXd y = random_vec(n, rng);
        const double radius = 0.05 + trial * 0.3;
        const QcqpResult a = cached.solve(y, radius);
        const QcqpResult b = qcqp_solve(G, y, Z, {{Q, radius}});
        CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-10));
        CHECK((a.weights - b.weights).norm() <= 1e-7 * (1.0 + b.weights.norm()));
        CHECK(a.kkt_residual <= 1e-7);
        CHECK(b.kkt_residual <= 1e-7);
    }
}
