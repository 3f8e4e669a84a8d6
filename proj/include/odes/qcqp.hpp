#ifndef ODES_QCQP_HPP
#define ODES_QCQP_HPP

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "odes/errors.hpp"

namespace odes {

// One quadratic constraint w' Q w <= radius with Q PSD.
struct Ellipsoid {
    Eigen::MatrixXd Q;
    double radius = 1.0;
};

struct QcqpOptions {
    double kkt_tol = 1e-8;
    int max_iterations = 20000;
    double ridge_scale = 1e-12;  // diagonal lift, times trace/n
};

struct QcqpResult {
    Eigen::VectorXd intercepts;        // unconstrained design coefficients
    Eigen::VectorXd weights;           // w
    double objective = 0.0;            // (1/2n) |y - Z a - G w|^2
    std::vector<double> slacks;        // radius_j - w' Q_j w
    std::vector<double> multipliers;   // KKT multipliers, >= 0
    double kkt_residual = 0.0;
    int iterations = 0;
    bool converged = true;             // false when the iteration budget ran out
};

// Minimizes (1/2n) |y - Z a - G w|^2 over (a, w) subject to the ellipsoid
// constraints. a is eliminated analytically; w = 0 is always feasible, so the
// problem is never infeasible. The solver is deterministic: an unconstrained
// attempt first, an exact multiplier root-find when a single constraint is
// active, and accelerated projected gradient with Dykstra projections plus an
// active-set polish otherwise.
QcqpResult qcqp_solve(const Eigen::MatrixXd& G, const Eigen::VectorXd& y,
                      const Eigen::MatrixXd& Z, const std::vector<Ellipsoid>& ellipsoids,
                      const QcqpOptions& opts = {});

// Single-ellipsoid engine with the design-dependent factorizations cached, so
// repeated fits on a fixed design cost O(n^2) each.
class EllipsoidSolver {
  public:
    EllipsoidSolver(Eigen::MatrixXd G, Eigen::MatrixXd Z, Eigen::MatrixXd Q,
                    const QcqpOptions& opts = {});
    ~EllipsoidSolver();
    EllipsoidSolver(EllipsoidSolver&&) noexcept;

    QcqpResult solve(const Eigen::VectorXd& y, double radius) const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace odes

#endif
