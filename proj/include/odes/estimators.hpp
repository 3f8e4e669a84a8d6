#ifndef ODES_ESTIMATORS_HPP
#define ODES_ESTIMATORS_HPP

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "odes/deriv.hpp"
#include "odes/kernels.hpp"
#include "odes/qcqp.hpp"

namespace odes {

// Noisy observations Y_i = y(x_i) + eps_i on a strictly ascending design.
struct DesignSample {
    std::vector<double> xs;
    std::vector<double> ys;
    double sigma = 1.0;

    void validate() const;
    int n() const { return static_cast<int>(xs.size()); }
};

enum class FitKind { ConstrainedKRR, SplineKRR, NLS, Picard };

std::string to_string(FitKind k);

struct FitDiagnostics {
    double objective = 0.0;              // (1/2n) residual sum of squares
    std::vector<double> constraint_slacks;
    std::vector<double> multipliers;
    double kkt_residual = 0.0;
    int iterations = 0;
    bool converged = true;
    int discarded_candidates = 0;        // NLS/Picard: integration failures
};

// A fitted regression function. Kernel fits carry the design and weights of
// the representer expansion; parametric fits carry theta and the initial
// value. predict() evaluates the fitted function anywhere in its domain.
struct FitModel {
    FitKind kind = FitKind::SplineKRR;
    std::vector<double> intercepts;  // alpha (1 entry) or (alpha0, alpha1)
    std::vector<double> weights;     // pi (kernel kinds) or theta (parametric)
    double y0_hat = 0.0;             // parametric kinds
    double chosen_C = 1.0;           // ConstrainedKRR: the radius multiplier used
    FitDiagnostics diagnostics;
    std::function<double(double)> predictor;

    double predict(double x) const { return predictor(x); }
};

// Multi-constraint kernel regression: minimize (1/2n)|Y - a 1 - K_{b+1} pi /
// sqrt(n)|^2 subject to pi' (K_k/n) pi <= C (k!)^2 for k = 0..beta+1
// (autonomous) or C (2^k k!)^2 (nonautonomous). The normalized quadratic
// forms make the radius-1 constraint the unit RKHS ball of the fitted
// function.
FitModel fit_constrained_krr(const DesignSample& data, int beta, OdeKind variant, double C = 1.0);

// 5-fold cross-validation of C over the log grid 10^{-2..2}.
FitModel fit_constrained_krr_cv(const DesignSample& data, int beta, OdeKind variant);

// Cubic-spline-type estimator with affine part and the single constraint
// pi' (K_1/n) pi <= radius.
FitModel fit_standard_spline(const DesignSample& data, double radius = 1.0);

// Spline fits on a fixed design with the factorizations cached; fit() is
// O(n^2) per response vector.
class SplineFitter {
  public:
    explicit SplineFitter(std::vector<double> xs);
    FitModel fit(const std::vector<double>& ys, double radius = 1.0) const;

  private:
    std::vector<double> xs_;
    std::shared_ptr<const EllipsoidSolver> solver_;
    std::shared_ptr<const Eigen::MatrixXd> K1_;
};

// Scalar parametric ODE y' = f(x, y; theta), theta in the l_q unit ball.
struct OdeParamModel {
    std::function<double(double, double, const std::vector<double>&)> f_param;
    int theta_dim = 1;
    double q = 2.0;        // norm index of the theta ball
    double L_K = 1.0;
    double y0_bound = 1.0;  // C0
    double b = 1.0;         // state box half-width around the initial ball
};

// Nonlinear least squares over (theta, y0) by coarse grid search plus
// Nelder-Mead refinement; candidates whose trajectory leaves the state box
// are discarded and counted.
FitModel fit_nls(const DesignSample& data, const OdeParamModel& model, int solver_grid = 17);

// Picard iterates on [0, alpha_bar] with midpoint quadrature on T slices;
// iterate r+1 is y0 + int_0^x f(s, y_r(s)) ds, stored at the slice nodes
// with linear interpolation in between.
class PicardIterates {
  public:
    PicardIterates(const OdeParamModel& model, const std::vector<double>& theta, double y0, int R,
                   int T, double alpha_bar);

    double eval(int r, double x) const;             // iterate r at x
    double operator()(double x) const;              // final iterate
    int rounds() const { return R_; }

  private:
    std::vector<std::vector<double>> nodes_;  // nodes_[r][j], j = 0..T
    double alpha_bar_;
    int R_, T_;
};

PicardIterates picard_iterates(const OdeParamModel& model, const std::vector<double>& theta,
                               double y0, int R, int T, double alpha_bar);

// Picard-iteration estimator: theta from the least squares fit of the
// (R+1)-th iterate, with the initial value plugged in.
FitModel fit_picard(const DesignSample& data, const OdeParamModel& model, double y0_hat, int R,
                    int T, int solver_grid = 17);

double in_sample_mse(const FitModel& fit, const std::function<double(double)>& truth,
                     const std::vector<double>& xs);

}  // namespace odes

#endif
