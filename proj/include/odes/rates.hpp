#ifndef ODES_RATES_HPP
#define ODES_RATES_HPP

#include <functional>
#include <string>
#include <vector>

#include "odes/deriv.hpp"
#include "odes/errors.hpp"

namespace odes {

struct RateParams {
    long long n = 1;
    double sigma = 1.0;
    int beta = 0;
};

enum class RateBranch { M1a, M2a, M1, M2, KernelM3, StandardClass };

std::string to_string(RateBranch b);

struct RadiusReport {
    double r_squared = 0.0;
    int minimizing_gamma = 0;
    RateBranch branch = RateBranch::M1a;
    std::string active_term;  // which max-argument attained the value
};

enum class MFunction { M1a, M2a, M1, M2, M3 };

// The rate families entering the critical radii; all asymptotic constants
// are set to one. M2 at gamma = 0 is defined via the gamma = 1 exponent
// branch when sigma^2/n <= 1 and rejected otherwise.
double m_function(MFunction which, int gamma, const RateParams& p);

RadiusReport critical_radius(const RateParams& p, OdeKind kind);
RadiusReport kernel_radius(const RateParams& p);
double standard_class_radius(int gamma, const RateParams& p);

// sigma^2 (beta sqrt(log(beta v 1)))^(4 beta + 10); zero when the base is zero.
double sample_threshold(int beta, double sigma);

struct FigureRow {
    int gamma;
    std::string series;
    double value;
};

// Series behind the figures: the log-count and power terms of the
// Kolmogorov bound, and the five rate families.
std::vector<FigureRow> figure1_series(double delta, int gamma_max);
int figure1_crossover(double delta, int gamma_max);
std::vector<FigureRow> figure2_series(const RateParams& p, int gamma_max);

// Smallest r in (0, sigma] with (1/sqrt n) int_{r^2/(4 sigma)}^{r}
// sqrt(logcover(t)) dt <= r^2/sigma; bisection to relative 1e-8, entropy
// integral by adaptive Simpson.
double dudley_radius(const std::function<double(double)>& logcover, const RateParams& p);

// adaptive Simpson quadrature, shared with the gronwall module
double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                        double abs_tol = 1e-10);

}  // namespace odes

#endif
