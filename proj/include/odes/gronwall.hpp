#ifndef ODES_GRONWALL_HPP
#define ODES_GRONWALL_HPP

#include <functional>
#include <optional>
#include <vector>

#include "odes/errors.hpp"

namespace odes {

// A pair of order-m scalar ODEs y^(m) = f(x, Y), z^(m) = g(x, Z), with the
// stability hypotheses: L is the Lipschitz constant of f in the state
// coordinates and phi(x) bounds |f(x, Y(x)) - g(x, Y(x))| along the first
// solution. For m = 1 the state vectors have a single entry.
struct OdePair {
    int m = 1;
    std::function<double(double, const std::vector<double>&)> f;
    std::function<double(double, const std::vector<double>&)> g;
    std::vector<double> y0, z0;
    double L = 0.0;
    std::function<double(double)> phi;
    double a0 = 0.0;
    double a = 1.0;
    double b = 1.0;
    double C0 = 1.0;
    // sup of |f|, |g| along the solutions; verify_pair fills it in, callers
    // may preset it to skip the estimation pass
    std::optional<double> sup_rhs;
};

// exp(c x)[ int_{a0}^{x} exp(-c s) phi(s) ds + |Y0 - Z0| ], c = L for m = 1
// and sqrt(L^2 + 1) otherwise; initial gap in l2 norm for m >= 2.
double gronwall_bound(const OdePair& pair, double x, int m);

struct ViolationReport {
    double max_ratio = 0.0;
    double worst_x = 0.0;
    int k = 0;                   // derivative index attaining the max
    bool zero_over_zero = false; // gap and bound both vanished somewhere
};

// Integrates both systems over the grid (RK4 with fine substeps), estimates
// the existence interval from the trajectories, and reports the worst ratio
// |y^(k) - z^(k)| / bound over the grid and k = 0..m-1.
ViolationReport verify_pair(OdePair pair, const std::vector<double>& grid, int m);

}  // namespace odes

#endif
