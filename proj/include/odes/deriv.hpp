#ifndef ODES_DERIV_HPP
#define ODES_DERIV_HPP

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "odes/errors.hpp"

namespace odes {

enum class OdeKind { autonomous, nonautonomous };

// One product term of a solution-derivative expansion: a multiset of partial
// derivatives of f, stored as (a, b) orders per factor, with the number of
// identical copies in `multiplicity`. Autonomous factors always have b = 0.
// Factors are kept sorted descending so equal terms merge canonically.
struct DerivTuple {
    std::vector<std::pair<int, int>> factors;
    std::int64_t multiplicity = 1;

    int order_sum() const {
        int s = 0;
        for (auto [a, b] : factors) s += a + b;
        return s;
    }
    bool operator==(const DerivTuple& o) const = default;
};

// Expansion of y^(k) as a sum of derivative products of f. For the autonomous
// equation y' = f(y) every term has exactly k factors and the multiplicities
// add up to (k-1)! exactly. For y' = f(x, y) the chain-rule branch appends a
// fresh (0,0) factor, so terms have between 1 and k factors and the total is
// bounded by 2^(k-1) (k-1)!.
struct DerivExpansion {
    int order = 0;
    OdeKind kind = OdeKind::autonomous;
    std::vector<DerivTuple> terms;

    std::int64_t total_multiplicity() const {
        std::int64_t t = 0;
        for (const auto& term : terms) t += term.multiplicity;
        return t;
    }
};

inline constexpr int kMaxAutonomousOrder = 20;
inline constexpr int kMaxNonautonomousOrder = 16;

// cap is the guard against factorial term-count growth; raise it knowingly
DerivExpansion expand_autonomous(int k, int cap = kMaxAutonomousOrder);
DerivExpansion expand_nonautonomous(int k, int cap = kMaxNonautonomousOrder);

// A scalar first-order initial value problem with a derivative table for f.
// deriv_oracle(a, b, x, y) returns D^(a,b) f; autonomous oracles must accept
// b = 0 and may ignore x. The oracle has to be safe for concurrent calls.
struct OdeInstance {
    OdeKind kind = OdeKind::autonomous;
    std::function<double(int, int, double, double)> deriv_oracle;
    double x0 = 0.0;
    double y0 = 0.0;
    double a = 1.0;  // half-width in x
    double b = 1.0;  // half-width in y
    int beta_max = 8;
};

double eval_expansion(const DerivExpansion& exp, const OdeInstance& ode, double x, double y);

// sup of |f| over the box, maximized on a 256-point sampling grid and
// inflated by 10%; existence_interval returns min{a, b/M}.
double estimate_sup_f(const OdeInstance& ode);
double existence_interval(const OdeInstance& ode);

struct TrajectoryPoint {
    double x = 0.0;
    std::vector<double> derivs;  // derivs[j] = y^(j)(x), j = 0..order
};

using Trajectory = std::vector<TrajectoryPoint>;

// Taylor-series stepping with the expansions as coefficient generators.
// Marches from ode.x0 through the (ascending) grid; the step is chosen so the
// last retained Taylor term is below 1e-12 * max(|y|, 1). Throws BoxExit if
// the solution leaves [y0-b, y0+b] and StepUnderflow below 1e-12.
Trajectory taylor_integrate(const OdeInstance& ode, const std::vector<double>& grid, int order);

struct BoundCertificate {
    int order = 0;            // k
    double observed_max = 0;  // max_grid |y^(k)(x)|
    double bound = 0;         // (k-1)! or 2^(k-1) (k-1)!
    double slack = 0;         // bound - observed_max
    std::vector<double> grid;
};

// Certifies |y^(k)| <= (k-1)! (autonomous) or 2^(k-1)(k-1)! (nonautonomous)
// for k = 1..k_max along the solution. The |D^p f| <= 1 hypothesis is spot
// checked on the trajectory; a violation beyond 1 + tol raises
// HypothesisViolated instead of silently certifying.
std::vector<BoundCertificate> certify_bounds(const OdeInstance& ode, int k_max,
                                             const std::vector<double>& grid,
                                             double hypothesis_tol = 1e-9);

double factorial(int n);

}  // namespace odes

#endif
