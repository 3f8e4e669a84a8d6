#ifndef ODES_COVERING_HPP
#define ODES_COVERING_HPP

#include <optional>
#include <string>
#include <vector>

#include "odes/deriv.hpp"
#include "odes/errors.hpp"

namespace odes {

// Description of a smooth class: degree parameter beta, derivative bound rho,
// dimension of the argument, and the domain per coordinate.
struct SmoothClassSpec {
    int beta = 0;
    double rho = 1.0;
    int dim = 1;
    double domain_lo = 0.0;
    double domain_hi = 1.0;

    void validate() const {
        if (beta < 0 || !(rho > 0.0) || (dim != 1 && dim != 2) || !(domain_lo < domain_hi))
            throw DomainError("SmoothClassSpec: invalid class description");
    }
};

// Constants describing the solution-class geometry. alpha and Cbar are
// derived: alpha = min{1, b}, Cbar = C0 + b.
struct ClassConstants {
    double C0 = 1.0;   // initial-value ball radius
    double b = 1.0;    // box half-width
    double L = 1.0;    // Picard Lipschitz constant
    double L_K = 1.0;  // parameter-Lipschitz constant
    int K = 1;         // parameter dimension
    int m = 1;         // ODE order
    double alpha = 1.0;
    double Cbar = 2.0;

    static ClassConstants make(double C0, double b, double L = 1.0, double L_K = 1.0, int K = 1,
                               int m = 1);
};

enum class BoundFormula {
    KolmogorovUpper,
    KolmogorovLower,
    General21,
    Parametric,
    Z1,
    Z2,
    Z3,
    W1,
    W2,
    W3,
    SeparableLower,
};

std::string to_string(BoundFormula f);

// Evaluated log-covering-number bound with a per-addend breakdown.
// `value` always equals the sum of the terms.
struct BoundReport {
    double value = 0.0;
    std::optional<int> minimizing_gamma;
    std::vector<std::pair<std::string, double>> terms;
    BoundFormula formula = BoundFormula::KolmogorovUpper;
    bool asymptotic_constants_unity = true;

    static BoundReport from_terms(BoundFormula f,
                                  std::vector<std::pair<std::string, double>> terms,
                                  std::optional<int> gamma = std::nullopt);
};

double kolmogorov_upper(double delta, int gamma);
double kolmogorov_lower(double delta, int gamma);

// Closed form of the constant sup_x e^{cx} (1 + int_0^x e^{-cs} ds) on
// [0, alpha]; c = sqrt(L^2+1) in general, c = L (or 1 when L = 0) for m = 1.
double l_max(double L, double alpha, int m);

BoundReport general_bound(double delta, const std::function<double(double)>& logcover_F,
                          const ClassConstants& consts);
BoundReport parametric_bound(double delta, const ClassConstants& consts);

struct ZBounds {
    double z1, z2, z3;
};
struct WBounds {
    double w1, w2, w3;
};

ZBounds z_bounds(double delta, int gamma, const ClassConstants& consts);
WBounds w_bounds(double delta, int gamma, const ClassConstants& consts);

enum class CoverTarget { solutions, first_derivatives };

// Gamma-minimized covering bound for the solution class (or the class of
// first derivatives); ties go to the smallest gamma.
BoundReport solution_class_bound(double delta, int beta, const ClassConstants& consts,
                                 OdeKind kind, CoverTarget target = CoverTarget::solutions);

double separable_lower(double delta, int beta, CoverTarget target = CoverTarget::solutions);

}  // namespace odes

#endif
