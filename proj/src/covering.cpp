#include "odes/covering.hpp"

#include <cmath>

namespace odes {

ClassConstants ClassConstants::make(double C0, double b, double L, double L_K, int K, int m) {
    if (C0 < 0 || b <= 0 || L < 0 || L_K < 0 || K < 0 || m < 1)
        throw DomainError("ClassConstants: constants out of range");
    ClassConstants c;
    c.C0 = C0;
    c.b = b;
    c.L = L;
    c.L_K = L_K;
    c.K = K;
    c.m = m;
    c.alpha = std::min(1.0, b);
    c.Cbar = C0 + b;
    return c;
}

std::string to_string(BoundFormula f) {
    switch (f) {
        case BoundFormula::KolmogorovUpper: return "KolmogorovUpper";
        case BoundFormula::KolmogorovLower: return "KolmogorovLower";
        case BoundFormula::General21: return "General21";
        case BoundFormula::Parametric: return "Parametric";
        case BoundFormula::Z1: return "Z1";
        case BoundFormula::Z2: return "Z2";
        case BoundFormula::Z3: return "Z3";
        case BoundFormula::W1: return "W1";
        case BoundFormula::W2: return "W2";
        case BoundFormula::W3: return "W3";
        case BoundFormula::SeparableLower: return "SeparableLower";
    }
    return "?";
}

BoundReport BoundReport::from_terms(BoundFormula f,
                                    std::vector<std::pair<std::string, double>> terms,
                                    std::optional<int> gamma) {
    BoundReport r;
    r.formula = f;
    r.minimizing_gamma = gamma;
    r.terms = std::move(terms);
    for (const auto& [name, v] : r.terms) r.value += v;
    return r;
}

namespace {

void check_unit_delta(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw DeltaOutOfRange("delta must lie in (0, 1)");
}

// log(prod_{i=0}^{gamma} i!)
double log_factorial_product(int gamma) {
    double acc = 0.0;
    for (int i = 2; i <= gamma; ++i) acc += std::lgamma(i + 1.0);
    return acc;
}

}  // namespace

double kolmogorov_upper(double delta, int gamma) {
    check_unit_delta(delta);
    return std::pow(delta, -1.0 / (gamma + 1)) + (gamma + 1) * std::log(1.0 / delta);
}

double kolmogorov_lower(double delta, int gamma) {
    check_unit_delta(delta);
    return std::pow(delta, -1.0 / (gamma + 1));
}

double l_max(double L, double alpha, int m) {
    double c;
    if (m == 1)
        c = (L > 0.0) ? L : 1.0;
    else
        c = std::sqrt(L * L + 1.0);
    // increasing in x, so the sup sits at x = alpha
    return std::exp(c * alpha) * (1.0 + (1.0 - std::exp(-c * alpha)) / c);
}

BoundReport general_bound(double delta, const std::function<double(double)>& logcover_F,
                          const ClassConstants& consts) {
    if (!(delta > 0.0)) throw DeltaOutOfRange("general_bound: delta must be positive");
    const double lm = l_max(consts.L, consts.alpha, consts.m);
    return BoundReport::from_terms(
        BoundFormula::General21,
        {{"logcover_F(delta/L_max)", logcover_F(delta / lm)},
         {"m log(2 C0 L_max/delta + 1)",
          consts.m * std::log(2.0 * consts.C0 * lm / delta + 1.0)}});
}

BoundReport parametric_bound(double delta, const ClassConstants& consts) {
    if (!(delta > 0.0)) throw DeltaOutOfRange("parametric_bound: delta must be positive");
    const double lm = l_max(consts.L, consts.alpha, consts.m);
    return BoundReport::from_terms(
        BoundFormula::Parametric,
        {{"K log(1 + 2 L_max L_K/delta)",
          consts.K * std::log(1.0 + 2.0 * lm * consts.L_K / delta)},
         {"m log(2 C0 L_max/delta + 1)",
          consts.m * std::log(2.0 * consts.C0 * lm / delta + 1.0)}});
}

namespace {

void check_bound_delta(double delta, const ClassConstants& consts) {
    if (!(delta / 5.0 > 0.0 && delta / 5.0 < consts.alpha))
        throw DeltaOutOfRange("delta/5 must lie in (0, alpha)");
}

std::vector<std::pair<std::string, double>> z1_terms(double delta, int gamma,
                                                     const ClassConstants& c) {
    return {{"log prod i!", log_factorial_product(gamma)},
            {"(gamma+3)/2 log(5/delta)", (gamma + 3) / 2.0 * std::log(5.0 / delta)},
            {"alpha (delta/5)^(-1/(gamma+2)) log 2",
             c.alpha * std::pow(delta / 5.0, -1.0 / (gamma + 2)) * std::log(2.0)},
            {"log(4 Cbar)", std::log(4.0 * c.Cbar)}};
}

std::vector<std::pair<std::string, double>> z2_terms(double delta, int gamma,
                                                     const ClassConstants& c) {
    return {{"(gamma+2)/2 log(5/delta)", (gamma + 2) / 2.0 * std::log(5.0 / delta)},
            {"2 Cbar log2 (delta/5)^(-1/(gamma+1))",
             2.0 * c.Cbar * std::log(2.0) * std::pow(delta / 5.0, -1.0 / (gamma + 1))},
            {"log 4", std::log(4.0)},
            {"log(C0/delta + 1)", std::log(c.C0 / delta + 1.0)}};
}

std::vector<std::pair<std::string, double>> z3_terms(double delta, int gamma,
                                                     const ClassConstants& c) {
    return {{"log prod i!", log_factorial_product(gamma)},
            {"(gamma+2)/2 log(5/delta)", (gamma + 2) / 2.0 * std::log(5.0 / delta)},
            {"alpha (delta/5)^(-1/(gamma+1)) log 2",
             c.alpha * std::pow(delta / 5.0, -1.0 / (gamma + 1)) * std::log(2.0)},
            {"log 4", std::log(4.0)}};
}

std::vector<std::pair<std::string, double>> w1_terms(double delta, int gamma,
                                                     const ClassConstants& c) {
    return {{"log prod i!", log_factorial_product(gamma)},
            {"(gamma^2+gamma)/2 log 2", (gamma * gamma + gamma) / 2.0 * std::log(2.0)},
            {"(gamma+3)/2 log(5/delta)", (gamma + 3) / 2.0 * std::log(5.0 / delta)},
            {"alpha (delta/5)^(-1/(gamma+2)) log 4",
             c.alpha * std::pow(delta / 5.0, -1.0 / (gamma + 2)) * std::log(4.0)},
            {"log(4 Cbar)", std::log(4.0 * c.Cbar)}};
}

std::vector<std::pair<std::string, double>> w2_terms(double delta, int gamma,
                                                     const ClassConstants& c) {
    return {{"(gamma+2)(gamma+3)/6 log(5/delta)",
             (gamma + 2) * (gamma + 3) / 6.0 * std::log(5.0 / delta)},
            {"20 (Cbar v 1) log2 (delta/5)^(-2/(gamma+1))",
             20.0 * std::max(c.Cbar, 1.0) * std::log(2.0) *
                 std::pow(delta / 5.0, -2.0 / (gamma + 1))},
            {"4 log 2", 4.0 * std::log(2.0)},
            {"log(C0/delta + 1)", std::log(c.C0 / delta + 1.0)}};
}

std::vector<std::pair<std::string, double>> w3_terms(double delta, int gamma,
                                                     const ClassConstants& c) {
    return {{"log prod i!", log_factorial_product(gamma)},
            {"(gamma^2+gamma)/2 log 2", (gamma * gamma + gamma) / 2.0 * std::log(2.0)},
            {"(gamma+2)/2 log(5/delta)", (gamma + 2) / 2.0 * std::log(5.0 / delta)},
            {"alpha (delta/5)^(-1/(gamma+1)) log 4",
             c.alpha * std::pow(delta / 5.0, -1.0 / (gamma + 1)) * std::log(4.0)},
            {"log 4", std::log(4.0)}};
}

double term_sum(const std::vector<std::pair<std::string, double>>& terms) {
    double s = 0.0;
    for (const auto& [n, v] : terms) s += v;
    return s;
}

}  // namespace

ZBounds z_bounds(double delta, int gamma, const ClassConstants& consts) {
    check_bound_delta(delta, consts);
    if (gamma < 0) throw DomainError("z_bounds: gamma must be >= 0");
    return {term_sum(z1_terms(delta, gamma, consts)), term_sum(z2_terms(delta, gamma, consts)),
            term_sum(z3_terms(delta, gamma, consts))};
}

WBounds w_bounds(double delta, int gamma, const ClassConstants& consts) {
    check_bound_delta(delta, consts);
    if (gamma < 0) throw DomainError("w_bounds: gamma must be >= 0");
    return {term_sum(w1_terms(delta, gamma, consts)), term_sum(w2_terms(delta, gamma, consts)),
            term_sum(w3_terms(delta, gamma, consts))};
}

BoundReport solution_class_bound(double delta, int beta, const ClassConstants& consts,
                                 OdeKind kind, CoverTarget target) {
    check_bound_delta(delta, consts);
    if (beta < 0) throw DomainError("solution_class_bound: beta must be >= 0");

    // unit-Lipschitz constant of the Section 3.2 setup (rho = 1)
    const double lm = l_max(1.0, consts.alpha, 1);

    const bool autonomous = (kind == OdeKind::autonomous);
    BoundReport best;
    bool have = false;

    auto consider = [&](BoundFormula f, int gamma,
                        std::vector<std::pair<std::string, double>> terms) {
        BoundReport r = BoundReport::from_terms(f, std::move(terms), gamma);
        if (!have || r.value < best.value) {
            best = std::move(r);
            have = true;
        }
    };

    for (int gamma = 0; gamma <= beta; ++gamma) {
        if (target == CoverTarget::first_derivatives) {
            if (autonomous)
                consider(BoundFormula::Z3, gamma, z3_terms(delta, gamma, consts));
            else
                consider(BoundFormula::W3, gamma, w3_terms(delta, gamma, consts));
        } else if (autonomous) {
            consider(BoundFormula::Z1, gamma, z1_terms(delta, gamma, consts));
            consider(BoundFormula::Z2, gamma, z2_terms(delta / lm, gamma, consts));
        } else {
            consider(BoundFormula::W1, gamma, w1_terms(delta, gamma, consts));
            consider(BoundFormula::W2, gamma, w2_terms(delta / lm, gamma, consts));
        }
    }
    return best;
}

double separable_lower(double delta, int beta, CoverTarget target) {
    check_unit_delta(delta);
    if (beta < 0) throw DomainError("separable_lower: beta must be >= 0");
    const double exponent =
        (target == CoverTarget::solutions) ? -1.0 / (beta + 2) : -1.0 / (beta + 1);
    return std::pow(delta, exponent);
}

}  // namespace odes
