#include "odes/rates.hpp"

#include <algorithm>
#include <cmath>

namespace odes {

std::string to_string(RateBranch b) {
    switch (b) {
        case RateBranch::M1a: return "M1a";
        case RateBranch::M2a: return "M2a";
        case RateBranch::M1: return "M1";
        case RateBranch::M2: return "M2";
        case RateBranch::KernelM3: return "KernelM3";
        case RateBranch::StandardClass: return "StandardClass";
    }
    return "?";
}

namespace {

void check_params(const RateParams& p) {
    if (p.n < 1 || !(p.sigma > 0.0)) throw DomainError("RateParams: need n >= 1, sigma > 0");
}

double log_factorial_product(int gamma) {
    double acc = 0.0;
    for (int i = 2; i <= gamma; ++i) acc += std::lgamma(i + 1.0);
    return acc;
}

double noise_ratio(const RateParams& p) { return p.sigma * p.sigma / static_cast<double>(p.n); }

struct MaxPick {
    double value;
    const char* term;
};

MaxPick pick_max(std::initializer_list<MaxPick> candidates) {
    MaxPick best{-1.0, ""};
    for (const auto& c : candidates)
        if (c.value > best.value) best = c;
    return best;
}

MaxPick m_function_pick(MFunction which, int gamma, const RateParams& p) {
    const double s = noise_ratio(p);
    switch (which) {
        case MFunction::M1a:
            return pick_max({{s * log_factorial_product(gamma), "s log prod i!"},
                             {s, "s"},
                             {std::pow(s, 2.0 * (gamma + 2) / (2.0 * (gamma + 2) + 1.0)),
                              "s^(2(g+2)/(2(g+2)+1))"}});
        case MFunction::M2a:
            return pick_max({{s * std::max(gamma, 1), "s (g v 1)"},
                             {std::pow(s, 2.0 * (gamma + 1) / (2.0 * (gamma + 1) + 1.0)),
                              "s^(2(g+1)/(2(g+1)+1))"}});
        case MFunction::M1:
            return pick_max({{s * log_factorial_product(gamma), "s log prod i!"},
                             {s * std::max(gamma * gamma, 1), "s (g^2 v 1)"},
                             {std::pow(s, 2.0 * (gamma + 2) / (2.0 * (gamma + 2) + 1.0)),
                              "s^(2(g+2)/(2(g+2)+1))"}});
        case MFunction::M2: {
            int g = gamma;
            if (gamma == 0) {
                if (s > 1.0)
                    throw GammaUnsupported("M2 is undefined at gamma=0 when sigma^2/n > 1");
                g = 1;  // exponent branch of gamma = 1; parametric term unchanged
            }
            return pick_max({{s * std::max(gamma * gamma, 1), "s (g^2 v 1)"},
                             {std::pow(s, (g + 1.0) / (g + 2.0)), "s^((g+1)/(g+2))"}});
        }
        case MFunction::M3: {
            const double base = std::max(gamma, 1) * s;
            return {std::pow(base, 2.0 * (gamma + 2) / (2.0 * (gamma + 2) + 1.0)),
                    "((g v 1) s)^(2(g+2)/(2(g+2)+1))"};
        }
    }
    throw DomainError("m_function: unknown selector");
}

}  // namespace

double m_function(MFunction which, int gamma, const RateParams& p) {
    check_params(p);
    if (gamma < 0) throw DomainError("m_function: gamma must be >= 0");
    return m_function_pick(which, gamma, p).value;
}

RadiusReport critical_radius(const RateParams& p, OdeKind kind) {
    check_params(p);
    const double s = noise_ratio(p);
    const bool autonomous = (kind == OdeKind::autonomous);
    const MFunction first = autonomous ? MFunction::M1a : MFunction::M1;
    const MFunction second = autonomous ? MFunction::M2a : MFunction::M2;

    RadiusReport best;
    bool have = false;
    auto consider = [&](MFunction which, RateBranch branch, int gamma) {
        const MaxPick m = m_function_pick(which, gamma, p);
        if (!have || m.value < best.r_squared) {
            best = {m.value, gamma, branch, m.term};
            have = true;
        }
    };

    for (int gamma = 0; gamma <= p.beta; ++gamma)
        consider(first, autonomous ? RateBranch::M1a : RateBranch::M1, gamma);
    for (int gamma = 0; gamma <= p.beta; ++gamma) {
        if (!autonomous && gamma == 0 && s > 1.0) continue;  // M2 undefined there
        consider(second, autonomous ? RateBranch::M2a : RateBranch::M2, gamma);
    }
    return best;
}

RadiusReport kernel_radius(const RateParams& p) {
    check_params(p);
    const double s = noise_ratio(p);

    RadiusReport best;
    bool have = false;
    for (int gamma = 0; gamma <= p.beta; ++gamma) {
        const double parametric =
            s * std::max(std::min<long long>(gamma, p.n), static_cast<long long>(1));
        const double prefactor = std::pow(std::pow(2.0, gamma + 1) * factorial(gamma + 1),
                                          2.0 / (2.0 * (gamma + 2) + 1.0));
        const double power =
            prefactor * std::pow(s, 2.0 * (gamma + 2) / (2.0 * (gamma + 2) + 1.0));
        const MaxPick m = (parametric > power) ? MaxPick{parametric, "s ((g ^ n) v 1)"}
                                               : MaxPick{power, "[2^(g+1)(g+1)!]^... s^..."};
        if (!have || m.value < best.r_squared) {
            best = {m.value, gamma, RateBranch::KernelM3, m.term};
            have = true;
        }
    }
    return best;
}

double standard_class_radius(int gamma, const RateParams& p) {
    check_params(p);
    if (gamma < 0) throw DomainError("standard_class_radius: gamma must be >= 0");
    const double s = noise_ratio(p);
    return std::max(s * std::max(gamma, 1),
                    std::pow(s, 2.0 * (gamma + 1) / (2.0 * (gamma + 1) + 1.0)));
}

double sample_threshold(int beta, double sigma) {
    if (beta < 0) throw DomainError("sample_threshold: beta must be >= 0");
    const double base = beta * std::sqrt(std::log(std::max(beta, 1)));
    if (base == 0.0) return 0.0;
    return sigma * sigma * std::pow(base, 4.0 * beta + 10.0);
}

std::vector<FigureRow> figure1_series(double delta, int gamma_max) {
    if (!(delta > 0.0 && delta < 1.0)) throw DeltaOutOfRange("figure1_series: delta in (0,1)");
    std::vector<FigureRow> rows;
    for (int g = 0; g <= gamma_max; ++g) {
        rows.push_back({g, "log_term", std::max(g, 1) * std::log(1.0 / delta)});
        rows.push_back({g, "power_term", std::pow(delta, -1.0 / (g + 1))});
    }
    return rows;
}

int figure1_crossover(double delta, int gamma_max) {
    if (!(delta > 0.0 && delta < 1.0)) throw DeltaOutOfRange("figure1_crossover: delta in (0,1)");
    for (int g = 0; g <= gamma_max; ++g) {
        const double log_term = std::max(g, 1) * std::log(1.0 / delta);
        const double power_term = std::pow(delta, -1.0 / (g + 1));
        if (log_term > power_term) return g;
    }
    return -1;  // no crossover within range
}

std::vector<FigureRow> figure2_series(const RateParams& p, int gamma_max) {
    check_params(p);
    std::vector<FigureRow> rows;
    for (int g = 0; g <= gamma_max; ++g) {
        rows.push_back({g, "M1a", m_function(MFunction::M1a, g, p)});
        rows.push_back({g, "M2a", m_function(MFunction::M2a, g, p)});
        rows.push_back({g, "M1", m_function(MFunction::M1, g, p)});
        if (g >= 1) rows.push_back({g, "M2", m_function(MFunction::M2, g, p)});
        rows.push_back({g, "M3", m_function(MFunction::M3, g, p)});
    }
    return rows;
}

double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                        double abs_tol) {
    if (hi <= lo) return 0.0;
    struct Rec {
        const std::function<double(double)>& f;
        double operator()(double a, double b, double fa, double fm, double fb, double whole,
                          double tol, int depth) const {
            const double m = 0.5 * (a + b);
            const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
            const double flm = f(lm), frm = f(rm);
            const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
                return left + right + (left + right - whole) / 15.0;
            return (*this)(a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
                   (*this)(m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
        }
    } rec{f};
    const double m = 0.5 * (lo + hi);
    const double fa = f(lo), fm = f(m), fb = f(hi);
    const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    return rec(lo, hi, fa, fm, fb, whole, abs_tol, 40);
}

double dudley_radius(const std::function<double(double)>& logcover, const RateParams& p) {
    check_params(p);
    const double sigma = p.sigma;
    const double sqrt_n = std::sqrt(static_cast<double>(p.n));

    auto satisfied = [&](double r) {
        const double lo = r * r / (4.0 * sigma);
        if (lo >= r) return true;  // empty integration range
        const double integral =
            adaptive_simpson([&](double t) { return std::sqrt(std::max(0.0, logcover(t))); }, lo,
                             r, 1e-10);
        return integral / sqrt_n <= r * r / sigma;
    };

    if (!satisfied(sigma))
        throw NoSolutionInRange("dudley_radius: critical inequality fails at r = sigma");
    double lo = 1e-12, hi = sigma;
    if (satisfied(lo)) return 0.0;  // every radius works; infimum 0
    while ((hi - lo) > 1e-8 * hi) {
        const double mid = 0.5 * (lo + hi);
        (satisfied(mid) ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace odes
