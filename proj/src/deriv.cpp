#include "odes/deriv.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace odes {

double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

namespace {

using Factors = std::vector<std::pair<int, int>>;

Factors canonical(Factors f) {
    std::sort(f.begin(), f.end(), std::greater<>());
    return f;
}

std::vector<DerivTuple> to_terms(const std::map<Factors, std::int64_t, std::greater<Factors>>& acc) {
    std::vector<DerivTuple> terms;
    terms.reserve(acc.size());
    for (const auto& [factors, mult] : acc) terms.push_back({factors, mult});
    return terms;
}

}  // namespace

DerivExpansion expand_autonomous(int k, int cap) {
    if (k < 1) throw DomainError("expand_autonomous: k must be >= 1");
    if (k > cap) throw DomainError("expand_autonomous: k exceeds the multiplicity cap");

    DerivExpansion exp;
    exp.kind = OdeKind::autonomous;
    exp.order = 1;
    exp.terms = {DerivTuple{{{0, 0}}, 1}};

    // Differentiating a factor f^(a_j) produces f^(a_j + 1) * f, i.e. the j-th
    // order goes up by one and a zero-order factor is appended.
    for (int order = 2; order <= k; ++order) {
        std::map<Factors, std::int64_t, std::greater<Factors>> acc;
        for (const auto& term : exp.terms) {
            for (std::size_t j = 0; j < term.factors.size(); ++j) {
                Factors child = term.factors;
                child[j].first += 1;
                child.emplace_back(0, 0);
                acc[canonical(std::move(child))] += term.multiplicity;
            }
        }
        exp.order = order;
        exp.terms = to_terms(acc);
    }
    return exp;
}

DerivExpansion expand_nonautonomous(int k, int cap) {
    if (k < 1) throw DomainError("expand_nonautonomous: k must be >= 1");
    if (k > cap) throw DomainError("expand_nonautonomous: k exceeds the term-count cap");

    DerivExpansion exp;
    exp.kind = OdeKind::nonautonomous;
    exp.order = 1;
    exp.terms = {DerivTuple{{{0, 0}}, 1}};

    // Two branches per factor: the x-derivative keeps the factor count, the
    // y-derivative picks up a factor f = y' and appends (0,0).
    for (int order = 2; order <= k; ++order) {
        std::map<Factors, std::int64_t, std::greater<Factors>> acc;
        for (const auto& term : exp.terms) {
            for (std::size_t j = 0; j < term.factors.size(); ++j) {
                Factors dx = term.factors;
                dx[j].first += 1;
                acc[canonical(std::move(dx))] += term.multiplicity;

                Factors dy = term.factors;
                dy[j].second += 1;
                dy.emplace_back(0, 0);
                acc[canonical(std::move(dy))] += term.multiplicity;
            }
        }
        exp.order = order;
        exp.terms = to_terms(acc);
    }
    return exp;
}

double eval_expansion(const DerivExpansion& exp, const OdeInstance& ode, double x, double y) {
    double total = 0.0;
    for (const auto& term : exp.terms) {
        double product = 1.0;
        for (auto [a, b] : term.factors) {
            if (a + b > ode.beta_max)
                throw OracleOrderExceeded("eval_expansion: needs D^" + std::to_string(a + b) +
                                          " f but beta_max=" + std::to_string(ode.beta_max));
            product *= ode.deriv_oracle(a, b, x, y);
        }
        total += static_cast<double>(term.multiplicity) * product;
    }
    return total;
}

double estimate_sup_f(const OdeInstance& ode) {
    double sup = 0.0;
    if (ode.kind == OdeKind::autonomous) {
        const int pts = 256;
        for (int i = 0; i < pts; ++i) {
            const double y = ode.y0 - ode.b + 2.0 * ode.b * i / (pts - 1);
            sup = std::max(sup, std::abs(ode.deriv_oracle(0, 0, ode.x0, y)));
        }
    } else {
        const int pts = 16;  // 16 x 16 = 256 samples of the rectangle
        for (int i = 0; i < pts; ++i) {
            const double x = ode.x0 - ode.a + 2.0 * ode.a * i / (pts - 1);
            for (int j = 0; j < pts; ++j) {
                const double y = ode.y0 - ode.b + 2.0 * ode.b * j / (pts - 1);
                sup = std::max(sup, std::abs(ode.deriv_oracle(0, 0, x, y)));
            }
        }
    }
    return 1.1 * sup;
}

double existence_interval(const OdeInstance& ode) {
    const double sup = estimate_sup_f(ode);
    if (sup <= 0.0) return ode.a;
    return std::min(ode.a, ode.b / sup);
}

namespace {

std::vector<DerivExpansion> expansions_up_to(OdeKind kind, int order) {
    std::vector<DerivExpansion> exps;
    exps.reserve(order);
    for (int j = 1; j <= order; ++j)
        exps.push_back(kind == OdeKind::autonomous ? expand_autonomous(j)
                                                   : expand_nonautonomous(j));
    return exps;
}

}  // namespace

Trajectory taylor_integrate(const OdeInstance& ode, const std::vector<double>& grid, int order) {
    if (grid.empty()) return {};
    if (order < 1) throw DomainError("taylor_integrate: order must be >= 1");
    if (order > ode.beta_max + 1)
        throw DomainError("taylor_integrate: order exceeds beta_max + 1");
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        if (!(grid[i] < grid[i + 1])) throw DomainError("taylor_integrate: grid not ascending");
    if (grid.front() < ode.x0 - 1e-14 || grid.back() > ode.x0 + ode.a + 1e-14)
        throw DomainError("taylor_integrate: grid outside [x0, x0 + a]");

    const auto exps = expansions_up_to(ode.kind, order);
    const double y_lo = ode.y0 - ode.b, y_hi = ode.y0 + ode.b;

    auto derivs_at = [&](double x, double y) {
        std::vector<double> d(order + 1);
        d[0] = y;
        for (int j = 1; j <= order; ++j) d[j] = eval_expansion(exps[j - 1], ode, x, y);
        return d;
    };

    Trajectory out;
    out.reserve(grid.size());
    double x = ode.x0, y = ode.y0;

    for (double target : grid) {
        while (x < target - 1e-15) {
            std::vector<double> d = derivs_at(x, y);
            const double tol = 1e-12 * std::max(std::abs(y), 1.0);
            double h = target - x;
            if (std::abs(d[order]) > 0.0) {
                // largest h with |y^(order)| h^order / order! <= tol
                const double h_acc =
                    std::pow(tol * factorial(order) / std::abs(d[order]), 1.0 / order);
                h = std::min(h, h_acc);
            }
            if (h < 1e-12) throw StepUnderflow(x);

            double step = 0.0, hp = 1.0;
            for (int j = 1; j <= order; ++j) {
                hp *= h / j;
                step += d[j] * hp;
            }
            y += step;
            x = (h >= target - x - 1e-15) ? target : x + h;
            if (y < y_lo || y > y_hi) throw BoxExit(x);
        }
        out.push_back({target, derivs_at(target, y)});
    }
    return out;
}

std::vector<BoundCertificate> certify_bounds(const OdeInstance& ode, int k_max,
                                             const std::vector<double>& grid,
                                             double hypothesis_tol) {
    if (k_max < 1) throw DomainError("certify_bounds: k_max must be >= 1");
    if (k_max > ode.beta_max + 1)
        throw DomainError("certify_bounds: k_max exceeds beta_max + 1");

    const int order = std::min(ode.beta_max + 1, 10);
    const Trajectory traj = taylor_integrate(ode, grid, std::max(order, k_max));

    // spot check the |D^p f| <= 1 hypothesis along the solution
    for (const auto& pt : traj) {
        for (int a = 0; a <= k_max - 1; ++a) {
            int b_hi = (ode.kind == OdeKind::autonomous) ? 0 : k_max - 1 - a;
            for (int b = 0; b <= b_hi; ++b) {
                const double v = std::abs(ode.deriv_oracle(a, b, pt.x, pt.derivs[0]));
                if (v > 1.0 + hypothesis_tol)
                    throw HypothesisViolated("certify_bounds: |D^(" + std::to_string(a) + "," +
                                             std::to_string(b) + ") f| = " + std::to_string(v) +
                                             " > 1 at x=" + std::to_string(pt.x));
            }
        }
    }

    std::vector<BoundCertificate> certs;
    certs.reserve(k_max);
    for (int k = 1; k <= k_max; ++k) {
        BoundCertificate c;
        c.order = k;
        c.bound = (ode.kind == OdeKind::autonomous)
                      ? factorial(k - 1)
                      : std::pow(2.0, k - 1) * factorial(k - 1);
        for (const auto& pt : traj) {
            c.grid.push_back(pt.x);
            c.observed_max = std::max(c.observed_max, std::abs(pt.derivs[k]));
        }
        c.slack = c.bound - c.observed_max;
        certs.push_back(std::move(c));
    }
    return certs;
}

}  // namespace odes
