#include "odes/gronwall.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "odes/rates.hpp"  // adaptive_simpson

namespace odes {

namespace {

double rate_constant(double L, int m) { return (m == 1) ? L : std::sqrt(L * L + 1.0); }

double initial_gap(const OdePair& pair) {
    double s = 0.0;
    for (std::size_t i = 0; i < pair.y0.size(); ++i) {
        const double d = pair.y0[i] - pair.z0[i];
        s += d * d;
    }
    return std::sqrt(s);
}

// companion system W' = (w_1, ..., w_{m-1}, rhs(x, W))
void rk4_step(const std::function<double(double, const std::vector<double>&)>& rhs, double x,
              double h, std::vector<double>& w) {
    const int m = static_cast<int>(w.size());
    auto deriv = [&](double xx, const std::vector<double>& ww) {
        std::vector<double> d(m);
        for (int i = 0; i + 1 < m; ++i) d[i] = ww[i + 1];
        d[m - 1] = rhs(xx, ww);
        return d;
    };
    const std::vector<double> k1 = deriv(x, w);
    std::vector<double> tmp(m);
    for (int i = 0; i < m; ++i) tmp[i] = w[i] + 0.5 * h * k1[i];
    const std::vector<double> k2 = deriv(x + 0.5 * h, tmp);
    for (int i = 0; i < m; ++i) tmp[i] = w[i] + 0.5 * h * k2[i];
    const std::vector<double> k3 = deriv(x + 0.5 * h, tmp);
    for (int i = 0; i < m; ++i) tmp[i] = w[i] + h * k3[i];
    const std::vector<double> k4 = deriv(x + h, tmp);
    for (int i = 0; i < m; ++i) w[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

double gronwall_bound(const OdePair& pair, double x, int m) {
    if (m < 1) throw DomainError("gronwall_bound: m must be >= 1");
    // m selects the rate constant; the higher-order formula may be evaluated
    // on first-order inputs for comparison
    if (pair.y0.empty() || pair.y0.size() != pair.z0.size())
        throw DomainError("gronwall_bound: initial value vectors must match");
    if (x < pair.a0 - 1e-14) throw DomainExceeded("gronwall_bound: x below a0");
    double limit = pair.a0 + pair.a;
    if (pair.sup_rhs && *pair.sup_rhs > 0.0)
        limit = pair.a0 + std::min(pair.a, pair.b / *pair.sup_rhs);
    if (x > limit + 1e-12) throw DomainExceeded("gronwall_bound: x beyond the existence interval");

    const double c = rate_constant(pair.L, m);
    const double integral = adaptive_simpson(
        [&](double s) { return std::exp(-c * s) * pair.phi(s); }, pair.a0, x, 1e-10);
    return std::exp(c * x) * integral + std::exp(c * x) * initial_gap(pair);
}

ViolationReport verify_pair(OdePair pair, const std::vector<double>& grid, int m) {
    if (grid.empty()) throw DomainError("verify_pair: empty grid");
    if (m < 1) throw DomainError("verify_pair: m must be >= 1");
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        if (!(grid[i] < grid[i + 1])) throw DomainError("verify_pair: grid not ascending");
    if (grid.front() < pair.a0 - 1e-14 || grid.back() > pair.a0 + pair.a + 1e-14)
        throw DomainExceeded("verify_pair: grid outside [a0, a0 + a]");

    const double box = pair.C0 + pair.b;
    const double h_max = 1e-3;

    // integrate both systems through the grid, sampling sup |f|, |g| on a
    // 512-point refinement along the way
    std::vector<std::vector<double>> ys, zs;
    {
        std::vector<double> wy = pair.y0, wz = pair.z0;
        double x = pair.a0;
        double sup = 0.0;
        const double span = grid.back() - pair.a0;
        const double sample_h = span > 0.0 ? span / 511.0 : 1.0;
        double next_sample = pair.a0;
        for (double target : grid) {
            const int steps =
                std::max(1, static_cast<int>(std::ceil((target - x) / h_max)));
            const double h = (target - x) / steps;
            for (int s = 0; s < steps; ++s) {
                if (x >= next_sample) {
                    sup = std::max({sup, std::abs(pair.f(x, wy)), std::abs(pair.g(x, wz))});
                    next_sample += sample_h;
                }
                rk4_step(pair.f, x, h, wy);
                rk4_step(pair.g, x, h, wz);
                x += h;
                if (norm2(wy) > box || norm2(wz) > box) throw BoxExit(x);
            }
            x = target;
            sup = std::max({sup, std::abs(pair.f(x, wy)), std::abs(pair.g(x, wz))});
            ys.push_back(wy);
            zs.push_back(wz);
        }
        if (!pair.sup_rhs) pair.sup_rhs = 1.1 * sup;
    }

    const double alpha = std::min(pair.a, *pair.sup_rhs > 0.0
                                              ? pair.b / *pair.sup_rhs
                                              : pair.a);
    if (grid.back() > pair.a0 + alpha + 1e-12)
        throw DomainExceeded("verify_pair: grid beyond the existence interval min{a, b/M}");

    ViolationReport rep;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double bound = gronwall_bound(pair, grid[i], m);
        for (int k = 0; k < m; ++k) {
            const double gap = std::abs(ys[i][k] - zs[i][k]);
            if (bound == 0.0) {
                if (gap == 0.0) {
                    rep.zero_over_zero = true;
                    continue;
                }
                rep.max_ratio = std::numeric_limits<double>::infinity();
                rep.worst_x = grid[i];
                rep.k = k;
                continue;
            }
            const double ratio = gap / bound;
            if (ratio > rep.max_ratio) {
                rep.max_ratio = ratio;
                rep.worst_x = grid[i];
                rep.k = k;
            }
        }
    }
    return rep;
}

}  // namespace odes
