#include "odes/kernels.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "odes/deriv.hpp"  // factorial

namespace odes {

namespace {

// Newton iteration on P_n with the initial guesses of Abramowitz & Stegun.
GaussRule compute_gauss(int n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            if (n == 1) p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            const double pn = (n == 1) ? x : p1;
            const double pn1 = (n == 1) ? 1.0 : p0;
            dp = n * (x * pn - pn1) / (x * x - 1.0);
            const double dx = pn / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
    if (n < 1) throw DomainError("gauss_legendre: need n >= 1");
    static std::map<int, GaussRule> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_gauss(n)).first;
    return it->second;
}

double kernel_entry(int k, double x, double x2) {
    if (k < 0) throw DomainError("kernel_entry: k must be >= 0");
    if (x < 0.0 || x > 1.0 || x2 < 0.0 || x2 > 1.0)
        throw DomainError("kernel_entry: arguments must lie in [0, 1]");
    const double m = std::min(x, x2);
    if (k == 0) return m;
    if (m <= 0.0) return 0.0;

    const GaussRule& rule = gauss_legendre(k + 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double t = 0.5 * m * (rule.nodes[i] + 1.0);
        sum += rule.weights[i] * std::pow(x - t, k) * std::pow(x2 - t, k);
    }
    const double kfact = factorial(k);
    return 0.5 * m * sum / (kfact * kfact);
}

KernelSystem build_kernel(int k, const std::vector<double>& xs) {
    KernelSystem sys;
    sys.order = k;
    sys.design = xs;
    const int n = static_cast<int>(xs.size());
    sys.matrix.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double v = kernel_entry(k, xs[i], xs[j]);
            sys.matrix(i, j) = v;
            sys.matrix(j, i) = v;
        }
    return sys;
}

}  // namespace odes
