#include "odes/builtins.hpp"

#include <cmath>

namespace odes {

namespace {

constexpr double kPi = 3.14159265358979323846;

OdeInstance autonomous(std::function<double(int, double)> table, double y0, double a, double b) {
    OdeInstance ode;
    ode.kind = OdeKind::autonomous;
    ode.deriv_oracle = [table = std::move(table)](int k, int, double, double y) {
        return table(k, y);
    };
    ode.x0 = 0.0;
    ode.y0 = y0;
    ode.a = a;
    ode.b = b;
    ode.beta_max = 32;
    return ode;
}

OdeInstance nonautonomous(std::function<double(int, int, double, double)> table, double y0,
                          double a, double b) {
    OdeInstance ode;
    ode.kind = OdeKind::nonautonomous;
    ode.deriv_oracle = std::move(table);
    ode.x0 = 0.0;
    ode.y0 = y0;
    ode.a = a;
    ode.b = b;
    ode.beta_max = 32;
    return ode;
}

}  // namespace

OdeInstance builtin_ode(const std::string& id) {
    const auto split = id.find(':');
    const std::string head = id.substr(0, split);
    const std::string arg = (split == std::string::npos) ? "" : id.substr(split + 1);

    if (head == "extremal") {
        // y' = e^{-y-1/2}: every derivative has unit magnitude at y = -1/2
        return autonomous(
            [](int k, double y) {
                const double v = std::exp(-y - 0.5);
                return (k % 2 == 0) ? v : -v;
            },
            -0.5, 1.0, 0.5);
    }
    if (head == "linear") {
        const double theta = arg.empty() ? 0.5 : std::stod(arg);
        const double y0 = 1.0;
        return autonomous(
            [theta](int k, double y) {
                if (k == 0) return -theta * y;
                if (k == 1) return -theta;
                return 0.0;
            },
            y0, 1.0, 2.0);
    }
    if (head == "linear_small") {  // y' = -y from y0 = 1/2; |f| <= 1 on the box
        return autonomous(
            [](int k, double y) {
                if (k == 0) return -y;
                if (k == 1) return -1.0;
                return 0.0;
            },
            0.5, 1.0, 0.5);
    }
    if (head == "sin") {
        const double y0 = arg.empty() ? 0.8 : std::stod(arg);
        return autonomous([](int k, double y) { return std::sin(y + k * kPi / 2.0); }, y0, 1.0,
                          1.0);
    }
    if (head == "cos") {
        const double y0 = arg.empty() ? 0.3 : std::stod(arg);
        return autonomous([](int k, double y) { return std::cos(y + k * kPi / 2.0); }, y0, 1.0,
                          1.0);
    }
    if (head == "zero") {
        return autonomous([](int, double) { return 0.0; }, 0.0, 1.0, 1.0);
    }
    if (head == "half") {
        return autonomous([](int k, double) { return k == 0 ? 0.5 : 0.0; }, 0.0, 1.0, 1.0);
    }
    if (head == "separable") {
        if (arg == "sinx" || arg.empty()) {
            return nonautonomous(
                [](int a, int b, double x, double) {
                    return b > 0 ? 0.0 : std::sin(x + a * kPi / 2.0);
                },
                0.0, 1.0, 2.0);
        }
        if (arg == "cos2pi") {
            // y' = cos(2 pi x)/(2 pi); derivatives grow, so only orders
            // needed for integration are meaningful here
            return nonautonomous(
                [](int a, int b, double x, double) {
                    if (b > 0) return 0.0;
                    return std::pow(2.0 * kPi, a - 1) * std::cos(2.0 * kPi * x + a * kPi / 2.0);
                },
                0.0, 1.0, 1.0);
        }
        throw DomainError("builtin_ode: unknown separable right-hand side " + arg);
    }
    if (head == "sinxy") {
        return nonautonomous(
            [](int a, int b, double x, double y) {
                return std::sin(x + y + (a + b) * kPi / 2.0);
            },
            0.3, 1.0, 1.0);
    }
    if (head == "sinxcosy") {
        return nonautonomous(
            [](int a, int b, double x, double y) {
                return std::sin(x + a * kPi / 2.0) * std::cos(y + b * kPi / 2.0);
            },
            0.2, 1.0, 1.0);
    }
    if (head == "mix") {
        // (sin(x+y) + cos(x-y))/2; all partials stay within [-1, 1]
        return nonautonomous(
            [](int a, int b, double x, double y) {
                return 0.5 * (std::sin(x + y + (a + b) * kPi / 2.0) +
                              std::cos(x - y + (a - b) * kPi / 2.0));
            },
            0.1, 1.0, 1.0);
    }
    throw DomainError("builtin_ode: unknown id " + id);
}

std::vector<std::string> builtin_ode_names() {
    return {"extremal", "linear", "linear_small", "sin",       "cos",  "zero",
            "half",     "separable:sinx", "separable:cos2pi", "sinxy", "sinxcosy", "mix"};
}

}  // namespace odes
