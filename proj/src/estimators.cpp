#include "odes/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace odes {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void DesignSample::validate() const {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw DomainError("DesignSample: need |xs| == |ys| >= 2");
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
        if (!(xs[i] < xs[i + 1])) throw DomainError("DesignSample: xs must be strictly ascending");
    if (xs.front() < 0.0 || xs.back() > 1.0)
        throw DomainError("DesignSample: design must lie in [0, 1]");
}

std::string to_string(FitKind k) {
    switch (k) {
        case FitKind::ConstrainedKRR: return "krr";
        case FitKind::SplineKRR: return "spline";
        case FitKind::NLS: return "nls";
        case FitKind::Picard: return "picard";
    }
    return "?";
}

namespace {

FitDiagnostics diagnostics_of(const QcqpResult& q) {
    FitDiagnostics d;
    d.objective = q.objective;
    d.constraint_slacks = q.slacks;
    d.multipliers = q.multipliers;
    d.kkt_residual = q.kkt_residual;
    d.iterations = q.iterations;
    d.converged = q.converged;
    return d;
}

std::function<double(double)> kernel_predictor(int order, std::vector<double> xs,
                                               std::vector<double> intercepts,
                                               std::vector<double> weights, bool affine) {
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(xs.size()));
    return [=](double x) {
        double v = affine ? intercepts[0] + intercepts[1] * x : intercepts[0];
        for (std::size_t i = 0; i < xs.size(); ++i)
            v += inv_sqrt_n * weights[i] * kernel_entry(order, x, xs[i]);
        return v;
    };
}

}  // namespace

FitModel fit_constrained_krr(const DesignSample& data, int beta, OdeKind variant, double C) {
    data.validate();
    if (beta < 0 || beta > 8) throw DomainError("fit_constrained_krr: beta must be in [0, 8]");
    if (!(C > 0.0)) throw DomainError("fit_constrained_krr: C must be positive");

    const int n = data.n();
    const MatrixXd Ktop = build_kernel(beta + 1, data.xs).matrix;
    const MatrixXd G = Ktop / std::sqrt(static_cast<double>(n));
    const MatrixXd Z = MatrixXd::Ones(n, 1);

    std::vector<Ellipsoid> ells;
    for (int k = 0; k <= beta + 1; ++k) {
        MatrixXd Q = (k == beta + 1 ? Ktop : build_kernel(k, data.xs).matrix) / n;
        Q += (1e-12 * Q.trace() / n) * MatrixXd::Identity(n, n);
        const double base = (variant == OdeKind::autonomous)
                                ? factorial(k)
                                : std::pow(2.0, k) * factorial(k);
        ells.push_back({std::move(Q), C * base * base});
    }

    const VectorXd y = Eigen::Map<const VectorXd>(data.ys.data(), n);
    QcqpResult q = qcqp_solve(G, y, Z, ells);

    FitModel m;
    m.kind = FitKind::ConstrainedKRR;
    m.intercepts = {q.intercepts[0]};
    m.weights.assign(q.weights.data(), q.weights.data() + n);
    m.chosen_C = C;
    m.diagnostics = diagnostics_of(q);
    m.predictor = kernel_predictor(beta + 1, data.xs, m.intercepts, m.weights, false);
    return m;
}

FitModel fit_constrained_krr_cv(const DesignSample& data, int beta, OdeKind variant) {
    data.validate();
    const int folds = 5;
    double best_C = 1.0, best_err = std::numeric_limits<double>::infinity();
    for (int e = -4; e <= 4; ++e) {
        const double C = std::pow(10.0, 0.5 * e);
        double err = 0.0;
        int count = 0;
        for (int f = 0; f < folds; ++f) {
            DesignSample train;
            std::vector<std::pair<double, double>> held;
            train.sigma = data.sigma;
            for (int i = 0; i < data.n(); ++i) {
                if (i % folds == f)
                    held.emplace_back(data.xs[i], data.ys[i]);
                else {
                    train.xs.push_back(data.xs[i]);
                    train.ys.push_back(data.ys[i]);
                }
            }
            if (train.n() < 2 || held.empty()) continue;
            const FitModel m = fit_constrained_krr(train, beta, variant, C);
            for (auto [x, yv] : held) {
                const double r = m.predict(x) - yv;
                err += r * r;
                ++count;
            }
        }
        err /= std::max(count, 1);
        if (err < best_err - 1e-15) {
            best_err = err;
            best_C = C;
        }
    }
    FitModel m = fit_constrained_krr(data, beta, variant, best_C);
    m.chosen_C = best_C;
    return m;
}

SplineFitter::SplineFitter(std::vector<double> xs) : xs_(std::move(xs)) {
    const int n = static_cast<int>(xs_.size());
    if (n < 2) throw DomainError("SplineFitter: need at least two design points");
    K1_ = std::make_shared<Eigen::MatrixXd>(build_kernel(1, xs_).matrix);
    MatrixXd Z(n, 2);
    for (int i = 0; i < n; ++i) {
        Z(i, 0) = 1.0;
        Z(i, 1) = xs_[i];
    }
    MatrixXd Q = *K1_ / n;
    Q += (1e-12 * Q.trace() / n) * MatrixXd::Identity(n, n);
    solver_ = std::make_shared<const EllipsoidSolver>(
        MatrixXd(*K1_ / std::sqrt(static_cast<double>(n))), std::move(Z), std::move(Q));
}

FitModel SplineFitter::fit(const std::vector<double>& ys, double radius) const {
    if (ys.size() != xs_.size()) throw DomainError("SplineFitter: response size mismatch");
    const VectorXd y = Eigen::Map<const VectorXd>(ys.data(), static_cast<int>(ys.size()));
    QcqpResult q = solver_->solve(y, radius);

    FitModel m;
    m.kind = FitKind::SplineKRR;
    m.intercepts = {q.intercepts[0], q.intercepts[1]};
    m.weights.assign(q.weights.data(), q.weights.data() + q.weights.size());
    m.diagnostics = diagnostics_of(q);
    m.predictor = kernel_predictor(1, xs_, m.intercepts, m.weights, true);
    return m;
}

FitModel fit_standard_spline(const DesignSample& data, double radius) {
    data.validate();
    return SplineFitter(data.xs).fit(data.ys, radius);
}

// ---- parametric fits -------------------------------------------------------

namespace {

// RK4 solve of y' = f(x, y; theta) from x = 0, values returned at the
// (ascending) query points; nullptr-safe failure flag on box exit.
std::vector<double> solve_param_ode(const OdeParamModel& model, const std::vector<double>& theta,
                                    double y0, const std::vector<double>& xs, bool* failed) {
    const double box = model.y0_bound + model.b;
    const double h_max = 1.0 / 512.0;
    std::vector<double> out;
    out.reserve(xs.size());
    if (failed) *failed = false;

    double x = 0.0, y = y0;
    auto rhs = [&](double xx, double yy) { return model.f_param(xx, yy, theta); };
    for (double target : xs) {
        const int steps = std::max(1, static_cast<int>(std::ceil((target - x) / h_max)));
        const double h = (target - x) / steps;
        for (int s = 0; s < steps; ++s) {
            const double k1 = rhs(x, y);
            const double k2 = rhs(x + 0.5 * h, y + 0.5 * h * k1);
            const double k3 = rhs(x + 0.5 * h, y + 0.5 * h * k2);
            const double k4 = rhs(x + h, y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            x += h;
            if (std::abs(y) > box) {
                if (failed) *failed = true;
                return {};
            }
        }
        x = target;
        out.push_back(y);
    }
    return out;
}

double lq_norm(const std::vector<double>& v, double q) {
    if (std::isinf(q)) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
    double s = 0.0;
    for (double x : v) s += std::pow(std::abs(x), q);
    return std::pow(s, 1.0 / q);
}

// deterministic Nelder-Mead with standard coefficients
VectorXd nelder_mead(const std::function<double(const VectorXd&)>& f, const VectorXd& start,
                     double step, int max_iter) {
    const int d = static_cast<int>(start.size());
    std::vector<VectorXd> pts(d + 1, start);
    std::vector<double> vals(d + 1);
    for (int i = 0; i < d; ++i) pts[i + 1][i] += step;
    for (int i = 0; i <= d; ++i) vals[i] = f(pts[i]);

    auto order = [&] {
        std::vector<int> idx(d + 1);
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return vals[a] < vals[b]; });
        std::vector<VectorXd> p2(d + 1);
        std::vector<double> v2(d + 1);
        for (int i = 0; i <= d; ++i) {
            p2[i] = pts[idx[i]];
            v2[i] = vals[idx[i]];
        }
        pts.swap(p2);
        vals.swap(v2);
    };

    for (int it = 0; it < max_iter; ++it) {
        order();
        VectorXd centroid = VectorXd::Zero(d);
        for (int i = 0; i < d; ++i) centroid += pts[i];
        centroid /= d;

        const VectorXd refl = centroid + (centroid - pts[d]);
        const double f_refl = f(refl);
        if (f_refl < vals[0]) {
            const VectorXd expd = centroid + 2.0 * (centroid - pts[d]);
            const double f_expd = f(expd);
            if (f_expd < f_refl) {
                pts[d] = expd;
                vals[d] = f_expd;
            } else {
                pts[d] = refl;
                vals[d] = f_refl;
            }
        } else if (f_refl < vals[d - 1]) {
            pts[d] = refl;
            vals[d] = f_refl;
        } else {
            const VectorXd contr = centroid + 0.5 * (pts[d] - centroid);
            const double f_contr = f(contr);
            if (f_contr < vals[d]) {
                pts[d] = contr;
                vals[d] = f_contr;
            } else {
                for (int i = 1; i <= d; ++i) {
                    pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
                    vals[i] = f(pts[i]);
                }
            }
        }
    }
    order();
    return pts[0];
}

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> v(count);
    for (int i = 0; i < count; ++i) v[i] = lo + (hi - lo) * i / (count - 1);
    return v;
}

// enumerate the theta grid within the l_q unit ball
void enumerate_ball(int dim, double q, const std::vector<double>& axis,
                    const std::function<void(const std::vector<double>&)>& visit) {
    std::vector<double> theta(dim, 0.0);
    std::function<void(int)> rec = [&](int d) {
        if (d == dim) {
            if (lq_norm(theta, q) <= 1.0 + 1e-12) visit(theta);
            return;
        }
        for (double v : axis) {
            theta[d] = v;
            rec(d + 1);
        }
    };
    rec(0);
}

}  // namespace

FitModel fit_nls(const DesignSample& data, const OdeParamModel& model, int solver_grid) {
    data.validate();
    if (model.theta_dim < 1 || model.theta_dim > 3)
        throw DomainError("fit_nls: grid search supports theta_dim in [1, 3]");
    if (solver_grid < 2) throw DomainError("fit_nls: solver_grid must be >= 2");

    const int n = data.n();
    int discarded = 0;

    auto objective = [&](const std::vector<double>& theta, double y0) {
        bool failed = false;
        const std::vector<double> fit = solve_param_ode(model, theta, y0, data.xs, &failed);
        if (failed) {
            ++discarded;
            return std::numeric_limits<double>::infinity();
        }
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r = data.ys[i] - fit[i];
            s += r * r;
        }
        return s / (2.0 * n);
    };

    const std::vector<double> theta_axis = linspace(-1.0, 1.0, solver_grid);
    const std::vector<double> y0_axis =
        linspace(-model.y0_bound, model.y0_bound, solver_grid);

    std::vector<double> best_theta(model.theta_dim, 0.0);
    double best_y0 = 0.0;
    double best = std::numeric_limits<double>::infinity();
    enumerate_ball(model.theta_dim, model.q, theta_axis, [&](const std::vector<double>& theta) {
        for (double y0 : y0_axis) {
            const double v = objective(theta, y0);
            if (v < best) {
                best = v;
                best_theta = theta;
                best_y0 = y0;
            }
        }
    });

    // local refinement over (theta, y0) with a feasibility penalty
    const int d = model.theta_dim + 1;
    VectorXd start(d);
    for (int i = 0; i < model.theta_dim; ++i) start[i] = best_theta[i];
    start[d - 1] = best_y0;
    auto penalized = [&](const VectorXd& z) {
        std::vector<double> theta(z.data(), z.data() + model.theta_dim);
        const double y0 = z[d - 1];
        if (lq_norm(theta, model.q) > 1.0 + 1e-12 || std::abs(y0) > model.y0_bound + 1e-12)
            return 1e30;
        return objective(theta, y0);
    };
    const VectorXd z = nelder_mead(penalized, start, 0.05, 200);

    FitModel m;
    m.kind = FitKind::NLS;
    m.weights.assign(z.data(), z.data() + model.theta_dim);
    m.y0_hat = z[d - 1];
    m.diagnostics.objective = penalized(z);
    m.diagnostics.iterations = 200;
    m.diagnostics.discarded_candidates = discarded;
    const std::vector<double> theta = m.weights;
    const double y0 = m.y0_hat;
    m.predictor = [model, theta, y0](double x) {
        bool failed = false;
        const std::vector<double> v = solve_param_ode(model, theta, y0, {x}, &failed);
        if (failed) throw IntegrationFailure("NLS predictor left the state box");
        return v[0];
    };
    return m;
}

PicardIterates::PicardIterates(const OdeParamModel& model, const std::vector<double>& theta,
                               double y0, int R, int T, double alpha_bar)
    : alpha_bar_(alpha_bar), R_(R), T_(T) {
    if (R < 0 || T < 1) throw DomainError("picard_iterates: need R >= 0, T >= 1");
    if (!(alpha_bar > 0.0 && alpha_bar < 1.0))
        throw DomainError("picard_iterates: alpha_bar must lie in (0, 1)");
    const double box = model.y0_bound + model.b;
    const double h = alpha_bar / T;

    nodes_.assign(R + 2, std::vector<double>(T + 1, y0));
    for (int r = 0; r <= R; ++r) {
        const auto& prev = nodes_[r];
        auto& next = nodes_[r + 1];
        double acc = 0.0;
        next[0] = y0;
        for (int j = 1; j <= T; ++j) {
            const double mid_x = (j - 0.5) * h;
            const double mid_y = 0.5 * (prev[j - 1] + prev[j]);
            acc += h * model.f_param(mid_x, mid_y, theta);
            next[j] = y0 + acc;
            if (std::abs(next[j]) > box) throw BoxExit(mid_x);
        }
    }
}

double PicardIterates::eval(int r, double x) const {
    if (r < 0 || r > R_ + 1) throw DomainError("PicardIterates::eval: iterate index out of range");
    if (x < -1e-12 || x > alpha_bar_ + 1e-12)
        throw DomainError("PicardIterates::eval: x outside [0, alpha_bar]");
    const double h = alpha_bar_ / T_;
    const double pos = std::clamp(x, 0.0, alpha_bar_) / h;
    const int j = std::min(static_cast<int>(pos), T_ - 1);
    const double frac = pos - j;
    return (1.0 - frac) * nodes_[r][j] + frac * nodes_[r][j + 1];
}

double PicardIterates::operator()(double x) const { return eval(R_ + 1, x); }

PicardIterates picard_iterates(const OdeParamModel& model, const std::vector<double>& theta,
                               double y0, int R, int T, double alpha_bar) {
    return PicardIterates(model, theta, y0, R, T, alpha_bar);
}

FitModel fit_picard(const DesignSample& data, const OdeParamModel& model, double y0_hat, int R,
                    int T, int solver_grid) {
    data.validate();
    if (model.theta_dim < 1 || model.theta_dim > 3)
        throw DomainError("fit_picard: grid search supports theta_dim in [1, 3]");
    const double alpha_bar = data.xs.back();
    if (!(alpha_bar < 1.0))
        throw DomainError("fit_picard: design points must stay below x = 1");

    const int n = data.n();
    int discarded = 0;
    auto objective = [&](const std::vector<double>& theta) {
        try {
            const PicardIterates it(model, theta, y0_hat, R, T, alpha_bar);
            double s = 0.0;
            for (int i = 0; i < n; ++i) {
                const double r = data.ys[i] - it(data.xs[i]);
                s += r * r;
            }
            return s / (2.0 * n);
        } catch (const BoxExit&) {
            ++discarded;
            return std::numeric_limits<double>::infinity();
        }
    };

    const std::vector<double> axis = linspace(-1.0, 1.0, solver_grid);
    std::vector<double> best_theta(model.theta_dim, 0.0);
    double best = std::numeric_limits<double>::infinity();
    enumerate_ball(model.theta_dim, model.q, axis, [&](const std::vector<double>& theta) {
        const double v = objective(theta);
        if (v < best) {
            best = v;
            best_theta = theta;
        }
    });

    VectorXd start = Eigen::Map<const VectorXd>(best_theta.data(), model.theta_dim);
    auto penalized = [&](const VectorXd& z) {
        std::vector<double> theta(z.data(), z.data() + model.theta_dim);
        if (lq_norm(theta, model.q) > 1.0 + 1e-12) return 1e30;
        return objective(theta);
    };
    const VectorXd z = nelder_mead(penalized, start, 0.05, 200);

    FitModel m;
    m.kind = FitKind::Picard;
    m.weights.assign(z.data(), z.data() + model.theta_dim);
    m.y0_hat = y0_hat;
    m.diagnostics.objective = penalized(z);
    m.diagnostics.iterations = 200;
    m.diagnostics.discarded_candidates = discarded;
    auto iterates = std::make_shared<PicardIterates>(model, m.weights, y0_hat, R, T, alpha_bar);
    m.predictor = [iterates](double x) { return (*iterates)(x); };
    return m;
}

double in_sample_mse(const FitModel& fit, const std::function<double(double)>& truth,
                     const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) {
        const double r = fit.predict(x) - truth(x);
        s += r * r;
    }
    return s / static_cast<double>(xs.size());
}

}  // namespace odes
