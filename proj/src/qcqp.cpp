#include "odes/qcqp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace odes {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Least-squares data with the unconstrained block eliminated:
//   h(w) = (1/2n) |M (y - G w)|^2,  M = I - Z (Z'Z)^{-1} Z'.
struct Objective {
    MatrixXd G, Z, MG;
    MatrixXd A;   // G' M G
    Eigen::LLT<MatrixXd> ZtZ;
    int n = 0, p = 0;

    Objective(MatrixXd G_, MatrixXd Z_) : G(std::move(G_)), Z(std::move(Z_)) {
        n = static_cast<int>(G.rows());
        p = static_cast<int>(Z.cols());
        if (p > 0) ZtZ.compute(Z.transpose() * Z);
        MG = apply_m(G);
        A = MG.transpose() * MG;
    }

    MatrixXd apply_m(const MatrixXd& v) const {
        if (p == 0) return v;
        return v - Z * ZtZ.solve(Z.transpose() * v);
    }

    VectorXd rhs(const VectorXd& y) const { return MG.transpose() * y; }

    VectorXd gradient(const VectorXd& w, const VectorXd& b0) const { return (A * w - b0) / n; }

    double value(const VectorXd& y, const VectorXd& w) const {
        const VectorXd r = apply_m(y - G * w);
        return r.squaredNorm() / (2.0 * n);
    }

    VectorXd intercepts(const VectorXd& y, const VectorXd& w) const {
        if (p == 0) return VectorXd(0);
        return ZtZ.solve(Z.transpose() * (y - G * w));
    }
};

struct EllipsoidEig {
    MatrixXd U;
    VectorXd lambda;   // >= 0, descending not required
    double lambda_max = 0.0;
};

EllipsoidEig eigen_of(const MatrixXd& Q) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(Q);
    EllipsoidEig e;
    e.U = es.eigenvectors();
    e.lambda = es.eigenvalues().cwiseMax(0.0);
    e.lambda_max = e.lambda.maxCoeff();
    return e;
}

// Euclidean projection onto {w : w'Qw <= r} using the eigen-structure of Q:
// the multiplier t solves sum_i lambda_i c_i^2 / (1 + t lambda_i)^2 = r.
VectorXd project_ellipsoid(const EllipsoidEig& e, double r, const VectorXd& v) {
    VectorXd c = e.U.transpose() * v;
    double q = 0.0;
    for (int i = 0; i < c.size(); ++i) q += e.lambda[i] * c[i] * c[i];
    if (q <= r * (1.0 + 1e-15)) return v;
    if (r <= 0.0) {  // keep only nullspace components
        for (int i = 0; i < c.size(); ++i)
            if (e.lambda[i] > 1e-12 * std::max(e.lambda_max, 1e-300)) c[i] = 0.0;
        return e.U * c;
    }

    auto g = [&](double t) {
        double s = 0.0;
        for (int i = 0; i < c.size(); ++i) {
            const double d = 1.0 + t * e.lambda[i];
            s += e.lambda[i] * c[i] * c[i] / (d * d);
        }
        return s;
    };
    double lo = 0.0, hi = 1.0 / std::max(e.lambda_max, 1e-300);
    while (g(hi) > r) hi *= 2.0;
    for (int it = 0; it < 200 && (hi - lo) > 1e-16 * (1.0 + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > r ? lo : hi) = mid;
    }
    const double t = 0.5 * (lo + hi);
    for (int i = 0; i < c.size(); ++i) c[i] /= (1.0 + t * e.lambda[i]);
    return e.U * c;
}

// Dykstra's alternating projection onto the intersection of the ellipsoids.
VectorXd dykstra_project(const std::vector<EllipsoidEig>& eigs, const std::vector<double>& radii,
                         VectorXd v) {
    const std::size_t J = eigs.size();
    if (J == 0) return v;
    if (J == 1) return project_ellipsoid(eigs[0], radii[0], v);

    std::vector<VectorXd> incr(J, VectorXd::Zero(v.size()));
    VectorXd x = v;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double moved = 0.0;
        for (std::size_t j = 0; j < J; ++j) {
            const VectorXd u = x + incr[j];
            const VectorXd xn = project_ellipsoid(eigs[j], radii[j], u);
            incr[j] = u - xn;
            moved = std::max(moved, (xn - x).norm());
            x = xn;
        }
        if (moved <= 1e-14 * (1.0 + x.norm())) break;
    }
    return x;
}

struct ActiveSetResult {
    VectorXd w;
    std::vector<double> nu;  // multipliers in the (A + sum nu Q) w = b0 scaling
    bool ok = false;
    int iterations = 0;
};

// Newton iteration on the active constraints' slack equations; the
// linearization solves through the current Hessian A + sum nu_j Q_j.
// Constraints whose multiplier gets pinned at zero are dropped, newly
// violated ones are added, up to max_rounds outer rounds.
ActiveSetResult solve_active_set(const Objective& obj, const VectorXd& b0,
                                 const std::vector<MatrixXd>& Qs, const std::vector<double>& radii,
                                 std::vector<int> active, double ridge, int max_rounds = 16,
                                 bool fixed_face = false) {
    ActiveSetResult res;
    const int n = static_cast<int>(b0.size());
    const std::size_t J = Qs.size();
    std::vector<double> nu_all(J, 0.0);

    for (int round = 0; round < max_rounds; ++round) {
        const int m = static_cast<int>(active.size());
        VectorXd nu = VectorXd::Zero(m);
        for (int i = 0; i < m; ++i) nu[i] = nu_all[active[i]];

        VectorXd w;
        bool newton_ok = false;
        int pinned = -1;
        for (int it = 0; it < 160; ++it) {
            MatrixXd H = obj.A + ridge * MatrixXd::Identity(n, n);
            for (int i = 0; i < m; ++i) H += nu[i] * Qs[active[i]];
            Eigen::LDLT<MatrixXd> ldlt(H);
            if (ldlt.info() != Eigen::Success) return res;
            w = ldlt.solve(b0);
            ++res.iterations;

            VectorXd F(m);
            MatrixXd Qw(n, std::max(m, 1));
            for (int i = 0; i < m; ++i) {
                Qw.col(i) = Qs[active[i]] * w;
                F[i] = w.dot(Qw.col(i)) - radii[active[i]];
            }
            bool done = true;
            for (int i = 0; i < m; ++i)
                if (std::abs(F[i]) > 1e-13 * std::max(1.0, radii[active[i]])) done = false;
            if (m == 0 || done) {
                newton_ok = true;
                break;
            }

            const MatrixXd X = ldlt.solve(MatrixXd(Qw.leftCols(m)));
            const MatrixXd Jac = -2.0 * Qw.leftCols(m).transpose() * X;
            Eigen::FullPivLU<MatrixXd> lu(Jac);
            if (!lu.isInvertible()) return res;
            const VectorXd step = lu.solve(-F);

            // damp so multipliers stay nonnegative
            double damp = 1.0;
            int blocker = -1;
            for (int i = 0; i < m; ++i)
                if (step[i] < 0.0 && nu[i] + step[i] < 0.0) {
                    const double s = -nu[i] / step[i];
                    if (s < damp) {
                        damp = s;
                        blocker = i;
                    }
                }
            if (damp < 1e-10) {
                pinned = active[blocker];  // wants a negative multiplier: not active
                break;
            }
            nu += damp * step;
            for (int i = 0; i < m; ++i) nu[i] = std::max(0.0, nu[i]);
        }

        if (pinned >= 0 && !fixed_face) {
            nu_all[pinned] = 0.0;
            active.erase(std::remove(active.begin(), active.end(), pinned), active.end());
            continue;
        }
        if (!newton_ok || pinned >= 0) return res;
        for (int i = 0; i < m; ++i) nu_all[active[i]] = std::max(0.0, nu[i]);

        // add the most violated inactive constraint, if any
        int add = -1;
        double worst = -1e-12;
        for (std::size_t j = 0; j < J; ++j) {
            if (std::find(active.begin(), active.end(), static_cast<int>(j)) != active.end())
                continue;
            const double rel = (radii[j] - w.dot(Qs[j] * w)) / std::max(1.0, radii[j]);
            if (rel < worst) {
                worst = rel;
                add = static_cast<int>(j);
            }
        }
        if (add >= 0) {
            if (fixed_face) return res;  // this face is not the optimal one
            active.push_back(add);
            std::sort(active.begin(), active.end());
            continue;
        }

        res.w = w;
        res.nu = nu_all;
        res.ok = true;
        return res;
    }
    return res;
}

// Exhaustive enumeration of candidate active faces, feasible for small
// constraint counts; returns the first face whose Newton solve verifies as a
// KKT point.
ActiveSetResult enumerate_faces(const Objective& obj, const VectorXd& b0,
                                const std::vector<MatrixXd>& Qs, const std::vector<double>& radii,
                                double ridge) {
    const int J = static_cast<int>(Qs.size());
    std::vector<std::vector<int>> faces;
    for (unsigned mask = 1; mask < (1u << J); ++mask) {
        std::vector<int> face;
        for (int j = 0; j < J; ++j)
            if (mask & (1u << j)) face.push_back(j);
        faces.push_back(std::move(face));
    }
    std::stable_sort(faces.begin(), faces.end(),
                     [](const auto& a, const auto& b) { return a.size() < b.size(); });
    ActiveSetResult best;
    for (const auto& face : faces) {
        ActiveSetResult as = solve_active_set(obj, b0, Qs, radii, face, ridge, 2, true);
        best.iterations += as.iterations;
        if (as.ok) {
            as.iterations = best.iterations;
            return as;
        }
    }
    return best;
}

// Projected gradient ascent on the concave dual q(nu) = min_w [h(w) +
// (1/2n) sum nu_j (w'Q_j w - r_j)], nu >= 0. Robust against dependent
// constraint gradients and weakly active constraints; one factorization per
// step. Used when the active-set polish cannot certify a KKT point.
struct DualResult {
    VectorXd w;
    VectorXd nu;
    bool converged = false;
    int iterations = 0;
};

DualResult dual_ascent(const Objective& obj, const VectorXd& b0, const std::vector<MatrixXd>& Qs,
                       const std::vector<double>& radii, double ridge, VectorXd nu0) {
    const int n_dim = static_cast<int>(b0.size());
    const int J = static_cast<int>(Qs.size());
    const double n = static_cast<double>(obj.n);

    auto eval = [&](const VectorXd& v, VectorXd& w, VectorXd& c) {
        MatrixXd H = obj.A + ridge * MatrixXd::Identity(n_dim, n_dim);
        for (int j = 0; j < J; ++j) H += v[j] * Qs[j];
        Eigen::LDLT<MatrixXd> ldlt(H);
        w = ldlt.solve(b0);
        double q = 0.5 * w.dot(obj.A * w) / n - w.dot(b0) / n;
        c.resize(J);
        for (int j = 0; j < J; ++j) {
            c[j] = w.dot(Qs[j] * w) - radii[j];
            q += v[j] * c[j] / (2.0 * n);
        }
        return q;
    };

    DualResult res;
    VectorXd nu = nu0.cwiseMax(0.0);
    VectorXd w, c;
    double q = eval(nu, w, c);
    double step = 1.0;
    for (int it = 0; it < 4000; ++it) {
        ++res.iterations;
        bool done = true;
        for (int j = 0; j < J; ++j) {
            const double scale = std::max(1.0, radii[j]);
            if (c[j] > 1e-11 * scale) done = false;                    // feasibility
            if (nu[j] * std::abs(c[j]) > 2.0 * n * 1e-9 * scale) done = false;  // complementarity
        }
        if (done) {
            res.converged = true;
            break;
        }
        const VectorXd nu_try = (nu + (step / (2.0 * n)) * c).cwiseMax(0.0);
        VectorXd w2, c2;
        const double q2 = eval(nu_try, w2, c2);
        if (q2 > q && (nu_try - nu).norm() > 0.0) {
            nu = nu_try;
            q = q2;
            w.swap(w2);
            c.swap(c2);
            step *= 1.5;
        } else {
            step *= 0.5;
            if (step < 1e-16) break;
        }
    }
    res.w = w;
    res.nu = nu;
    return res;
}

// stationarity + complementarity residual of the assembled KKT point
double kkt_residual_of(const Objective& obj, const VectorXd& b0, const VectorXd& w,
                       const std::vector<MatrixXd>& Qs, const std::vector<double>& radii,
                       const std::vector<double>& mu) {
    VectorXd g = obj.gradient(w, b0);
    for (std::size_t j = 0; j < Qs.size(); ++j) g += mu[j] * 2.0 * (Qs[j] * w);
    double comp = 0.0;
    for (std::size_t j = 0; j < Qs.size(); ++j) {
        const double slack = radii[j] - w.dot(Qs[j] * w);
        comp = std::max(comp, std::abs(mu[j] * slack));
    }
    return std::max(g.norm(), comp);
}

// nonnegative least squares |g0 + C mu|^2 over mu >= 0 (tiny dimension),
// used to estimate multipliers for the fallback residual report
VectorXd nnls_multipliers(const VectorXd& g0, const MatrixXd& C) {
    const int m = static_cast<int>(C.cols());
    VectorXd mu = VectorXd::Zero(m);
    if (m == 0) return mu;
    const MatrixXd CtC = C.transpose() * C;
    const VectorXd Ctg = C.transpose() * g0;
    for (int sweep = 0; sweep < 200; ++sweep) {
        double change = 0.0;
        for (int j = 0; j < m; ++j) {
            const double denom = CtC(j, j);
            if (denom <= 0.0) continue;
            double v = mu[j] - (Ctg[j] + (CtC.row(j) * mu)) / denom;
            v = std::max(0.0, v);
            change = std::max(change, std::abs(v - mu[j]));
            mu[j] = v;
        }
        if (change < 1e-14 * (1.0 + mu.cwiseAbs().maxCoeff())) break;
    }
    return mu;
}

QcqpResult assemble(const Objective& obj, const VectorXd& y, const VectorXd& w,
                    const std::vector<MatrixXd>& Qs, const std::vector<double>& radii,
                    const std::vector<double>& mu, int iterations, bool converged,
                    const VectorXd& b0) {
    QcqpResult r;
    r.weights = w;
    r.intercepts = obj.intercepts(y, w);
    r.objective = obj.value(y, w);
    r.slacks.resize(Qs.size());
    for (std::size_t j = 0; j < Qs.size(); ++j) r.slacks[j] = radii[j] - w.dot(Qs[j] * w);
    r.multipliers = mu;
    r.kkt_residual = kkt_residual_of(obj, b0, w, Qs, radii, mu);
    r.iterations = iterations;
    r.converged = converged;
    return r;
}

double ridge_of(const MatrixXd& A, double scale) {
    const int n = static_cast<int>(A.rows());
    return scale * std::max(A.trace() / std::max(n, 1), 0.0) + 1e-300;
}

// Minimum-norm unconstrained minimizer through a truncated eigen-solve.
// Directions with eigenvalue below 1e-12 of the largest carry no signal,
// only rounding noise, and are dropped; a gradient already at rounding
// level returns the zero weights exactly.
struct MinNormSolver {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es;
    double b0_floor;  // rounding scale of G' M y

    MinNormSolver(const MatrixXd& A, const MatrixXd& MG) : es(A) {
        b0_floor = 1e-12 * MG.norm();
    }

    VectorXd solve(const VectorXd& b0, double y_norm) const {
        const int n = static_cast<int>(b0.size());
        if (b0.norm() <= b0_floor * std::max(y_norm, 1.0)) return VectorXd::Zero(n);
        const double lmax = std::max(es.eigenvalues().maxCoeff(), 0.0);
        VectorXd c = es.eigenvectors().transpose() * b0;
        for (int i = 0; i < n; ++i) {
            const double lam = es.eigenvalues()[i];
            c[i] = (lam > 1e-12 * std::max(lmax, 1e-300)) ? c[i] / lam : 0.0;
        }
        return es.eigenvectors() * c;
    }

};

// When A is singular the minimizers form an affine set w + null(A); this
// operator moves a minimizer to the member with the least Q-form, which
// decides feasibility of the unconstrained optimum canonically. The factors
// are built once so apply() is O(n * nullity).
struct NullspaceQAdjust {
    MatrixXd N;    // null(A) basis
    MatrixXd QN;   // Q N
    MatrixXd V;    // eigenvectors of N'QN
    VectorXd inv;  // pseudo-inverted eigenvalues

    NullspaceQAdjust(const Eigen::SelfAdjointEigenSolver<MatrixXd>& es, const MatrixXd& Q) {
        const double lmax = std::max(es.eigenvalues().maxCoeff(), 0.0);
        std::vector<int> null_idx;
        for (int i = 0; i < es.eigenvalues().size(); ++i)
            if (es.eigenvalues()[i] <= 1e-12 * std::max(lmax, 1e-300)) null_idx.push_back(i);
        if (null_idx.empty()) return;
        N.resize(es.eigenvectors().rows(), static_cast<int>(null_idx.size()));
        for (std::size_t i = 0; i < null_idx.size(); ++i)
            N.col(i) = es.eigenvectors().col(null_idx[i]);
        QN = Q * N;
        Eigen::SelfAdjointEigenSolver<MatrixXd> esH(N.transpose() * QN);
        V = esH.eigenvectors();
        const double hmax = std::max(esH.eigenvalues().maxCoeff(), 0.0);
        inv = esH.eigenvalues();
        for (int i = 0; i < inv.size(); ++i)
            inv[i] = (inv[i] > 1e-12 * std::max(hmax, 1e-300)) ? 1.0 / inv[i] : 0.0;
    }

    VectorXd apply(const VectorXd& w) const {
        if (N.cols() == 0) return w;
        const VectorXd c = inv.cwiseProduct(V.transpose() * (QN.transpose() * w));
        return w - N * (V * c);
    }
};

// ---- single-ellipsoid engine ----------------------------------------------

// Safeguarded Newton on the boundary equation w(nu)' Q w(nu) = r with
// w(nu) = (A + nu Q + ridge)^{-1} b0, used to refine multiplier estimates
// when the fast whitened solve loses accuracy (singular Q with independent
// A directions). One LDLT factorization per step.
struct BoundaryRefinement {
    VectorXd w;
    double nu = 0.0;
    bool ok = false;
};

BoundaryRefinement refine_on_boundary(const MatrixXd& A, const MatrixXd& Q, const VectorXd& b0,
                                      double r, double nu_init, double ridge) {
    BoundaryRefinement out;
    const int n = static_cast<int>(b0.size());
    double nu = std::max(nu_init, 0.0);
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 80; ++it) {
        const MatrixXd H = A + nu * Q + ridge * MatrixXd::Identity(n, n);
        Eigen::LDLT<MatrixXd> ldlt(H);
        if (ldlt.info() != Eigen::Success) return out;
        const VectorXd w = ldlt.solve(b0);
        const VectorXd Qw = Q * w;
        const double g = w.dot(Qw) - r;
        if (std::abs(g) <= 1e-13 * std::max(r, 1e-300)) {
            out.w = w;
            out.nu = nu;
            out.ok = true;
            return out;
        }
        if (g > 0.0)
            lo = nu;  // constraint still violated: need larger nu
        else
            hi = nu;
        const double dg = -2.0 * Qw.dot(ldlt.solve(Qw));
        double next = (dg < 0.0) ? nu - g / dg : -1.0;
        if (!(next > lo) || !(next < hi))
            next = std::isinf(hi) ? std::max(2.0 * nu, 1.0) : 0.5 * (lo + hi);
        nu = next;
    }
    return out;
}

struct SecularCore {
    // whitened coordinates: w = P eta, P' A P = diag(d), P' Q P = I
    MatrixXd P;
    VectorXd d;
    MatrixXd Q;  // original constraint matrix

    SecularCore(const MatrixXd& A, const MatrixXd& Q_, double ridge) : Q(Q_) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> esq(Q);
        VectorXd lam = esq.eigenvalues().cwiseMax(ridge);
        const MatrixXd S = esq.eigenvectors() * lam.cwiseSqrt().cwiseInverse().asDiagonal();
        const MatrixXd B = S.transpose() * A * S;
        Eigen::SelfAdjointEigenSolver<MatrixXd> esb(B);
        P = S * esb.eigenvectors();
        d = esb.eigenvalues().cwiseMax(0.0);
    }

    // solves (A + nu Q) w = b0 with w'Qw = r, assuming infeasible at nu = 0
    VectorXd solve_on_boundary(const VectorXd& b0, double r, double* nu_out, int* iters) const {
        const VectorXd c = P.transpose() * b0;
        auto g = [&](double nu) {
            double s = 0.0;
            for (int i = 0; i < c.size(); ++i) {
                const double den = d[i] + nu;
                s += (c[i] * c[i]) / (den * den);
            }
            return s;
        };
        double lo = 0.0;
        double hi = std::max(1e-8, 1e-3 * (d.maxCoeff() + 1.0));
        int used = 0;
        while (g(hi) > r && used < 400) {
            hi *= 2.0;
            ++used;
        }
        for (int it = 0; it < 240; ++it) {
            ++used;
            const double mid = 0.5 * (lo + hi);
            if (g(mid) > r)
                lo = mid;
            else
                hi = mid;
            if ((hi - lo) <= 1e-15 * (1.0 + hi)) break;
        }
        const double nu = 0.5 * (lo + hi);
        if (nu_out) *nu_out = nu;
        if (iters) *iters = used;
        VectorXd eta(c.size());
        for (int i = 0; i < c.size(); ++i) eta[i] = c[i] / (d[i] + nu);
        return P * eta;
    }
};

}  // namespace

struct EllipsoidSolver::Impl {
    Objective obj;
    MatrixXd Q;
    MinNormSolver unconstrained;
    NullspaceQAdjust adjust;
    SecularCore core;

    Impl(MatrixXd G, MatrixXd Z, MatrixXd Q_, const QcqpOptions& opts)
        : obj(std::move(G), std::move(Z)),
          Q(std::move(Q_)),
          unconstrained(obj.A, obj.MG),
          adjust(unconstrained.es, Q),
          core(obj.A, Q, ridge_of(Q, opts.ridge_scale)) {}
};

EllipsoidSolver::EllipsoidSolver(MatrixXd G, MatrixXd Z, MatrixXd Q, const QcqpOptions& opts)
    : impl_(std::make_unique<Impl>(std::move(G), std::move(Z), std::move(Q), opts)) {}
EllipsoidSolver::~EllipsoidSolver() = default;
EllipsoidSolver::EllipsoidSolver(EllipsoidSolver&&) noexcept = default;

QcqpResult EllipsoidSolver::solve(const VectorXd& y, double radius) const {
    const Impl& im = *impl_;
    const VectorXd b0 = im.obj.rhs(y);
    const std::vector<MatrixXd> Qs{im.Q};
    const std::vector<double> radii{radius};

    const VectorXd w_free = im.adjust.apply(im.unconstrained.solve(b0, y.norm()));
    if (w_free.dot(im.Q * w_free) <= radius * (1.0 + 1e-12))
        return assemble(im.obj, y, w_free, Qs, radii, {0.0}, 0, true, b0);

    double nu = 0.0;
    int iters = 0;
    const VectorXd w = im.core.solve_on_boundary(b0, radius, &nu, &iters);
    const double n = static_cast<double>(im.obj.n);
    QcqpResult res = assemble(im.obj, y, w, Qs, radii, {nu / (2.0 * n)}, iters, true, b0);

    // the whitened basis can be inaccurate when Q is near singular; verify
    // and refine in the original coordinates if needed
    if (res.kkt_residual > 1e-9 * (1.0 + b0.norm() / n) ||
        res.slacks[0] < -1e-10 * std::max(1.0, radius)) {
        const auto ref = refine_on_boundary(im.obj.A, im.Q, b0, radius, nu,
                                            ridge_of(im.obj.A, 1e-12));
        if (ref.ok)
            res = assemble(im.obj, y, ref.w, Qs, radii, {ref.nu / (2.0 * n)}, iters + 80, true,
                           b0);
    }
    return res;
}

QcqpResult qcqp_solve(const MatrixXd& G, const VectorXd& y, const MatrixXd& Z,
                      const std::vector<Ellipsoid>& ellipsoids, const QcqpOptions& opts) {
    const int n_w = static_cast<int>(G.cols());
    for (const auto& e : ellipsoids) {
        if (e.Q.rows() != n_w || e.Q.cols() != n_w)
            throw DomainError("qcqp_solve: ellipsoid dimension mismatch");
        if (e.radius < 0.0) throw DomainError("qcqp_solve: negative radius");
    }

    // Radius-zero constraints pin w to the joint nullspace; restrict first.
    MatrixXd N = MatrixXd::Identity(n_w, n_w);
    for (const auto& e : ellipsoids) {
        if (e.radius > 0.0) continue;
        const MatrixXd Qr = N.transpose() * e.Q * N;
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(Qr);
        const double lmax = std::max(es.eigenvalues().maxCoeff(), 0.0);
        std::vector<int> keep;
        for (int i = 0; i < es.eigenvalues().size(); ++i)
            if (es.eigenvalues()[i] <= 1e-12 * std::max(lmax, 1e-300)) keep.push_back(i);
        MatrixXd basis(N.cols(), static_cast<int>(keep.size()));
        for (std::size_t i = 0; i < keep.size(); ++i) basis.col(i) = es.eigenvectors().col(keep[i]);
        N = N * basis;
    }

    Objective obj_full(G, Z);
    std::vector<MatrixXd> Qs_full;
    std::vector<double> radii_full;
    for (const auto& e : ellipsoids) {
        Qs_full.push_back(e.Q);
        radii_full.push_back(e.radius);
    }

    if (N.cols() == 0) {
        const VectorXd w = VectorXd::Zero(n_w);
        std::vector<double> mu(ellipsoids.size(), 0.0);
        return assemble(obj_full, y, w, Qs_full, radii_full, mu, 0, true, obj_full.rhs(y));
    }

    const bool reduced = N.cols() < n_w;
    Objective obj = reduced ? Objective(G * N, Z) : std::move(obj_full);
    std::vector<MatrixXd> Qs;
    std::vector<double> radii;
    std::vector<std::size_t> live;  // indices of nonzero-radius ellipsoids
    for (std::size_t j = 0; j < ellipsoids.size(); ++j) {
        if (ellipsoids[j].radius <= 0.0) continue;
        Qs.push_back(reduced ? MatrixXd(N.transpose() * ellipsoids[j].Q * N) : ellipsoids[j].Q);
        radii.push_back(ellipsoids[j].radius);
        live.push_back(j);
    }

    const double ridge = ridge_of(obj.A, opts.ridge_scale);
    const VectorXd b0 = obj.rhs(y);
    const int n_red = static_cast<int>(obj.A.rows());

    auto expand = [&](const VectorXd& w_red, const std::vector<double>& mu_red, int iters,
                      bool converged) {
        VectorXd w = reduced ? VectorXd(N * w_red) : w_red;
        std::vector<double> mu(ellipsoids.size(), 0.0);
        for (std::size_t i = 0; i < live.size(); ++i) mu[live[i]] = mu_red[i];
        Objective obj_report(G, Z);
        return assemble(obj_report, y, w, Qs_full, radii_full, mu, iters, converged,
                        obj_report.rhs(y));
    };

    // unconstrained attempt; with a single constraint, resolve minimizer
    // degeneracy toward the least constraint form
    const MinNormSolver free_solver(obj.A, obj.MG);
    VectorXd w_free = free_solver.solve(b0, y.norm());
    if (Qs.size() == 1) w_free = NullspaceQAdjust(free_solver.es, Qs[0]).apply(w_free);
    bool feasible = true;
    for (std::size_t j = 0; j < Qs.size(); ++j)
        if (w_free.dot(Qs[j] * w_free) > radii[j] * (1.0 + 1e-12)) feasible = false;
    if (feasible) return expand(w_free, std::vector<double>(Qs.size(), 0.0), 0, true);

    const double n = static_cast<double>(obj.n);

    if (Qs.size() == 1) {
        SecularCore core(obj.A, Qs[0], ridge_of(Qs[0], opts.ridge_scale));
        double nu = 0.0;
        int iters = 0;
        const VectorXd w = core.solve_on_boundary(b0, radii[0], &nu, &iters);
        QcqpResult res = expand(w, {nu / (2.0 * n)}, iters, true);
        if (res.kkt_residual > 1e-9 * (1.0 + b0.norm() / n) ||
            res.slacks[live[0]] < -1e-10 * std::max(1.0, radii[0])) {
            const auto ref =
                refine_on_boundary(obj.A, Qs[0], b0, radii[0], nu, ridge);
            if (ref.ok) res = expand(ref.w, {ref.nu / (2.0 * n)}, iters + 80, true);
        }
        return res;
    }

    // FISTA with Dykstra projections
    std::vector<EllipsoidEig> eigs;
    eigs.reserve(Qs.size());
    for (const auto& Q : Qs) eigs.push_back(eigen_of(Q));

    Eigen::SelfAdjointEigenSolver<MatrixXd> esA(obj.A);
    const double lip = std::max(esA.eigenvalues().maxCoeff(), 1e-300) / n;

    VectorXd w = dykstra_project(eigs, radii, w_free);
    VectorXd v = w, w_prev = w;
    double t = 1.0;
    double f_prev = std::numeric_limits<double>::infinity();
    int iter = 0;
    const int budget = std::max(100, opts.max_iterations);

    // The projected-gradient phase supplies active-set guesses; the exact
    // Newton polish finishes from them. Try to polish early and fall back to
    // more FISTA sweeps only when the guess was wrong.
    auto try_polish = [&]() -> ActiveSetResult {
        std::vector<int> active;
        for (std::size_t j = 0; j < Qs.size(); ++j) {
            const double slack = radii[j] - w.dot(Qs[j] * w);
            if (slack <= 1e-4 * std::max(1.0, radii[j])) active.push_back(static_cast<int>(j));
        }
        if (active.empty()) return {};
        return solve_active_set(obj, b0, Qs, radii, active, ridge);
    };

    int next_polish = 100;
    ActiveSetResult as;
    for (; iter < budget; ++iter) {
        const VectorXd grad = obj.gradient(v, b0);
        const VectorXd w_new = dykstra_project(eigs, radii, v - grad / lip);
        const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double f_new = 0.5 * w_new.dot(obj.A * w_new) / n - w_new.dot(b0) / n;
        if (f_new > f_prev) {  // adaptive restart
            v = w_new;
            t = 1.0;
        } else {
            v = w_new + ((t - 1.0) / t_new) * (w_new - w);
            t = t_new;
        }
        f_prev = f_new;
        w_prev = w;
        w = w_new;
        const bool stalled =
            iter % 10 == 9 && (w - w_prev).norm() <= 1e-12 * (1.0 + w.norm());
        if (iter + 1 >= next_polish || stalled) {
            as = try_polish();
            if (as.ok) break;
            if (stalled) break;
            next_polish *= 4;
        }
    }
    if (!as.ok) as = try_polish();

    auto acceptable = [&](const QcqpResult& r) {
        if (r.kkt_residual > 1e-8 * (1.0 + b0.norm() / n)) return false;
        for (std::size_t j = 0; j < r.slacks.size(); ++j)
            if (r.slacks[j] < -1e-9 * std::max(1.0, radii_full[j])) return false;
        return true;
    };

    if (as.ok) {
        std::vector<double> mu(Qs.size(), 0.0);
        for (std::size_t j = 0; j < Qs.size(); ++j) mu[j] = as.nu[j] / (2.0 * n);
        QcqpResult res = expand(as.w, mu, iter + as.iterations, true);
        if (acceptable(res)) return res;
    }

    // robust fallback: projected dual ascent from the best multiplier guess
    VectorXd nu0 = VectorXd::Zero(static_cast<int>(Qs.size()));
    if (as.ok)
        for (std::size_t j = 0; j < Qs.size(); ++j) nu0[j] = as.nu[j];
    else {
        const VectorXd g0 = obj.gradient(w, b0);
        MatrixXd C(n_red, static_cast<int>(Qs.size()));
        for (std::size_t j = 0; j < Qs.size(); ++j) C.col(j) = 2.0 * (Qs[j] * w);
        nu0 = 2.0 * n * nnls_multipliers(g0, C);
    }
    DualResult dr = dual_ascent(obj, b0, Qs, radii, ridge, nu0);
    for (std::size_t j = 0; j < Qs.size(); ++j)
        if (radii[j] - dr.w.dot(Qs[j] * dr.w) > 1e-6 * std::max(1.0, radii[j])) dr.nu[j] = 0.0;
    if (dr.converged) {
        std::vector<double> mu(Qs.size());
        for (std::size_t j = 0; j < Qs.size(); ++j) mu[j] = dr.nu[j] / (2.0 * n);
        QcqpResult res = expand(dr.w, mu, iter + dr.iterations, true);
        if (acceptable(res)) return res;
    }

    // degenerate faces: enumerate candidate active sets outright when the
    // constraint count allows it
    if (Qs.size() <= 8) {
        const ActiveSetResult af = enumerate_faces(obj, b0, Qs, radii, ridge);
        if (af.ok) {
            std::vector<double> mu(Qs.size());
            for (std::size_t j = 0; j < Qs.size(); ++j) mu[j] = af.nu[j] / (2.0 * n);
            QcqpResult res = expand(af.w, mu, iter + af.iterations, true);
            if (acceptable(res)) return res;
        }
    }

    // Last resort: a certainly-feasible iterate with honestly estimated
    // multipliers and converged = false. Prefer the dual iterate after
    // projection when it improves the objective.
    VectorXd w_best = w;
    {
        const VectorXd w_proj = dykstra_project(eigs, radii, dr.w);
        const double h_fista = 0.5 * w.dot(obj.A * w) / n - w.dot(b0) / n;
        const double h_proj = 0.5 * w_proj.dot(obj.A * w_proj) / n - w_proj.dot(b0) / n;
        bool proj_feasible = true;
        for (std::size_t j = 0; j < Qs.size(); ++j)
            if (w_proj.dot(Qs[j] * w_proj) > radii[j] * (1.0 + 1e-10)) proj_feasible = false;
        if (proj_feasible && h_proj < h_fista) w_best = w_proj;
    }
    // complementary slackness: only near-active constraints may carry a
    // multiplier, otherwise huge slacks inflate the complementarity term
    std::vector<int> near_active;
    for (std::size_t j = 0; j < Qs.size(); ++j)
        if (radii[j] - w_best.dot(Qs[j] * w_best) <= 1e-6 * std::max(1.0, radii[j]))
            near_active.push_back(static_cast<int>(j));
    const VectorXd g0 = obj.gradient(w_best, b0);
    MatrixXd C(n_red, static_cast<int>(near_active.size()));
    for (std::size_t j = 0; j < near_active.size(); ++j)
        C.col(j) = 2.0 * (Qs[near_active[j]] * w_best);
    const VectorXd mu_est = nnls_multipliers(g0, C);
    std::vector<double> mu(Qs.size(), 0.0);
    for (std::size_t j = 0; j < near_active.size(); ++j) mu[near_active[j]] = mu_est[j];
    return expand(w_best, mu, iter + dr.iterations, false);
}

}  // namespace odes
