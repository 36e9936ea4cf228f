#include "rpcls/solvers.hpp"

#include <cmath>
#include <iostream>
#include <mutex>

namespace rpcls {

namespace {

std::mutex g_warning_mutex;
std::function<void(std::string_view)> g_warning_handler;

Matrix gram(const Matrix& P, double mu) {
    Matrix G = Matrix::Zero(P.cols(), P.cols());
    G.selfadjointView<Eigen::Lower>().rankUpdate(P.transpose());
    G = G.selfadjointView<Eigen::Lower>();
    G.diagonal().array() += mu;
    return G;
}

// Cholesky pivots below this ratio mean cond(P^T P) beyond ~1e14; let the SVD decide.
constexpr double kPivotRatioFloor = 1e-7;

}  // namespace

void set_warning_handler(std::function<void(std::string_view)> handler) {
    std::lock_guard lock(g_warning_mutex);
    g_warning_handler = std::move(handler);
}

void emit_warning(std::string_view message) {
    std::lock_guard lock(g_warning_mutex);
    if (g_warning_handler) {
        g_warning_handler(message);
    } else {
        std::cerr << "warning: " << message << '\n';
    }
}

SketchedProblem::SketchedProblem(Matrix P, Vector q, Vector c, bool with_spectral)
    : P_(std::move(P)), q_(std::move(q)), c_(std::move(c)) {
    if (P_.cols() < 1) throw DimensionError("SketchedProblem: P has no columns");
    if (c_.size() != P_.cols()) throw DimensionError("SketchedProblem: c length differs from cols(P)");
    if (q_.size() != P_.rows()) throw DimensionError("SketchedProblem: q length differs from rows(P)");
    if (with_spectral) spectral_ = compute_spectral(P_);
}

SketchedProblem::SketchedProblem(Matrix P, Vector q, Vector c, SpectralData spectral,
                                 std::optional<double> b_norm)
    : SketchedProblem(std::move(P), std::move(q), std::move(c), false) {
    if (spectral.V.rows() != P_.cols() || spectral.sigma.size() != P_.cols()) {
        throw DimensionError("SketchedProblem: spectral data does not match P");
    }
    spectral_ = std::move(spectral);
    b_norm_ = b_norm;
}

SketchedProblem SketchedProblem::from(const LSProblem& problem, const SketchOperator& op,
                                      bool with_spectral) {
    SketchedProblem sp(op.apply(problem.A()), op.apply(problem.b()),
                       problem.A().transpose() * problem.b(), with_spectral);
    sp.b_norm_ = problem.b().norm();
    return sp;
}

const SpectralData& SketchedProblem::spectral() const {
    if (!spectral_) throw InvalidArgument("SketchedProblem: spectral data was not computed");
    return *spectral_;
}

GramSolver::GramSolver(const Matrix& P, double mu) : mu_(mu) {
    if (mu < 0.0) throw InvalidArgument("GramSolver: mu must be >= 0");
    llt_.compute(gram(P, mu));
    bool ok = llt_.info() == Eigen::Success;
    if (ok) {
        const Vector d = llt_.matrixLLT().diagonal().cwiseAbs();
        ok = d.minCoeff() >= kPivotRatioFloor * d.maxCoeff();
    }
    if (ok) return;

    SpectralData sd = compute_spectral(P);
    const double smax = sd.sigma(0);
    const double smin = sd.sigma(sd.size() - 1);
    if (mu == 0.0 && (!(smax > 0.0) || smin < kRankTolerance * smax)) {
        throw SingularMatrixError("P^T P is numerically singular (sigma_min/sigma_max = " +
                                  std::to_string(smax > 0.0 ? smin / smax : 0.0) + ")");
    }
    emit_warning("Cholesky of P^T P + mu I failed or is ill-conditioned; using SVD solve");
    svd_ = std::move(sd);
}

Vector GramSolver::solve(const Vector& rhs) const {
    if (!svd_) return llt_.solve(rhs);
    const Vector d = (svd_->sigma.array().square() + mu_).inverse();
    return svd_->V * (d.asDiagonal() * (svd_->V.transpose() * rhs));
}

Vector solve_cls(const SketchedProblem& sp) {
    return GramSolver(sp.P()).solve(sp.P().transpose() * sp.q());
}

Vector solve_pcls(const SketchedProblem& sp) {
    return GramSolver(sp.P()).solve(sp.c());
}

Vector solve_ridge_cls(const SketchedProblem& sp, double mu) {
    if (!(mu > 0.0)) throw InvalidArgument("solve_ridge_cls: mu must be > 0");
    return GramSolver(sp.P(), mu).solve(sp.P().transpose() * sp.q());
}

Vector solve_ridge_pcls(const SketchedProblem& sp, double mu) {
    if (!(mu > 0.0)) throw InvalidArgument("solve_ridge_pcls: mu must be > 0");
    return GramSolver(sp.P(), mu).solve(sp.c());
}

double default_mu(const SketchedProblem& sp, double factor) {
    const Vector& sigma = sp.spectral().sigma;
    const double smin = sigma(sigma.size() - 1);
    return factor * smin * smin;
}

double robust_cls_objective(const Matrix& P, const Vector& q, const Vector& x, double rho) {
    const double t = (P * x - q).norm() + rho * std::sqrt(x.squaredNorm() + 1.0);
    return 0.5 * t * t;
}

Vector solve_robust_cls(const SketchedProblem& sp, double rho, const RobustClsOptions& options) {
    if (!(rho >= 0.0)) throw InvalidArgument("solve_robust_cls: rho must be >= 0");
    if (rho == 0.0) return solve_cls(sp);
    const Vector& q = sp.q();
    const double qnorm = q.norm();
    if (qnorm == 0.0) return Vector::Zero(sp.cols());

    std::optional<SpectralData> local;
    if (!sp.has_spectral()) local = compute_spectral(sp.P());
    const SpectralData& sd = sp.has_spectral() ? sp.spectral() : *local;

    const Vector qbar = sd.U.transpose() * q;
    const double qperp2 = (q - sd.U * qbar).squaredNorm();
    const Vector s2 = sd.sigma.array().square();

    // H(mu) = mu sqrt(1 + ||x(mu)||^2) - rho ||P x(mu) - q|| along the ridge path.
    struct Eval {
        double h, dh, scale;
    };
    auto eval = [&](double mu) {
        double x2 = 0.0, dx2 = 0.0, r2 = qperp2, dr2 = 0.0;
        for (Eigen::Index i = 0; i < s2.size(); ++i) {
            const double qb2 = qbar(i) * qbar(i);
            if (s2(i) == 0.0) {
                r2 += qb2;
                continue;
            }
            const double den = s2(i) + mu;
            x2 += s2(i) * qb2 / (den * den);
            dx2 -= 2.0 * s2(i) * qb2 / (den * den * den);
            r2 += mu * mu * qb2 / (den * den);
            dr2 += 2.0 * mu * s2(i) * qb2 / (den * den * den);
        }
        const double s = std::sqrt(1.0 + x2);
        const double t = std::sqrt(r2);
        const double dh = s + mu * dx2 / (2.0 * s) - (t > 0.0 ? rho * dr2 / (2.0 * t) : 0.0);
        return Eval{mu * s - rho * t, dh, mu * s + rho * t};
    };
    auto ridge_x = [&](double mu) {
        Vector y(s2.size());
        for (Eigen::Index i = 0; i < s2.size(); ++i) {
            y(i) = s2(i) == 0.0 ? 0.0 : sd.sigma(i) * qbar(i) / (s2(i) + mu);
        }
        return Vector(sd.V * y);
    };

    double lo = 0.0;
    double hi = rho * qnorm;
    Eval e = eval(lo);
    if (e.h >= 0.0) return ridge_x(lo);
    double mu = 0.5 * hi;
    for (int it = 0; it < options.max_iter; ++it) {
        e = eval(mu);
        if (std::abs(e.h) <= options.tol * e.scale || hi - lo <= 4e-16 * hi) return ridge_x(mu);
        if (e.h < 0.0) {
            lo = mu;
        } else {
            hi = mu;
        }
        double next = e.dh > 0.0 ? mu - e.h / e.dh : -1.0;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        mu = next;
    }
    throw ConvergenceError("solve_robust_cls: secular root-find did not converge", ridge_x(mu),
                           options.max_iter);
}

std::pair<Vector, Vector> cls_error_decomposition(const LSProblem& problem, const SketchOperator& op) {
    const Vector x_ls = solve_ols(problem);
    const Vector z = problem.b() - problem.A() * x_ls;
    const Matrix P = op.apply(problem.A());
    const GramSolver g(P);
    Vector lhs = g.solve(P.transpose() * op.apply(problem.b()));
    Vector rhs = x_ls + g.solve(P.transpose() * op.apply(z));
    return {std::move(lhs), std::move(rhs)};
}

std::pair<Vector, Vector> pcls_error_decomposition(const LSProblem& problem, const SketchOperator& op) {
    const Vector x_ls = solve_ols(problem);
    const Matrix P = op.apply(problem.A());
    const GramSolver g(P);
    Vector lhs = g.solve(problem.A().transpose() * problem.b());
    Vector rhs = g.solve(problem.A().transpose() * (problem.A() * x_ls));
    return {std::move(lhs), std::move(rhs)};
}

}  // namespace rpcls
