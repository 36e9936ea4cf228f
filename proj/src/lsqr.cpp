#include "rpcls/lsqr.hpp"

#include <cmath>
#include <functional>
#include <limits>

namespace rpcls {

namespace {

using Op = std::function<Vector(const Vector&)>;

// Paige-Saunders LSQR on min ||K z - b||. `recover` maps z to x in the original
// variables and `true_residual` returns ||A^T (A x - b)|| / ||A^T b||. The cheap
// recurrence estimate of ||K^T r|| gates the exact check.
LsqrResult lsqr(const Op& apply_k, const Op& apply_kt, const Vector& b, Eigen::Index n,
                const Op& recover, const std::function<double(const Vector&)>& true_residual,
                double tol, int max_iter, const char* name) {
    if (!(tol > 0.0)) throw InvalidArgument(std::string(name) + ": tol must be > 0");
    if (max_iter < 1) throw InvalidArgument(std::string(name) + ": max_iter must be >= 1");

    Vector z = Vector::Zero(n);
    Vector u = b;
    double beta = u.norm();
    if (beta == 0.0) return {recover(z), 0, 0.0};
    u /= beta;
    Vector v = apply_kt(u);
    double alpha = v.norm();
    if (alpha == 0.0) return {recover(z), 0, 0.0};
    v /= alpha;
    Vector w = v;

    const double ktb = alpha * beta;
    double phibar = beta;
    double rhobar = alpha;

    LsqrResult best{recover(z), 0, std::numeric_limits<double>::infinity()};
    for (int it = 1; it <= max_iter; ++it) {
        u = apply_k(v) - alpha * u;
        beta = u.norm();
        if (beta > 0.0) u /= beta;
        v = apply_kt(u) - beta * v;
        alpha = v.norm();
        if (alpha > 0.0) v /= alpha;

        const double rho = std::hypot(rhobar, beta);
        const double c = rhobar / rho;
        const double s = beta / rho;
        const double theta = s * alpha;
        rhobar = -c * alpha;
        const double phi = c * phibar;
        phibar = s * phibar;
        z += (phi / rho) * w;
        w = v - (theta / rho) * w;

        const double estimate = phibar * alpha * std::abs(c) / ktb;
        if (estimate <= tol || alpha == 0.0 || beta == 0.0) {
            Vector x = recover(z);
            const double res = true_residual(x);
            if (res < best.normal_residual) best = {x, it, res};
            if (res <= tol) return {std::move(x), it, res};
            if (alpha == 0.0 || beta == 0.0) break;
        }
    }
    if (!std::isfinite(best.normal_residual)) {
        best.x = recover(z);
        best.normal_residual = true_residual(best.x);
    }
    throw ConvergenceError(std::string(name) + ": no convergence within " + std::to_string(max_iter) +
                               " iterations (||A^T r||/||A^T b|| = " +
                               std::to_string(best.normal_residual) + ")",
                           best.x, max_iter);
}

std::function<double(const Vector&)> normal_residual_fn(const LSProblem& problem) {
    const double atb = (problem.A().transpose() * problem.b()).norm();
    return [&problem, atb](const Vector& x) {
        const double r = (problem.A().transpose() * (problem.A() * x - problem.b())).norm();
        return atb > 0.0 ? r / atb : r;
    };
}

}  // namespace

LsqrResult solve_lsqr(const LSProblem& problem, double tol, int max_iter) {
    const Matrix& A = problem.A();
    return lsqr([&](const Vector& x) { return Vector(A * x); },
                [&](const Vector& y) { return Vector(A.transpose() * y); }, problem.b(), A.cols(),
                [](const Vector& z) { return z; }, normal_residual_fn(problem), tol, max_iter,
                "solve_lsqr");
}

LsqrResult solve_preconditioned_lsqr(const LSProblem& problem, const Matrix& R, double tol,
                                     int max_iter) {
    const Matrix& A = problem.A();
    if (R.rows() != A.cols() || R.cols() != A.cols()) {
        throw DimensionError("solve_preconditioned_lsqr: R must be N x N");
    }
    const auto Rt = R.triangularView<Eigen::Upper>();
    auto recover = [Rt](const Vector& z) { return Vector(Rt.solve(z)); };
    return lsqr([&](const Vector& z) { return Vector(A * recover(z)); },
                [&](const Vector& y) { return Vector(Rt.transpose().solve(A.transpose() * y)); },
                problem.b(), A.cols(), recover, normal_residual_fn(problem), tol, max_iter,
                "solve_blendenpik");
}

Matrix sketch_preconditioner(const Matrix& P) {
    if (P.rows() < P.cols()) throw SingularMatrixError("sketch_preconditioner: need m >= N");
    Eigen::HouseholderQR<Matrix> qr(P);
    Matrix R = qr.matrixQR().topRows(P.cols()).triangularView<Eigen::Upper>();
    const Vector d = R.diagonal().cwiseAbs();
    if (!(d.maxCoeff() > 0.0) || d.minCoeff() < kRankTolerance * d.maxCoeff()) {
        throw SingularMatrixError("sketch_preconditioner: R factor of Phi A is numerically singular");
    }
    return R;
}

LsqrResult solve_blendenpik(const LSProblem& problem, const SketchOperator& op, double tol,
                            int max_iter) {
    return solve_preconditioned_lsqr(problem, sketch_preconditioner(op.apply(problem.A())), tol,
                                     max_iter);
}

}  // namespace rpcls
