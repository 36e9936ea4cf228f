#pragma once

#include "rpcls/core.hpp"
#include "rpcls/sketch.hpp"

#include <functional>
#include <optional>
#include <string_view>
#include <utility>

namespace rpcls {

/// Installs the sink for non-fatal numerical warnings (default: stderr). Pass an
/// empty function to restore the default.
void set_warning_handler(std::function<void(std::string_view)> handler);
void emit_warning(std::string_view message);

/// Compressed data for one (problem, sketch) pair: P = Phi A, q = Phi b, c = A^T b.
class SketchedProblem {
public:
    SketchedProblem(Matrix P, Vector q, Vector c, bool with_spectral = false);
    /// Adopts precomputed spectral data of P (caller guarantees it matches).
    SketchedProblem(Matrix P, Vector q, Vector c, SpectralData spectral,
                    std::optional<double> b_norm = std::nullopt);

    static SketchedProblem from(const LSProblem& problem, const SketchOperator& op,
                                bool with_spectral = false);

    const Matrix& P() const noexcept { return P_; }
    const Vector& q() const noexcept { return q_; }
    const Vector& c() const noexcept { return c_; }
    Eigen::Index cols() const noexcept { return P_.cols(); }

    bool has_spectral() const noexcept { return spectral_.has_value(); }
    /// Throws InvalidArgument if the problem was built without spectral data.
    const SpectralData& spectral() const;

    /// ||b|| of the originating problem, when known.
    std::optional<double> b_norm() const noexcept { return b_norm_; }

private:
    Matrix P_;
    Vector q_;
    Vector c_;
    std::optional<SpectralData> spectral_;
    std::optional<double> b_norm_;
};

/// Factorization of P^T P + mu I used to apply its inverse.
///
/// Cholesky first; when it fails (or its pivots reveal severe ill-conditioning)
/// falls back to an SVD of P. The fallback raises SingularMatrixError if
/// sigma_min < 1e-12 sigma_max and mu == 0, otherwise solves with a warning.
class GramSolver {
public:
    explicit GramSolver(const Matrix& P, double mu = 0.0);

    Vector solve(const Vector& rhs) const;
    bool used_fallback() const noexcept { return svd_.has_value(); }

private:
    Eigen::LLT<Matrix> llt_;
    std::optional<SpectralData> svd_;
    double mu_;
};

/// Fully compressed LS: (P^T P)^{-1} P^T q.
Vector solve_cls(const SketchedProblem& sp);

/// Partially compressed LS: (P^T P)^{-1} c.
Vector solve_pcls(const SketchedProblem& sp);

/// (P^T P + mu I)^{-1} P^T q, i.e. the minimizer of 1/2||Px - q||^2 + mu/2 ||x||^2.
Vector solve_ridge_cls(const SketchedProblem& sp, double mu);

/// (P^T P + mu I)^{-1} c, i.e. the minimizer of 1/2||Px||^2 - c^T x + mu/2 ||x||^2.
Vector solve_ridge_pcls(const SketchedProblem& sp, double mu);

/// factor * sigma_min(P)^2. Requires spectral data.
double default_mu(const SketchedProblem& sp, double factor = 5.0);

/// Worst-case objective of the jointly perturbed compressed problem,
/// 1/2 (||Px - q|| + rho sqrt(||x||^2 + 1))^2.
double robust_cls_objective(const Matrix& P, const Vector& q, const Vector& x, double rho);

struct RobustClsOptions {
    double tol = 1e-10;  // relative tolerance on the secular function
    int max_iter = 200;
};

/// Minimizes robust_cls_objective. The minimizer is a ridge solution whose
/// parameter mu solves mu sqrt(1 + ||x(mu)||^2) = rho ||P x(mu) - q||; the root is
/// found by safeguarded Newton in the SVD basis of P.
/// Throws ConvergenceError (carrying the last iterate) if the root-find stalls.
Vector solve_robust_cls(const SketchedProblem& sp, double rho, const RobustClsOptions& options = {});

/// Returns (x_CLS, x_LS + (P^T P)^{-1} A^T Phi^T Phi z*) with z* = b - A x_LS.
std::pair<Vector, Vector> cls_error_decomposition(const LSProblem& problem, const SketchOperator& op);

/// Returns (x_PCLS, (P^T P)^{-1} A^T A x_LS).
std::pair<Vector, Vector> pcls_error_decomposition(const LSProblem& problem, const SketchOperator& op);

}  // namespace rpcls
