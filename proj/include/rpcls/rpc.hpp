#pragma once

#include "rpcls/core.hpp"
#include "rpcls/sketch.hpp"
#include "rpcls/solvers.hpp"

namespace rpcls {

/// Robust partially-compressed least squares:
///
///     min_x max_{||dP||_F <= rho} 1/2 ||(P + dP) x||^2 - c^T x,   P = Phi A, c = A^T b,
///
/// equivalently min_x 1/2 (||Px|| + rho ||x||)^2 - c^T x.
struct RpcParams {
    double rho = 1.0;          // uncertainty radius
    double eps = 1e-10;        // stop when | ||Sigma y|| gamma - 1 | <= eps
    double newton_tol = 1e-12; // |phi(gamma)| tolerance for the inner root
    int max_outer = 100;
    int max_newton = 100;

    void validate() const;
};

struct RpcSolution {
    Vector x;
    double alpha = 0.0;  // ||P x||
    double beta = 0.0;   // ||x||
    double tau = 0.0;    // dual value, alpha + rho beta at the optimum
    double gamma = 0.0;  // beta / alpha
    int outer_iters = 0;
    int newton_iters_total = 0;
    double foc_residual = 0.0;
    bool converged = false;
};

/// (||Px|| + rho ||x||)^2, the largest ||(P + dP) x||^2 over ||dP||_F <= rho.
double worst_case_objective(const Matrix& P, const Vector& x, double rho);

/// The maximizing perturbation rho / (||Px|| ||x||) * P x x^T.
/// Throws DegenerateError when x = 0 or Px = 0.
Matrix worst_case_perturbation(const Matrix& P, const Vector& x, double rho);

/// 1/2 (||Px|| + rho ||x||)^2 - c^T x.
double rpc_objective(const Matrix& P, const Vector& c, const Vector& x, double rho);
double rpc_objective(const SketchedProblem& sp, const Vector& x, double rho);

/// Gradient of rpc_objective; defined for x != 0 and Px != 0.
Vector rpc_gradient(const Matrix& P, const Vector& c, const Vector& x, double rho);

/// || (a + rho b)(P^T P x / a + rho x / b) - c || with a = ||Px||, b = ||x||;
/// zero at the optimum. Returns ||c|| for x = 0.
double rpc_stationarity_residual(const Matrix& P, const Vector& c, const Vector& x, double rho);

/// h_tau(x) = tau (||Px|| + rho ||x||) - c^T x.
double dual_h(const Matrix& P, const Vector& c, const Vector& x, double rho, double tau);

struct SecularValue {
    double value;
    double derivative;
};

/// phi(gamma) = tau^-2 sum_i bbar_i^2 / (gamma sigma_i^2 + rho)^2 - 1 and its derivative.
/// Requires tau > 0, rho > 0, gamma >= 0.
SecularValue secular_phi(const Vector& sigma, const Vector& bbar, double rho, double tau, double gamma);
SecularValue secular_phi(const SpectralData& spectral, const Vector& bbar, double rho, double tau,
                         double gamma);

/// phi(0) < 0: the requested tau exceeds ||bbar|| / rho and no nonnegative root exists.
class NoRootError : public Error {
public:
    using Error::Error;
};

struct GammaRoot {
    double gamma;
    int iterations;
};

/// Root of phi on gamma >= 0 by Newton's method safeguarded with bisection on a
/// bracket [0, gamma_hi], gamma_hi doubled until phi(gamma_hi) < 0.
/// Throws NoRootError if phi(0) < 0 or phi stays nonnegative as gamma grows
/// (zero singular values carrying enough of bbar), ConvergenceError at the cap.
GammaRoot newton_gamma(const Vector& sigma, const Vector& bbar, double rho, double tau,
                       double newton_tol, int max_newton);
GammaRoot newton_gamma(const SpectralData& spectral, const Vector& bbar, double rho, double tau,
                       double newton_tol, int max_newton);

/// Dual search: iterate tau until the gamma-normalized minimizer of h_tau satisfies
/// ||Sigma y|| gamma = 1, then rescale. The multiplicative update
/// tau <- tau ||Sigma y|| gamma is used while it contracts; otherwise the step falls
/// back to regula falsi on the maintained bracket around tau*.
/// Requires spectral data on `sp`. Throws ConvergenceError after max_outer.
RpcSolution solve_rpc(const SketchedProblem& sp, const RpcParams& params = {});
RpcSolution solve_rpc(const LSProblem& problem, const SketchOperator& op, const RpcParams& params = {});

struct OracleResult {
    Vector x;
    double objective = 0.0;
    int iterations = 0;
    double foc_residual = 0.0;
};

/// Slow reference minimizer: majorize-minimize iteration on the ridge-like fixed
/// point x = (alpha + rho beta)^{-1} (P^T P / alpha + rho I / beta)^{-1} c, started
/// from the ridge solution with mu = rho, followed by a golden-section line search
/// over the scale of the final iterate. Works on P directly (no SVD).
/// Throws ConvergenceError if the stationarity residual does not reach 10 tol ||c||.
OracleResult rpc_oracle(const SketchedProblem& sp, double rho, double tol = 1e-10,
                        int max_iter = 20000);

}  // namespace rpcls
