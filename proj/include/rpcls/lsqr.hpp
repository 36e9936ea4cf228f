#pragma once

#include "rpcls/core.hpp"
#include "rpcls/sketch.hpp"

namespace rpcls {

struct LsqrResult {
    Vector x;
    int iterations = 0;
    double normal_residual = 0.0;  // ||A^T (A x - b)|| / ||A^T b||
};

/// Plain LSQR on min ||Ax - b|| starting from zero. Stops once
/// ||A^T (Ax - b)|| <= tol ||A^T b||; throws ConvergenceError with the best
/// iterate after max_iter iterations.
LsqrResult solve_lsqr(const LSProblem& problem, double tol, int max_iter);

/// LSQR on min ||A R^{-1} z - b|| with x = R^{-1} z, R upper triangular.
/// Same stopping rule and errors as solve_lsqr, measured on the original system.
LsqrResult solve_preconditioned_lsqr(const LSProblem& problem, const Matrix& R, double tol,
                                     int max_iter);

/// Upper-triangular R of a Householder QR of P. Throws SingularMatrixError if
/// P has fewer rows than columns or R is numerically singular.
Matrix sketch_preconditioner(const Matrix& P);

/// Sketch-preconditioned LSQR: R from QR(Phi A), then solve_preconditioned_lsqr.
LsqrResult solve_blendenpik(const LSProblem& problem, const SketchOperator& op, double tol = 1e-6,
                            int max_iter = 1000);

}  // namespace rpcls
