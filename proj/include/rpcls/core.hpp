#pragma once

#include "rpcls/errors.hpp"

#include <Eigen/Dense>

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace rpcls {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Singular values below this fraction of the largest declare a matrix rank deficient.
inline constexpr double kRankTolerance = 1e-12;

/// Dense overdetermined least-squares instance min ||Ax - b||, A of full column rank.
///
/// Immutable after construction. The constructor verifies M >= N >= 1, matching
/// dimensions, and sigma_min(A) >= kRankTolerance * sigma_max(A).
class LSProblem {
public:
    LSProblem(Matrix A, Vector b);

    const Matrix& A() const noexcept { return A_; }
    const Vector& b() const noexcept { return b_; }
    Eigen::Index rows() const noexcept { return A_.rows(); }
    Eigen::Index cols() const noexcept { return A_.cols(); }

private:
    Matrix A_;
    Vector b_;
};

/// Thin SVD P = U diag(sigma) V^T with sigma sorted in descending order.
struct SpectralData {
    Matrix U;      // m x N
    Vector sigma;  // N, descending, nonnegative
    Matrix V;      // N x N

    Eigen::Index size() const noexcept { return sigma.size(); }
};

/// Computes the thin SVD of P (m x N). Requires m >= 1 and N >= 1.
SpectralData compute_spectral(const Matrix& P);

enum class OlsMethod { Factorized, NormalEquations };

/// Ordinary least squares. The factorized path uses a Householder QR of A; the
/// normal-equations path forms A^T A and solves by Cholesky.
/// Throws SingularMatrixError if the factorization reveals rank deficiency.
Vector solve_ols(const LSProblem& problem, OlsMethod method = OlsMethod::Factorized);

/// ||A(xhat - x_ls)|| / ||A x_ls||. Throws DegenerateError when ||A x_ls|| = 0.
double eps_optimality(const Vector& xhat, const LSProblem& problem, const Vector& x_ls);

/// ||A xhat - b|| / ||A x_ls - b||. A zero least-squares residual gives 1 when xhat
/// also fits exactly and +inf otherwise.
double residual_ratio(const Vector& xhat, const LSProblem& problem, const Vector& x_ls);

/// One point of a performance profile: the fraction of runs whose value is at most `value`.
struct ProfilePoint {
    double fraction;
    double value;
};

/// Sorts the per-run residual factors and pairs the k-th smallest with k/n.
/// Throws InvalidArgument on empty input or negative/NaN values.
std::vector<ProfilePoint> relative_residual_profile(std::vector<double> residuals);

// Value of the step CDF at `fraction`: the first point whose fraction reaches it.
// profile_at(p, 0.5) is the (lower) median.
double profile_at(const std::vector<ProfilePoint>& profile, double fraction);

/// Lower median, i.e. the profile value at fraction 0.5 for odd n and the
/// (n/2)-th smallest for even n.
double lower_median(std::vector<double> values);

/// Linear-interpolation-free percentile: the ceil(p*n)-th smallest value.
double percentile(std::vector<double> values, double p);

/// Evaluation summary of one solver run against the exact least-squares solution.
struct SolverReport {
    std::string method;
    double residual_norm = 0.0;
    double relative_accuracy = 0.0;
    double eps_optimality = 0.0;
    std::map<std::string, double> timings;  // phase -> seconds

    double total_time() const;
};

SolverReport make_report(std::string method, const Vector& xhat, const LSProblem& problem,
                         const Vector& x_ls, std::map<std::string, double> timings = {});

}  // namespace rpcls
