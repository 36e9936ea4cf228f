#include "rpcls/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rpcls {

namespace {

// Singular values of a tall matrix via the R factor of a Householder QR.
Vector singular_values_tall(const Matrix& A) {
    Eigen::HouseholderQR<Matrix> qr(A);
    const Matrix R = qr.matrixQR().topRows(A.cols()).triangularView<Eigen::Upper>();
    return Eigen::JacobiSVD<Matrix>(R).singularValues();
}

}  // namespace

LSProblem::LSProblem(Matrix A, Vector b) : A_(std::move(A)), b_(std::move(b)) {
    if (A_.cols() < 1) throw DimensionError("LSProblem: A must have at least one column");
    if (A_.rows() < A_.cols()) {
        throw DimensionError("LSProblem: need M >= N, got " + std::to_string(A_.rows()) + "x" +
                             std::to_string(A_.cols()));
    }
    if (b_.size() != A_.rows()) {
        throw DimensionError("LSProblem: b has " + std::to_string(b_.size()) + " entries, A has " +
                             std::to_string(A_.rows()) + " rows");
    }
    if (!A_.allFinite() || !b_.allFinite()) throw InvalidArgument("LSProblem: non-finite data");

    const Vector s = singular_values_tall(A_);
    const double smax = s(0);
    const double smin = s(s.size() - 1);
    if (!(smax > 0.0) || smin < kRankTolerance * smax) {
        throw SingularMatrixError("LSProblem: A is numerically rank deficient (sigma_min/sigma_max = " +
                                  std::to_string(smax > 0.0 ? smin / smax : 0.0) + ")");
    }
}

SpectralData compute_spectral(const Matrix& P) {
    if (P.rows() < 1 || P.cols() < 1) throw DimensionError("compute_spectral: empty matrix");
    const Eigen::Index n = P.cols();
    if (P.rows() >= n) {
        Eigen::BDCSVD<Matrix> svd(P, Eigen::ComputeThinU | Eigen::ComputeThinV);
        // Eigen returns singular values in decreasing order.
        return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
    }
    // m < N: pad with zero singular values; V is the full right basis.
    Eigen::JacobiSVD<Matrix> svd(P, Eigen::ComputeThinU | Eigen::ComputeFullV);
    const Eigen::Index k = svd.singularValues().size();
    SpectralData out{Matrix::Zero(P.rows(), n), Vector::Zero(n), svd.matrixV()};
    out.U.leftCols(k) = svd.matrixU();
    out.sigma.head(k) = svd.singularValues();
    return out;
}

Vector solve_ols(const LSProblem& problem, OlsMethod method) {
    const Matrix& A = problem.A();
    const Vector& b = problem.b();
    if (method == OlsMethod::Factorized) {
        Eigen::HouseholderQR<Matrix> qr(A);
        const auto R = qr.matrixQR().topRows(A.cols()).triangularView<Eigen::Upper>();
        const Vector d = qr.matrixQR().diagonal().head(A.cols()).cwiseAbs();
        if (d.minCoeff() < kRankTolerance * d.maxCoeff()) {
            throw SingularMatrixError("solve_ols: R factor is numerically singular");
        }
        Vector qtb = qr.householderQ().transpose() * b;
        return R.solve(qtb.head(A.cols()));
    }
    Matrix gram = Matrix::Zero(A.cols(), A.cols());
    gram.selfadjointView<Eigen::Lower>().rankUpdate(A.transpose());
    Eigen::LLT<Matrix> llt(gram.selfadjointView<Eigen::Lower>());
    if (llt.info() != Eigen::Success) {
        throw SingularMatrixError("solve_ols: A^T A is not numerically positive definite");
    }
    return llt.solve(A.transpose() * b);
}

double eps_optimality(const Vector& xhat, const LSProblem& problem, const Vector& x_ls) {
    if (xhat.size() != problem.cols() || x_ls.size() != problem.cols()) {
        throw DimensionError("eps_optimality: vector length does not match A");
    }
    const double denom = (problem.A() * x_ls).norm();
    if (!(denom > 0.0)) throw DegenerateError("eps_optimality: ||A x_ls|| = 0");
    return (problem.A() * (xhat - x_ls)).norm() / denom;
}

double residual_ratio(const Vector& xhat, const LSProblem& problem, const Vector& x_ls) {
    const double r_hat = (problem.A() * xhat - problem.b()).norm();
    const double r_ls = (problem.A() * x_ls - problem.b()).norm();
    if (r_ls > 0.0) return r_hat / r_ls;
    return r_hat == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
}

std::vector<ProfilePoint> relative_residual_profile(std::vector<double> residuals) {
    if (residuals.empty()) throw InvalidArgument("relative_residual_profile: empty input");
    for (double r : residuals) {
        if (!(r >= 0.0)) throw InvalidArgument("relative_residual_profile: values must be >= 0");
    }
    std::sort(residuals.begin(), residuals.end());
    const auto n = static_cast<double>(residuals.size());
    std::vector<ProfilePoint> out;
    out.reserve(residuals.size());
    for (std::size_t k = 0; k < residuals.size(); ++k) {
        out.push_back({static_cast<double>(k + 1) / n, residuals[k]});
    }
    return out;
}

double profile_at(const std::vector<ProfilePoint>& profile, double fraction) {
    if (profile.empty()) throw InvalidArgument("profile_at: empty profile");
    if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidArgument("profile_at: fraction must lie in (0, 1]");
    const double n = static_cast<double>(profile.size());
    for (const auto& p : profile) {
        // k/n >= fraction, tested in integer-safe form
        if (p.fraction * n >= fraction * n - 1e-9) return p.value;
    }
    return profile.back().value;
}

double lower_median(std::vector<double> values) {
    if (values.empty()) throw InvalidArgument("lower_median: empty input");
    const std::size_t k = (values.size() - 1) / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
    return values[k];
}

double percentile(std::vector<double> values, double p) {
    if (values.empty()) throw InvalidArgument("percentile: empty input");
    if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("percentile: p must lie in (0, 1]");
    auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(values.size())));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                     values.end());
    return values[rank - 1];
}

double SolverReport::total_time() const {
    return std::accumulate(timings.begin(), timings.end(), 0.0,
                           [](double acc, const auto& kv) { return acc + kv.second; });
}

SolverReport make_report(std::string method, const Vector& xhat, const LSProblem& problem,
                         const Vector& x_ls, std::map<std::string, double> timings) {
    SolverReport r;
    r.method = std::move(method);
    r.residual_norm = (problem.A() * xhat - problem.b()).norm();
    r.relative_accuracy = residual_ratio(xhat, problem, x_ls) - 1.0;
    r.eps_optimality = eps_optimality(xhat, problem, x_ls);
    r.timings = std::move(timings);
    return r;
}

}  // namespace rpcls
