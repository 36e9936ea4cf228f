#include "rpcls/synthetic.hpp"

#include "rpcls/rng.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>

namespace rpcls {

namespace {

enum StreamTag : std::uint64_t { kBasis = 1, kRightFactor = 2, kPlanted = 3, kResidual = 4 };

Matrix thin_q(const Matrix& B) {
    Eigen::HouseholderQR<Matrix> qr(B);
    return qr.householderQ() * Matrix::Identity(B.rows(), B.cols());
}

Matrix range_basis(const SyntheticOptions& o) {
    const std::uint64_t key = derive_key(o.seed, kBasis);
    switch (o.coherence) {
        case Coherence::Incoherent:
            return random_orthonormal(o.M, o.N, key);
        case Coherence::SemiCoherent: {
            // Q = blockdiag(orth(G), I_k): the last k basis vectors are unit vectors.
            const Eigen::Index k = o.N / 2;
            Matrix Q = Matrix::Zero(o.M, o.N);
            Q.topLeftCorner(o.M - k, o.N - k) = random_orthonormal(o.M - k, o.N - k, key);
            Q.bottomRightCorner(k, k).setIdentity();
            return Q;
        }
        case Coherence::Coherent: {
            Matrix B = Matrix::Zero(o.M, o.N);
            B.topRows(o.N).setIdentity();
            if (o.M > o.N) B.bottomRows(o.M - o.N) = 1e-4 * gaussian_matrix(o.M - o.N, o.N, key);
            return thin_q(B);
        }
    }
    return {};
}

}  // namespace

std::string to_string(Coherence c) {
    switch (c) {
        case Coherence::Incoherent: return "incoherent";
        case Coherence::SemiCoherent: return "semi-coherent";
        case Coherence::Coherent: return "coherent";
    }
    return "unknown";
}

Coherence parse_coherence(std::string_view name) {
    std::string s(name);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (s == "incoherent") return Coherence::Incoherent;
    if (s == "semi-coherent" || s == "semicoherent" || s == "semi") return Coherence::SemiCoherent;
    if (s == "coherent") return Coherence::Coherent;
    throw InvalidArgument("unknown coherence class '" + s + "'");
}

Matrix gaussian_matrix(Eigen::Index M, Eigen::Index N, std::uint64_t seed) {
    Matrix G(M, N);
    for (Eigen::Index j = 0; j < N; ++j) {
        CounterRng rng(derive_key(seed, static_cast<std::uint64_t>(j)));
        std::normal_distribution<double> normal;
        for (Eigen::Index i = 0; i < M; ++i) G(i, j) = normal(rng);
    }
    return G;
}

Matrix random_orthonormal(Eigen::Index M, Eigen::Index N, std::uint64_t seed) {
    if (N > M) throw InvalidArgument("random_orthonormal: N > M");
    Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(M, N, seed));
    Matrix Q = qr.householderQ() * Matrix::Identity(M, N);
    // Sign-fix columns by diag(R) so the basis is Haar distributed.
    for (Eigen::Index j = 0; j < N; ++j) {
        if (qr.matrixQR()(j, j) < 0.0) Q.col(j) *= -1.0;
    }
    return Q;
}

SyntheticProblem generate_synthetic(const SyntheticOptions& o) {
    if (o.N < 1 || o.M < o.N) {
        throw InvalidArgument("generate_synthetic: need M >= N >= 1, got " + std::to_string(o.M) + "x" +
                              std::to_string(o.N));
    }
    if (!(o.condition >= 1.0) || !std::isfinite(o.condition)) {
        throw InvalidArgument("generate_synthetic: condition must be >= 1");
    }
    if (!(o.residual_fraction >= 0.0)) {
        throw InvalidArgument("generate_synthetic: residual_fraction must be >= 0");
    }

    const Matrix Q = range_basis(o);
    Vector sigma(o.N);
    for (Eigen::Index i = 0; i < o.N; ++i) {
        const double t = o.N > 1 ? static_cast<double>(i) / static_cast<double>(o.N - 1) : 0.0;
        sigma(i) = std::pow(o.condition, -t);
    }
    const Matrix V = random_orthonormal(o.N, o.N, derive_key(o.seed, kRightFactor));
    Matrix A = Q * sigma.asDiagonal() * V.transpose();

    Vector x = gaussian_matrix(o.N, 1, derive_key(o.seed, kPlanted)).col(0);
    const Vector ax = A * x;
    Vector b = ax;
    if (o.residual_fraction > 0.0) {
        Vector z = gaussian_matrix(o.M, 1, derive_key(o.seed, kResidual)).col(0);
        z -= Q * (Q.transpose() * z);
        z -= Q * (Q.transpose() * z);  // second pass keeps z orthogonal to working precision
        const double zn = z.norm();
        if (zn > 0.0) b += (o.residual_fraction * ax.norm() / zn) * z;
    }
    return {LSProblem(std::move(A), std::move(b)), std::move(x)};
}

}  // namespace rpcls
