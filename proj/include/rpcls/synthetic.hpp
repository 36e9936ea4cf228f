#pragma once

#include "rpcls/core.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace rpcls {

/// Row-leverage structure of generated test matrices.
///  - Incoherent: range spanned by a random orthonormal basis (leverage spread evenly).
///  - SemiCoherent: range of [G 0; 0 I_{N/2}], half the basis is exact unit vectors.
///  - Coherent: range of [I_N; 1e-4 G], leverage concentrated on the first N rows.
enum class Coherence { Incoherent, SemiCoherent, Coherent };

std::string to_string(Coherence c);
Coherence parse_coherence(std::string_view name);

struct SyntheticOptions {
    Eigen::Index M = 0;
    Eigen::Index N = 0;
    double condition = 1.0;         // sigma_max / sigma_min of A
    Coherence coherence = Coherence::Incoherent;
    std::uint64_t seed = 0;
    double residual_fraction = 0.5; // ||z|| / ||A x_planted||, z orthogonal to range(A)
};

struct SyntheticProblem {
    LSProblem problem;
    Vector x_planted;
};

/// A = Q diag(sigma) V^T with Q an orthonormal basis of the coherence-class range,
/// V random orthogonal and sigma geometric from 1 down to 1/condition;
/// b = A x_planted + z. Throws InvalidArgument for infeasible dimensions or parameters.
SyntheticProblem generate_synthetic(const SyntheticOptions& options);

/// Orthonormal basis (M x N) of a random N-dimensional subspace.
Matrix random_orthonormal(Eigen::Index M, Eigen::Index N, std::uint64_t seed);

/// M x N matrix of i.i.d. standard normals drawn from a counter-based stream.
Matrix gaussian_matrix(Eigen::Index M, Eigen::Index N, std::uint64_t seed);

}  // namespace rpcls
