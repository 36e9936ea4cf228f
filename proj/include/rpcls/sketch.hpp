#pragma once

#include "rpcls/core.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rpcls {

enum class SketchKind { Gaussian, ROS, CountSketch };

std::string to_string(SketchKind kind);
/// Accepts "gaussian", "ros" (alias "hadamard"), "count" (alias "countsketch").
SketchKind parse_sketch_kind(std::string_view name);

/// Parameters that fully determine a sketching matrix Phi (m x M).
struct SketchSpec {
    SketchKind kind = SketchKind::Gaussian;
    Eigen::Index m = 1;  // rows of Phi
    Eigen::Index M = 1;  // columns of Phi (rows of the data)
    std::uint64_t seed = 0;

    /// Throws InvalidArgument unless 1 <= m and m <= M (Gaussian sketches may oversample).
    void validate() const;

    bool operator==(const SketchSpec&) const = default;
};

/// Random compression operator with E[Phi^T Phi] = I.
///
/// Randomness is drawn from CounterRng streams keyed by (seed, kind, column), so
/// the realization does not depend on how application is partitioned.
///  - Gaussian: explicit m x M matrix, entries N(0, 1/m).
///  - ROS: sqrt(M_pad/m) * S * H * D, H the orthonormal Walsh-Hadamard matrix of
///    size M_pad = next power of two >= M, D random signs, S uniform row sampling
///    without replacement. Inputs are zero-padded to M_pad.
///  - CountSketch: column j of Phi has a single entry sign[j] in row bucket[j].
class SketchOperator {
public:
    explicit SketchOperator(const SketchSpec& spec);

    /// Count sketch with prescribed hash buckets and signs (each sign must be +-1).
    static SketchOperator count_sketch(Eigen::Index m, std::vector<Eigen::Index> buckets,
                                       std::vector<double> signs);

    const SketchSpec& spec() const noexcept { return spec_; }
    Eigen::Index rows() const noexcept { return spec_.m; }
    Eigen::Index cols() const noexcept { return spec_.M; }

    /// Returns Phi * X. Throws DimensionError if X.rows() != M.
    Matrix apply(const Matrix& X) const;
    Vector apply(const Vector& x) const;
    /// Evaluates an Eigen expression first; column-vector expressions yield a Vector.
    template <class Derived>
    auto apply(const Eigen::MatrixBase<Derived>& X) const {
        if constexpr (Derived::ColsAtCompileTime == 1) {
            return apply(Vector(X));
        } else {
            return apply(Matrix(X));
        }
    }

    /// Materializes Phi as a dense m x M matrix (tests and small instances only).
    Matrix dense() const;

    // Realized randomness, exposed read-only.
    const std::vector<Eigen::Index>& buckets() const noexcept { return index_; }
    const std::vector<double>& signs() const noexcept { return signs_; }
    const std::vector<Eigen::Index>& sampled_rows() const noexcept { return index_; }
    Eigen::Index padded_size() const noexcept { return padded_; }

private:
    SketchOperator() = default;

    void apply_block(const Matrix& X, Matrix& out) const;

    SketchSpec spec_;
    Matrix gaussian_;                  // Gaussian: m x M
    std::vector<double> signs_;        // ROS: D; CountSketch: per-column sign
    std::vector<Eigen::Index> index_;  // ROS: sampled rows; CountSketch: buckets
    Eigen::Index padded_ = 0;          // ROS: M_pad
};

/// Asymptotic operation count for sketching an M x N matrix:
/// m*M*N (Gaussian), M_pad*log2(M_pad)*N (ROS), nnz (CountSketch).
double sketch_flops_estimate(const SketchSpec& spec, Eigen::Index N, Eigen::Index nnz);

}  // namespace rpcls
