#include "rpcls/sketch.hpp"

#include "rpcls/fwht.hpp"
#include "rpcls/rng.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>

namespace rpcls {

namespace {

// Stream tag for draws that are not tied to a single column (ROS row sampling).
constexpr std::uint64_t kGlobalStream = ~std::uint64_t{0};

std::uint64_t stream_key(const SketchSpec& spec, std::uint64_t column) {
    const auto kind_word = static_cast<std::uint64_t>(spec.kind) + 1;
    return derive_key(derive_key(spec.seed, kind_word), column);
}

double draw_sign(CounterRng& rng) { return (rng() >> 63) ? -1.0 : 1.0; }

}  // namespace

std::string to_string(SketchKind kind) {
    switch (kind) {
        case SketchKind::Gaussian: return "gaussian";
        case SketchKind::ROS: return "ros";
        case SketchKind::CountSketch: return "count";
    }
    return "unknown";
}

SketchKind parse_sketch_kind(std::string_view name) {
    std::string s(name);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "gaussian") return SketchKind::Gaussian;
    if (s == "ros" || s == "hadamard" || s == "walsh-hadamard") return SketchKind::ROS;
    if (s == "count" || s == "countsketch" || s == "count-sketch") return SketchKind::CountSketch;
    throw InvalidArgument("unknown sketch kind '" + s + "'");
}

void SketchSpec::validate() const {
    if (M < 1) throw InvalidArgument("SketchSpec: M must be >= 1");
    if (m < 1) throw InvalidArgument("SketchSpec: m must be >= 1");
    if (kind != SketchKind::Gaussian && m > M) {
        throw InvalidArgument("SketchSpec: m = " + std::to_string(m) + " exceeds M = " +
                              std::to_string(M));
    }
}

SketchOperator::SketchOperator(const SketchSpec& spec) : spec_(spec) {
    spec_.validate();
    const Eigen::Index m = spec_.m;
    const Eigen::Index M = spec_.M;
    switch (spec_.kind) {
        case SketchKind::Gaussian: {
            gaussian_.resize(m, M);
            const double sd = 1.0 / std::sqrt(static_cast<double>(m));
            for (Eigen::Index j = 0; j < M; ++j) {
                CounterRng rng(stream_key(spec_, static_cast<std::uint64_t>(j)));
                std::normal_distribution<double> normal(0.0, sd);
                for (Eigen::Index i = 0; i < m; ++i) gaussian_(i, j) = normal(rng);
            }
            break;
        }
        case SketchKind::ROS: {
            padded_ = static_cast<Eigen::Index>(next_power_of_two(static_cast<std::size_t>(M)));
            signs_.resize(static_cast<std::size_t>(M));
            for (Eigen::Index j = 0; j < M; ++j) {
                CounterRng rng(stream_key(spec_, static_cast<std::uint64_t>(j)));
                signs_[static_cast<std::size_t>(j)] = draw_sign(rng);
            }
            // Partial Fisher-Yates: the first m entries are a uniform sample without replacement.
            std::vector<Eigen::Index> perm(static_cast<std::size_t>(padded_));
            std::iota(perm.begin(), perm.end(), Eigen::Index{0});
            CounterRng rng(stream_key(spec_, kGlobalStream));
            for (Eigen::Index i = 0; i < m; ++i) {
                std::uniform_int_distribution<Eigen::Index> pick(i, padded_ - 1);
                std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(rng))]);
            }
            index_.assign(perm.begin(), perm.begin() + m);
            break;
        }
        case SketchKind::CountSketch: {
            signs_.resize(static_cast<std::size_t>(M));
            index_.resize(static_cast<std::size_t>(M));
            for (Eigen::Index j = 0; j < M; ++j) {
                CounterRng rng(stream_key(spec_, static_cast<std::uint64_t>(j)));
                std::uniform_int_distribution<Eigen::Index> bucket(0, m - 1);
                index_[static_cast<std::size_t>(j)] = bucket(rng);
                signs_[static_cast<std::size_t>(j)] = draw_sign(rng);
            }
            break;
        }
    }
}

SketchOperator SketchOperator::count_sketch(Eigen::Index m, std::vector<Eigen::Index> buckets,
                                            std::vector<double> signs) {
    if (buckets.size() != signs.size()) {
        throw DimensionError("count_sketch: buckets and signs differ in length");
    }
    SketchOperator op;
    op.spec_ = SketchSpec{SketchKind::CountSketch, m, static_cast<Eigen::Index>(buckets.size()), 0};
    op.spec_.validate();
    for (std::size_t j = 0; j < buckets.size(); ++j) {
        if (buckets[j] < 0 || buckets[j] >= m) throw InvalidArgument("count_sketch: bucket out of range");
        if (signs[j] != 1.0 && signs[j] != -1.0) throw InvalidArgument("count_sketch: signs must be +-1");
    }
    op.index_ = std::move(buckets);
    op.signs_ = std::move(signs);
    return op;
}

void SketchOperator::apply_block(const Matrix& X, Matrix& out) const {
    const Eigen::Index k = X.cols();
    switch (spec_.kind) {
        case SketchKind::Gaussian:
            out.noalias() = gaussian_ * X;
            return;
        case SketchKind::ROS: {
            const double scale = 1.0 / std::sqrt(static_cast<double>(spec_.m));
            std::vector<double> buf(static_cast<std::size_t>(padded_));
            for (Eigen::Index c = 0; c < k; ++c) {
                std::fill(buf.begin(), buf.end(), 0.0);
                for (Eigen::Index j = 0; j < spec_.M; ++j) {
                    buf[static_cast<std::size_t>(j)] = signs_[static_cast<std::size_t>(j)] * X(j, c);
                }
                fwht_inplace(buf);
                for (Eigen::Index r = 0; r < spec_.m; ++r) {
                    out(r, c) = scale * buf[static_cast<std::size_t>(index_[static_cast<std::size_t>(r)])];
                }
            }
            return;
        }
        case SketchKind::CountSketch: {
            out.setZero();
            for (Eigen::Index c = 0; c < k; ++c) {
                const double* col = X.col(c).data();
                double* dst = out.col(c).data();
                for (Eigen::Index j = 0; j < spec_.M; ++j) {
                    const double v = col[j];
                    if (v != 0.0) {
                        dst[index_[static_cast<std::size_t>(j)]] += signs_[static_cast<std::size_t>(j)] * v;
                    }
                }
            }
            return;
        }
    }
}

Matrix SketchOperator::apply(const Matrix& X) const {
    if (X.rows() != spec_.M) {
        throw DimensionError("apply_sketch: input has " + std::to_string(X.rows()) +
                             " rows, sketch expects " + std::to_string(spec_.M));
    }
    Matrix out(spec_.m, X.cols());
    apply_block(X, out);
    return out;
}

Vector SketchOperator::apply(const Vector& x) const {
    return apply(Matrix(x)).col(0);
}

Matrix SketchOperator::dense() const {
    const Matrix eye = Matrix::Identity(spec_.M, spec_.M);
    return apply(eye);
}

double sketch_flops_estimate(const SketchSpec& spec, Eigen::Index N, Eigen::Index nnz) {
    const auto m = static_cast<double>(spec.m);
    const auto M = static_cast<double>(spec.M);
    const auto n = static_cast<double>(N);
    switch (spec.kind) {
        case SketchKind::Gaussian: return m * M * n;
        case SketchKind::ROS: {
            const auto pad = static_cast<double>(next_power_of_two(static_cast<std::size_t>(spec.M)));
            return pad * std::log2(pad) * n;
        }
        case SketchKind::CountSketch: return static_cast<double>(nnz);
    }
    return 0.0;
}

}  // namespace rpcls
