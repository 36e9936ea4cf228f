#pragma once

#include "rpcls/core.hpp"
#include "rpcls/rpc.hpp"
#include "rpcls/sketch.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace rpcls {

/// Estimators available to the harness.
enum class Method {
    Ols,         // Householder QR on the full problem
    OlsNormal,   // Cholesky of A^T A
    Cls,         // fully compressed
    Pcls,        // partially compressed
    RidgeCls,
    RidgePcls,
    RobustCls,
    Rpc,         // robust partially compressed
    Blendenpik,  // sketch-preconditioned LSQR
};

std::string to_string(Method m);
Method parse_method(std::string_view name);
bool uses_sketch(Method m);

struct MethodParams {
    double rho = 1.0;
    std::optional<double> mu;  // nullopt: mu_factor * sigma_min(Phi A)^2
    double mu_factor = 5.0;
    double lsqr_tol = 1e-6;
    int lsqr_max_iter = 1000;
    RpcParams rpc;  // rpc.rho is overridden by `rho`
};

struct MethodRun {
    Vector x;
    std::map<std::string, double> timings;  // "sketch", "factor", "solve" (seconds)
    nlohmann::json details = nlohmann::json::object();
};

/// Runs one estimator with per-phase wall-clock timing. `op` may be null for the
/// unsketched methods. With repeats > 1 an untimed warm-up run precedes `repeats`
/// timed runs and each phase reports its minimum.
MethodRun run_method(Method method, const LSProblem& problem, const SketchOperator* op,
                     const MethodParams& params, int repeats = 1);

}  // namespace rpcls
