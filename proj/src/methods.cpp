#include "rpcls/methods.hpp"

#include "rpcls/lsqr.hpp"
#include "rpcls/solvers.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <utility>

namespace rpcls {

namespace {

using Clock = std::chrono::steady_clock;

class PhaseTimer {
public:
    template <typename F>
    auto time(const char* phase, F&& fn) {
        const auto start = Clock::now();
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            record(phase, start);
        } else {
            auto result = fn();
            record(phase, start);
            return result;
        }
    }

    std::map<std::string, double> take() { return std::move(timings_); }

private:
    void record(const char* phase, Clock::time_point start) {
        timings_[phase] += std::chrono::duration<double>(Clock::now() - start).count();
    }

    std::map<std::string, double> timings_{{"sketch", 0.0}, {"factor", 0.0}, {"solve", 0.0}};
};

constexpr std::array<std::pair<Method, const char*>, 9> kMethodNames{{
    {Method::Ols, "ols"},
    {Method::OlsNormal, "ols-normal"},
    {Method::Cls, "cls"},
    {Method::Pcls, "pcls"},
    {Method::RidgeCls, "ridge-cls"},
    {Method::RidgePcls, "ridge-pcls"},
    {Method::RobustCls, "robust-cls"},
    {Method::Rpc, "rpc"},
    {Method::Blendenpik, "blendenpik"},
}};

nlohmann::json rpc_details(const RpcSolution& s) {
    return {{"alpha", s.alpha},           {"beta", s.beta},
            {"tau", s.tau},               {"gamma", s.gamma},
            {"outer_iters", s.outer_iters}, {"newton_iters_total", s.newton_iters_total},
            {"foc_residual", s.foc_residual}, {"converged", s.converged}};
}

MethodRun run_once(Method method, const LSProblem& problem, const SketchOperator* op,
                   const MethodParams& params) {
    const Matrix& A = problem.A();
    const Vector& b = problem.b();
    PhaseTimer timer;
    MethodRun run;

    if (uses_sketch(method) && op == nullptr) {
        throw InvalidArgument("method '" + to_string(method) + "' needs a sketch operator");
    }

    switch (method) {
        case Method::Ols: {
            auto qr = timer.time("factor", [&] { return Eigen::HouseholderQR<Matrix>(A); });
            run.x = timer.time("solve", [&] {
                const Vector qtb = qr.householderQ().transpose() * b;
                return Vector(qr.matrixQR().topRows(A.cols()).triangularView<Eigen::Upper>().solve(
                    qtb.head(A.cols())));
            });
            break;
        }
        case Method::OlsNormal: {
            auto llt = timer.time("factor", [&] {
                Matrix G = Matrix::Zero(A.cols(), A.cols());
                G.selfadjointView<Eigen::Lower>().rankUpdate(A.transpose());
                return Eigen::LLT<Matrix>(G.selfadjointView<Eigen::Lower>());
            });
            if (llt.info() != Eigen::Success) throw SingularMatrixError("ols-normal: A^T A not positive definite");
            run.x = timer.time("solve", [&] { return Vector(llt.solve(A.transpose() * b)); });
            break;
        }
        case Method::Cls:
        case Method::Pcls: {
            auto [P, rhs_src] = timer.time("sketch", [&] {
                Matrix P = op->apply(A);
                Vector v = method == Method::Cls ? op->apply(b) : Vector(A.transpose() * b);
                return std::pair{std::move(P), std::move(v)};
            });
            auto gram = timer.time("factor", [&] { return GramSolver(P); });
            run.x = timer.time("solve", [&] {
                return method == Method::Cls ? gram.solve(P.transpose() * rhs_src) : gram.solve(rhs_src);
            });
            break;
        }
        case Method::RidgeCls:
        case Method::RidgePcls: {
            auto [P, rhs_src] = timer.time("sketch", [&] {
                Matrix P = op->apply(A);
                Vector v = method == Method::RidgeCls ? op->apply(b) : Vector(A.transpose() * b);
                return std::pair{std::move(P), std::move(v)};
            });
            double mu = 0.0;
            auto gram = timer.time("factor", [&] {
                if (params.mu) {
                    mu = *params.mu;
                } else {
                    const Vector s = Eigen::BDCSVD<Matrix>(P).singularValues();
                    mu = params.mu_factor * s(s.size() - 1) * s(s.size() - 1);
                }
                if (!(mu > 0.0)) throw InvalidArgument(to_string(method) + ": mu must be > 0");
                return GramSolver(P, mu);
            });
            run.x = timer.time("solve", [&] {
                return method == Method::RidgeCls ? gram.solve(P.transpose() * rhs_src) : gram.solve(rhs_src);
            });
            run.details["mu"] = mu;
            break;
        }
        case Method::RobustCls:
        case Method::Rpc: {
            auto [P, q, c] = timer.time("sketch", [&] {
                Matrix P = op->apply(A);
                Vector q = method == Method::RobustCls ? op->apply(b) : Vector::Zero(P.rows());
                Vector c = A.transpose() * b;
                return std::tuple{std::move(P), std::move(q), std::move(c)};
            });
            auto sp = timer.time("factor", [&] {
                SpectralData sd = compute_spectral(P);
                return SketchedProblem(std::move(P), std::move(q), std::move(c), std::move(sd), b.norm());
            });
            if (method == Method::RobustCls) {
                run.x = timer.time("solve", [&] { return solve_robust_cls(sp, params.rho); });
            } else {
                RpcParams rp = params.rpc;
                rp.rho = params.rho;
                const RpcSolution sol = timer.time("solve", [&] { return solve_rpc(sp, rp); });
                run.x = sol.x;
                run.details = rpc_details(sol);
            }
            run.details["rho"] = params.rho;
            break;
        }
        case Method::Blendenpik: {
            const Matrix P = timer.time("sketch", [&] { return op->apply(A); });
            const Matrix R = timer.time("factor", [&] { return sketch_preconditioner(P); });
            const LsqrResult res = timer.time("solve", [&] {
                return solve_preconditioned_lsqr(problem, R, params.lsqr_tol, params.lsqr_max_iter);
            });
            run.x = res.x;
            run.details = {{"iterations", res.iterations}, {"normal_residual", res.normal_residual}};
            break;
        }
    }
    run.timings = timer.take();
    return run;
}

}  // namespace

std::string to_string(Method m) {
    for (const auto& [method, name] : kMethodNames) {
        if (method == m) return name;
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    std::string s(name);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    for (const auto& [method, label] : kMethodNames) {
        if (s == label) return method;
    }
    throw InvalidArgument("unknown method '" + s + "'");
}

bool uses_sketch(Method m) { return m != Method::Ols && m != Method::OlsNormal; }

MethodRun run_method(Method method, const LSProblem& problem, const SketchOperator* op,
                     const MethodParams& params, int repeats) {
    if (repeats < 1) throw InvalidArgument("run_method: repeats must be >= 1");
    if (repeats == 1) return run_once(method, problem, op, params);

    run_once(method, problem, op, params);  // warm-up
    MethodRun best = run_once(method, problem, op, params);
    for (int r = 1; r < repeats; ++r) {
        MethodRun next = run_once(method, problem, op, params);
        for (auto& [phase, seconds] : best.timings) seconds = std::min(seconds, next.timings[phase]);
    }
    return best;
}

}  // namespace rpcls
