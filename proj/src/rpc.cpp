#include "rpcls/rpc.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace rpcls {

namespace {

enum class RootStatus { Ok, TauTooLarge, TauTooSmall, NoConvergence };

struct RootSearch {
    RootStatus status;
    double gamma;
    int iterations;
};

// Doublings of the upper bracket before concluding phi never turns negative.
constexpr int kMaxBracketDoublings = 2048;

RootSearch find_gamma(const Vector& sigma, const Vector& bbar, double rho, double tau,
                      double tol, int max_newton) {
    const SecularValue at_zero = secular_phi(sigma, bbar, rho, tau, 0.0);
    if (at_zero.value < 0.0) return {RootStatus::TauTooLarge, 0.0, 0};
    if (at_zero.value <= tol) return {RootStatus::Ok, 0.0, 0};

    // phi(gamma) >= ||bbar||^2 / (tau (gamma sigma_1^2 + rho))^2 - 1, so the root is
    // at least (||bbar||/tau - rho) / sigma_1^2.
    const double s1sq = sigma.size() > 0 ? sigma.maxCoeff() * sigma.maxCoeff() : 0.0;
    if (!(s1sq > 0.0)) return {RootStatus::TauTooSmall, 0.0, 0};
    double lo = std::max(0.0, (bbar.norm() / tau - rho) / s1sq);
    if (secular_phi(sigma, bbar, rho, tau, lo).value < 0.0) lo = 0.0;
    double hi = lo > 0.0 ? 2.0 * lo : 1.0 / s1sq;
    int doublings = 0;
    while (secular_phi(sigma, bbar, rho, tau, hi).value >= 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++doublings > kMaxBracketDoublings || !std::isfinite(hi)) {
            return {RootStatus::TauTooSmall, 0.0, 0};
        }
    }

    double gamma = lo;
    for (int it = 1; it <= max_newton; ++it) {
        const SecularValue p = secular_phi(sigma, bbar, rho, tau, gamma);
        if (std::abs(p.value) <= tol) return {RootStatus::Ok, gamma, it};
        if (p.value > 0.0) {
            lo = gamma;
        } else {
            hi = gamma;
        }
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
            return {RootStatus::Ok, gamma, it};
        }
        double next = p.derivative < 0.0 ? gamma - p.value / p.derivative : -1.0;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        gamma = next;
    }
    return {RootStatus::NoConvergence, gamma, max_newton};
}

const Vector& sigma_of(const SpectralData& s) { return s.sigma; }

RpcSolution finish(const Matrix& P, const Vector& c, double rho, RpcSolution sol) {
    sol.foc_residual = rpc_stationarity_residual(P, c, sol.x, rho);
    return sol;
}

}  // namespace

void RpcParams::validate() const {
    if (!(rho >= 0.0) || !std::isfinite(rho)) throw InvalidArgument("RpcParams: rho must be >= 0");
    if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("RpcParams: eps must lie in (0, 1)");
    if (!(newton_tol > 0.0 && newton_tol < 1.0)) {
        throw InvalidArgument("RpcParams: newton_tol must lie in (0, 1)");
    }
    if (max_outer < 1 || max_newton < 1) throw InvalidArgument("RpcParams: iteration caps must be >= 1");
}

double worst_case_objective(const Matrix& P, const Vector& x, double rho) {
    const double t = (P * x).norm() + rho * x.norm();
    return t * t;
}

Matrix worst_case_perturbation(const Matrix& P, const Vector& x, double rho) {
    const Vector px = P * x;
    const double pxn = px.norm();
    const double xn = x.norm();
    if (xn == 0.0) throw DegenerateError("worst_case_perturbation: x = 0");
    if (pxn == 0.0) throw DegenerateError("worst_case_perturbation: P x = 0");
    return (rho / (pxn * xn)) * px * x.transpose();
}

double rpc_objective(const Matrix& P, const Vector& c, const Vector& x, double rho) {
    return 0.5 * worst_case_objective(P, x, rho) - c.dot(x);
}

double rpc_objective(const SketchedProblem& sp, const Vector& x, double rho) {
    return rpc_objective(sp.P(), sp.c(), x, rho);
}

Vector rpc_gradient(const Matrix& P, const Vector& c, const Vector& x, double rho) {
    const Vector px = P * x;
    const double a = px.norm();
    const double b = x.norm();
    if (a == 0.0 || b == 0.0) throw DegenerateError("rpc_gradient: objective is not differentiable here");
    return (a + rho * b) * (P.transpose() * px / a + (rho / b) * x) - c;
}

double rpc_stationarity_residual(const Matrix& P, const Vector& c, const Vector& x, double rho) {
    const double b = x.norm();
    if (b == 0.0) return c.norm();
    const Vector px = P * x;
    const double a = px.norm();
    Vector g = (rho / b) * x;
    if (a > 0.0) g += P.transpose() * px / a;
    return ((a + rho * b) * g - c).norm();
}

double dual_h(const Matrix& P, const Vector& c, const Vector& x, double rho, double tau) {
    return tau * ((P * x).norm() + rho * x.norm()) - c.dot(x);
}

SecularValue secular_phi(const Vector& sigma, const Vector& bbar, double rho, double tau, double gamma) {
    if (sigma.size() != bbar.size()) throw DimensionError("secular_phi: sigma and bbar differ in length");
    if (!(tau > 0.0) || !(rho > 0.0) || !(gamma >= 0.0)) {
        throw InvalidArgument("secular_phi: need tau > 0, rho > 0, gamma >= 0");
    }
    double value = 0.0;
    double slope = 0.0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        const double s2 = sigma(i) * sigma(i);
        const double w = bbar(i) / tau;  // phi depends on bbar only through bbar / tau
        const double den = gamma * s2 + rho;
        value += w * w / (den * den);
        slope += s2 * w * w / (den * den * den);
    }
    return {value - 1.0, -2.0 * slope};
}

SecularValue secular_phi(const SpectralData& spectral, const Vector& bbar, double rho, double tau,
                         double gamma) {
    return secular_phi(sigma_of(spectral), bbar, rho, tau, gamma);
}

GammaRoot newton_gamma(const Vector& sigma, const Vector& bbar, double rho, double tau,
                       double newton_tol, int max_newton) {
    const RootSearch r = find_gamma(sigma, bbar, rho, tau, newton_tol, max_newton);
    switch (r.status) {
        case RootStatus::Ok: return {r.gamma, r.iterations};
        case RootStatus::TauTooLarge:
            throw NoRootError("newton_gamma: phi(0) < 0, tau exceeds ||bbar||/rho");
        case RootStatus::TauTooSmall:
            throw NoRootError("newton_gamma: phi stays nonnegative for all gamma >= 0");
        case RootStatus::NoConvergence: break;
    }
    throw ConvergenceError("newton_gamma: iteration cap reached", Vector::Constant(1, r.gamma),
                           r.iterations);
}

GammaRoot newton_gamma(const SpectralData& spectral, const Vector& bbar, double rho, double tau,
                       double newton_tol, int max_newton) {
    return newton_gamma(spectral.sigma, bbar, rho, tau, newton_tol, max_newton);
}

RpcSolution solve_rpc(const SketchedProblem& sp, const RpcParams& params) {
    params.validate();
    const Matrix& P = sp.P();
    const Vector& c = sp.c();
    const Eigen::Index n = sp.cols();
    const double rho = params.rho;

    RpcSolution sol;
    if (c.squaredNorm() == 0.0) {
        sol.x = Vector::Zero(n);
        sol.converged = true;
        return sol;
    }
    if (rho == 0.0) {
        sol.x = solve_pcls(sp);
        sol.alpha = (P * sol.x).norm();
        sol.beta = sol.x.norm();
        sol.tau = sol.alpha;
        sol.gamma = sol.alpha > 0.0 ? sol.beta / sol.alpha : 0.0;
        sol.converged = true;
        return finish(P, c, rho, std::move(sol));
    }

    std::optional<SpectralData> local;
    if (!sp.has_spectral()) local = compute_spectral(P);
    const SpectralData& sd = sp.has_spectral() ? sp.spectral() : *local;
    const Vector& sigma = sd.sigma;
    const Vector bbar = sd.V.transpose() * c;

    // tau* lies in (0, ||bbar||/rho]: above that phi(0) < 0.
    double lo = 0.0;
    double hi = bbar.norm() / rho;
    double f_lo = std::numeric_limits<double>::infinity();
    double f_hi = -1.0;
    double tau = sp.b_norm() ? rho * *sp.b_norm() / 2.0 : bbar.norm() / (sigma(0) + rho);
    if (!(tau > 0.0)) tau = 0.5 * hi;

    double prev_abs_f = std::numeric_limits<double>::infinity();
    int last_side = 0;  // +1: lo moved last, -1: hi moved last (Illinois bookkeeping)
    Vector y = Vector::Zero(n);
    double gamma = 0.0;

    auto fallback_step = [&](int side) {
        if (std::isfinite(f_lo) && hi > lo) {
            if (side == last_side) {
                // Illinois: damp the stale endpoint so regula falsi keeps shrinking both sides.
                if (side > 0) f_hi *= 0.5; else f_lo *= 0.5;
            }
            last_side = side;
            const double t = lo - f_lo * (hi - lo) / (f_hi - f_lo);
            if (t > lo && t < hi) return t;
        }
        last_side = side;
        return lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * hi;
    };

    for (int outer = 1; outer <= params.max_outer; ++outer) {
        sol.outer_iters = outer;
        const RootSearch r = find_gamma(sigma, bbar, rho, tau, params.newton_tol, params.max_newton);
        sol.newton_iters_total += r.iterations;
        if (r.status == RootStatus::TauTooLarge) {
            hi = std::min(hi, tau);
            tau *= 0.5;
            if (tau <= lo) tau = fallback_step(-1);
            continue;
        }
        if (r.status == RootStatus::TauTooSmall) {
            lo = tau;
            f_lo = std::numeric_limits<double>::infinity();
            tau = fallback_step(+1);
            continue;
        }
        if (r.status == RootStatus::NoConvergence) {
            throw ConvergenceError("solve_rpc: secular Newton iteration hit its cap at tau = " +
                                       std::to_string(tau),
                                   sd.V * y, outer);
        }
        gamma = r.gamma;
        y = (bbar.array() / (tau * (gamma * sigma.array().square() + rho))).matrix();
        const double g = gamma * (sigma.array() * y.array()).matrix().norm();
        const double f = g - 1.0;
        if (std::abs(f) <= params.eps) {
            sol.tau = tau;
            sol.gamma = gamma;
            sol.alpha = tau / (1.0 + rho * gamma);
            sol.beta = (tau - sol.alpha) / rho;
            sol.x = sol.beta * (sd.V * y);
            sol.converged = true;
            return finish(P, c, rho, std::move(sol));
        }
        const int side = f > 0.0 ? +1 : -1;
        if (side > 0) {
            lo = tau;
            f_lo = f;
        } else {
            hi = tau;
            f_hi = f;
        }
        const double proposal = tau * g;
        if (std::abs(f) <= 0.5 * prev_abs_f && proposal > lo && proposal < hi) {
            tau = proposal;
        } else {
            tau = fallback_step(side);
        }
        prev_abs_f = std::abs(f);
    }

    std::ostringstream msg;
    msg << "solve_rpc: dual iteration did not converge in " << params.max_outer
        << " steps (tau = " << tau << ", bracket [" << lo << ", " << hi << "])";
    const double alpha = tau / (1.0 + rho * gamma);
    throw ConvergenceError(msg.str(), Vector((alpha * gamma) * (sd.V * y)), params.max_outer);
}

RpcSolution solve_rpc(const LSProblem& problem, const SketchOperator& op, const RpcParams& params) {
    return solve_rpc(SketchedProblem::from(problem, op, /*with_spectral=*/true), params);
}

OracleResult rpc_oracle(const SketchedProblem& sp, double rho, double tol, int max_iter) {
    if (!(rho >= 0.0)) throw InvalidArgument("rpc_oracle: rho must be >= 0");
    if (!(tol > 0.0)) throw InvalidArgument("rpc_oracle: tol must be > 0");
    const Matrix& P = sp.P();
    const Vector& c = sp.c();
    const Eigen::Index n = sp.cols();
    const double cnorm = c.norm();

    OracleResult out;
    if (cnorm == 0.0) {
        out.x = Vector::Zero(n);
        return out;
    }
    if (rho == 0.0) {
        out.x = solve_pcls(sp);
        out.objective = rpc_objective(P, c, out.x, 0.0);
        out.foc_residual = rpc_stationarity_residual(P, c, out.x, 0.0);
        return out;
    }

    Matrix G = Matrix::Zero(n, n);
    G.selfadjointView<Eigen::Lower>().rankUpdate(P.transpose());
    G = G.selfadjointView<Eigen::Lower>();

    auto f = [&](const Vector& x) { return rpc_objective(P, c, x, rho); };
    Vector x = GramSolver(P, rho).solve(c);
    double fx = f(x);
    double foc = rpc_stationarity_residual(P, c, x, rho);
    const double target = 10.0 * tol * cnorm;

    int it = 0;
    for (; it < max_iter; ++it) {
        const double a = (P * x).norm();
        const double b = x.norm();
        if (a == 0.0 || b == 0.0) break;
        Matrix H = G / a;
        H.diagonal().array() += rho / b;
        const Vector t = H.llt().solve(c) / (a + rho * b);

        // The MM step cannot increase f in exact arithmetic; the slack absorbs roundoff.
        const double slack = 1e-14 * (1.0 + std::abs(fx));
        double step = 1.0;
        Vector cand = t;
        double fc = f(cand);
        while (fc > fx + slack && step > 1e-8) {
            step *= 0.5;
            cand = x + step * (t - x);
            fc = f(cand);
        }
        const double change = fx - fc;
        x = std::move(cand);
        fx = fc;
        foc = rpc_stationarity_residual(P, c, x, rho);
        if (std::abs(change) <= tol * (1.0 + std::abs(fx)) && foc <= target) break;
    }

    // Damped Newton polish on the smooth objective (x != 0, Px != 0).
    for (int k = 0; k < 50 && foc > target; ++k) {
        const Vector px = P * x;
        const double a = px.norm();
        const double b = x.norm();
        if (a == 0.0 || b == 0.0) break;
        const Vector ga = G * x / a;
        const Vector g = ga + (rho / b) * x;
        const double t = a + rho * b;
        Matrix H = g * g.transpose() + (t / a) * (G - ga * ga.transpose());
        H += (t * rho / b) * (Matrix::Identity(n, n) - x * x.transpose() / (b * b));
        const Vector grad = t * g - c;
        const Vector dx = H.ldlt().solve(-grad);
        // Objective differences are at roundoff level here, so steps are judged by
        // the stationarity residual.
        double step = 1.0;
        Vector cand = x + dx;
        double foc_c = rpc_stationarity_residual(P, c, cand, rho);
        while (!(foc_c < foc) && step > 1e-10) {
            step *= 0.5;
            cand = x + step * dx;
            foc_c = rpc_stationarity_residual(P, c, cand, rho);
        }
        if (!(foc_c < foc)) break;
        x = std::move(cand);
        fx = f(x);
        foc = foc_c;
    }

    // Golden-section polish of the scale along the final direction.
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double s_lo = 0.5, s_hi = 1.5;
    double s1 = s_hi - inv_phi * (s_hi - s_lo);
    double s2 = s_lo + inv_phi * (s_hi - s_lo);
    double f1 = f(s1 * x), f2 = f(s2 * x);
    while (s_hi - s_lo > 1e-13) {
        if (f1 < f2) {
            s_hi = s2;
            s2 = s1;
            f2 = f1;
            s1 = s_hi - inv_phi * (s_hi - s_lo);
            f1 = f(s1 * x);
        } else {
            s_lo = s1;
            s1 = s2;
            f1 = f2;
            s2 = s_lo + inv_phi * (s_hi - s_lo);
            f2 = f(s2 * x);
        }
    }
    // f is flat in the scale near the optimum, so a roundoff-level decrease is only
    // taken when it does not cost stationarity.
    const Vector polished = (0.5 * (s_lo + s_hi)) * x;
    const double f_pol = f(polished);
    const double foc_pol = rpc_stationarity_residual(P, c, polished, rho);
    if (f_pol < fx && (foc_pol <= foc || foc_pol <= target)) {
        x = polished;
        fx = f_pol;
        foc = foc_pol;
    }

    if (foc > target) {
        std::ostringstream msg;
        msg << "rpc_oracle: stationarity residual " << foc << " above " << target << " after " << it
            << " iterations";
        throw ConvergenceError(msg.str(), x, it);
    }
    out.x = std::move(x);
    out.objective = fx;
    out.iterations = it;
    out.foc_residual = foc;
    return out;
}

}  // namespace rpcls
