// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "rpcls/core.hpp"
#include "rpcls/lsqr.hpp"
#include "rpcls/rpc.hpp"
#include "rpcls/sketch.hpp"
#include "rpcls/solvers.hpp"
#include "rpcls/synthetic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

using namespace rpcls;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::mt19937_64& rng() {
    static std::mt19937_64 gen(20240917);
    return gen;
}

Matrix randn(Eigen::Index r, Eigen::Index c) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix out(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) out(i, j) = n(rng());
    return out;
}

Vector randn(Eigen::Index r) { return randn(r, 1).col(0); }

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[(v.size() - 1) / 2];
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

// Bisection on a decreasing function over [lo, hi] with f(lo) >= 0 >= f(hi).
double bisect(const std::function<double(double)>& f, double lo, double hi) {
    for (int i = 0; i < 400 && hi - lo > 1e-15 * std::max(1.0, hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) >= 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Outcome worst_case_tightness() {
    double worst_norm = 0.0, worst_attain = 0.0, worst_excess = -1.0;
    const double rhos[] = {0.1, 1.0, 10.0};
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        const double rho = rhos[t % 3];
        const Matrix P = randn(20, 6);
        const Vector x = randn(6);
        const double bound = worst_case_objective(P, x, rho);
        const Matrix dP = worst_case_perturbation(P, x, rho);
        worst_norm = std::max(worst_norm, rel(dP.norm(), rho));
        worst_attain = std::max(worst_attain, rel(((P + dP) * x).squaredNorm(), bound));
        for (int k = 0; k < 1000; ++k) {
            Matrix E = randn(20, 6);
            // half on the boundary sphere, half strictly inside
            E *= rho * (k % 2 == 0 ? 1.0 : u(rng())) / E.norm();
            worst_excess = std::max(worst_excess, ((P + E) * x).squaredNorm() / bound - 1.0);
        }
    }
    return {worst_norm <= 1e-10 && worst_attain <= 1e-10 && worst_excess <= 1e-12,
            "max | ||dP||_F - rho | rel " + fmt(worst_norm) + ", attainment rel " + fmt(worst_attain) +
                ", max sampled excess " + fmt(worst_excess)};
}

Outcome rpc_fixed_point() {
    double e_alpha = 0, e_beta = 0, e_tau = 0, e_foc = 0;
    int not_converged = 0;
    for (int t = 0; t < 50; ++t) {
        const auto syn = generate_synthetic({500, 20, 10.0, Coherence::Incoherent, 100u + t, 0.5});
        const SketchOperator op({SketchKind::Gaussian, 100, 500, 5000u + t});
        const auto sp = SketchedProblem::from(syn.problem, op, true);
        const RpcSolution s = solve_rpc(sp, RpcParams{});
        if (!s.converged) ++not_converged;
        const double a = (sp.P() * s.x).norm(), b = s.x.norm();
        e_alpha = std::max(e_alpha, std::abs(s.alpha - a) / s.alpha);
        e_beta = std::max(e_beta, std::abs(s.beta - b) / s.beta);
        e_tau = std::max(e_tau, std::abs(s.tau - (s.alpha + s.beta)) / s.tau);
        e_foc = std::max(e_foc, rpc_stationarity_residual(sp.P(), sp.c(), s.x, 1.0) / sp.c().norm());
    }
    return {not_converged == 0 && e_alpha <= 1e-6 && e_beta <= 1e-6 && e_tau <= 1e-6 && e_foc <= 1e-6,
            "alpha " + fmt(e_alpha) + ", beta " + fmt(e_beta) + ", tau " + fmt(e_tau) + ", foc/||c|| " +
                fmt(e_foc) + ", unconverged " + std::to_string(not_converged)};
}

Outcome oracle_equivalence() {
    double worst = 0.0;
    const double rhos[] = {0.3, 1.0, 3.0};
    for (int t = 0; t < 20; ++t) {
        const Eigen::Index N = 1 + t % 10;
        const Eigen::Index m = N + 5 + t;
        const Matrix P = randn(m, N);
        const Vector c = randn(N) * std::sqrt(static_cast<double>(m));
        const SketchedProblem sp(P, Vector::Zero(m), c, true);
        const double rho = rhos[t % 3];
        RpcParams params;
        params.rho = rho;
        const RpcSolution s = solve_rpc(sp, params);
        const OracleResult o = rpc_oracle(sp, rho);
        worst = std::max(worst, rel(rpc_objective(sp, s.x, rho), o.objective));
    }
    const SketchedProblem one(Matrix::Constant(1, 1, 1.0), Vector::Zero(1), Vector::Constant(1, 1.0), true);
    const RpcSolution s1 = solve_rpc(one, RpcParams{});
    const double e_x = std::abs(s1.x(0) - 0.25);
    const double e_f = std::abs(rpc_objective(one, s1.x, 1.0) + 0.125);
    return {worst <= 1e-6 && e_x <= 1e-8 && e_f <= 1e-8,
            "max objective rel gap " + fmt(worst) + ", N=1 |x-1/4| " + fmt(e_x) + ", |f+1/8| " + fmt(e_f)};
}

Outcome degenerate_limits() {
    // A = [B; 0], b = [0; r] gives A^T b = 0 exactly.
    Matrix A = Matrix::Zero(200, 5);
    A.topRows(100) = randn(100, 5);
    Vector b = Vector::Zero(200);
    b.tail(100) = randn(100);
    const LSProblem zero_c(A, b);
    const SketchOperator op0({SketchKind::Gaussian, 50, 200, 1});
    const RpcSolution s0 = solve_rpc(zero_c, op0);
    const bool exact_zero = (s0.x.array() == 0.0).all() && s0.alpha == 0.0 && s0.beta == 0.0 && s0.converged;

    double e_small_rho = 0.0;
    for (int t = 0; t < 5; ++t) {
        const auto syn = generate_synthetic({400, 10, 2.0, Coherence::Incoherent, 300u + t, 0.5});
        const SketchOperator op({SketchKind::Gaussian, 100, 400, 700u + t});
        const auto sp = SketchedProblem::from(syn.problem, op, true);
        RpcParams params;
        params.rho = 1e-8;
        const Vector xr = solve_rpc(sp, params).x;
        const Vector xp = solve_pcls(sp);
        e_small_rho = std::max(e_small_rho, (xr - xp).norm() / xp.norm());
    }

    const auto syn = generate_synthetic({300, 8, 100.0, Coherence::Incoherent, 42, 0.5});
    std::vector<Eigen::Index> buckets(300);
    std::iota(buckets.begin(), buckets.end(), Eigen::Index{0});
    const auto id = SketchOperator::count_sketch(300, buckets, std::vector<double>(300, 1.0));
    const auto sp = SketchedProblem::from(syn.problem, id);
    const Vector x_ls = solve_ols(syn.problem);
    const double e_cls = (solve_cls(sp) - x_ls).norm() / x_ls.norm();
    const double e_pcls = (solve_pcls(sp) - x_ls).norm() / x_ls.norm();
    return {exact_zero && e_small_rho <= 1e-5 && e_cls <= 1e-10 && e_pcls <= 1e-10,
            std::string("A^T b = 0 -> x = 0 ") + (exact_zero ? "exact" : "NOT exact") + ", rho=1e-8 gap " +
                fmt(e_small_rho) + ", Phi=I CLS " + fmt(e_cls) + " PCLS " + fmt(e_pcls)};
}

Outcome error_identities() {
    double worst_cls = 0.0, worst_pcls = 0.0;
    for (SketchKind kind : {SketchKind::Gaussian, SketchKind::ROS, SketchKind::CountSketch}) {
        for (int t = 0; t < 50; ++t) {
            const auto syn = generate_synthetic({300, 8, 100.0, Coherence::Incoherent, 900u + t, 1.0});
            const SketchOperator op({kind, 80, 300, 10000u + t});
            const auto [lc, rc] = cls_error_decomposition(syn.problem, op);
            const auto [lp, rp] = pcls_error_decomposition(syn.problem, op);
            worst_cls = std::max(worst_cls, (lc - rc).norm() / lc.norm());
            worst_pcls = std::max(worst_pcls, (lp - rp).norm() / lp.norm());
        }
    }
    return {worst_cls <= 1e-8 && worst_pcls <= 1e-8,
            "additive " + fmt(worst_cls) + ", multiplicative " + fmt(worst_pcls)};
}

Outcome sketch_unbiasedness() {
    std::string detail;
    bool ok = true;
    for (SketchKind kind : {SketchKind::Gaussian, SketchKind::ROS, SketchKind::CountSketch}) {
        Matrix mean = Matrix::Zero(64, 64);
        bool diag_exact = true;
        for (std::uint64_t seed = 0; seed < 2000; ++seed) {
            const Matrix F = SketchOperator({kind, 32, 64, seed}).dense();
            const Matrix G = F.transpose() * F;
            if (kind == SketchKind::CountSketch) diag_exact = diag_exact && (G.diagonal().array() == 1.0).all();
            mean += G;
        }
        mean /= 2000.0;
        const double dev = (mean - Matrix::Identity(64, 64)).cwiseAbs().maxCoeff();
        ok = ok && dev <= 0.05 && diag_exact;
        detail += to_string(kind) + " " + fmt(dev) + (kind == SketchKind::CountSketch && diag_exact ? " (diag exact)" : "") + ", ";
    }
    double full = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Matrix F = SketchOperator({SketchKind::ROS, 64, 64, seed}).dense();
        full = std::max(full, (F.transpose() * F - Matrix::Identity(64, 64)).cwiseAbs().maxCoeff());
    }
    ok = ok && full <= 1e-10;
    return {ok, detail + "full ROS " + fmt(full)};
}

Outcome newton_secular() {
    double e_closed = 0.0;
    std::uniform_real_distribution<double> u(0.2, 3.0);
    for (int t = 0; t < 50; ++t) {
        const double sigma = u(rng()), bbar = u(rng()) * (t % 2 ? 1 : -1), rho = u(rng());
        const double tau = std::abs(bbar) / rho * (0.1 + 0.8 * (t % 9) / 8.0);
        const double expected = (std::abs(bbar) / tau - rho) / (sigma * sigma);
        const double g = newton_gamma(Vector::Constant(1, sigma), Vector::Constant(1, bbar), rho, tau, 1e-14, 100).gamma;
        e_closed = std::max(e_closed, rel(g, expected));
    }
    double e_bis = 0.0;
    bool monotone = true;
    for (int t = 0; t < 50; ++t) {
        Vector sigma = randn(6).cwiseAbs();
        std::sort(sigma.data(), sigma.data() + 6, std::greater<>());
        const Vector bbar = randn(6);
        const double rho = u(rng());
        const double tau = bbar.norm() / rho * 0.5;
        auto phi = [&](double g) {
            return (bbar.array() / (g * sigma.array().square() + rho)).matrix().squaredNorm() / (tau * tau) - 1.0;
        };
        double hi = 1.0;
        while (phi(hi) > 0.0) hi *= 2.0;
        const double oracle = bisect(phi, 0.0, hi);
        const double g = newton_gamma(sigma, bbar, rho, tau, 1e-14, 100).gamma;
        e_bis = std::max(e_bis, rel(g, oracle));
        for (int k = 0; k <= 200; ++k) {
            const double gamma = hi * 4.0 * k / 200.0;
            monotone = monotone && secular_phi(sigma, bbar, rho, tau, gamma).derivative <= 0.0;
        }
    }
    return {e_closed <= 1e-10 && e_bis <= 1e-10 && monotone,
            "closed form rel " + fmt(e_closed) + ", bisection rel " + fmt(e_bis) +
                (monotone ? ", phi' <= 0 on grids" : ", phi' > 0 found")};
}

Outcome pcls_vs_cls() {
    const auto syn = generate_synthetic({3000, 75, 1e4, Coherence::Incoherent, 8, 2.0});
    const Vector x_ls = solve_ols(syn.problem);
    std::vector<double> cls, pcls;
    for (int t = 0; t < 50; ++t) {
        const SketchOperator op({SketchKind::ROS, 750, 3000, 8000u + t});
        const auto sp = SketchedProblem::from(syn.problem, op);
        cls.push_back(residual_ratio(solve_cls(sp), syn.problem, x_ls) - 1.0);
        pcls.push_back(residual_ratio(solve_pcls(sp), syn.problem, x_ls) - 1.0);
    }
    const double mc = median(cls), mp = median(pcls);
    return {mp < mc, "median relative_accuracy PCLS " + fmt(mp) + " vs CLS " + fmt(mc)};
}

Outcome eps_scaling() {
    const auto syn = generate_synthetic({2000, 50, 1e2, Coherence::Incoherent, 9, 0.5});
    const Vector x_ls = solve_ols(syn.problem);
    std::vector<double> e4, e16;
    for (int t = 0; t < 200; ++t) {
        for (auto [m, out] : {std::pair{200, &e4}, std::pair{800, &e16}}) {
            const SketchOperator op({SketchKind::Gaussian, m, 2000, 20000u + 2u * t + (m == 800)});
            out->push_back(eps_optimality(solve_pcls(SketchedProblem::from(syn.problem, op)), syn.problem, x_ls));
        }
    }
    const double ratio = median(e4) / median(e16);
    return {ratio >= 1.4 && ratio <= 2.8,
            "median eps m=4N " + fmt(median(e4)) + ", m=16N " + fmt(median(e16)) + ", ratio " + fmt(ratio)};
}

Outcome small_m_robustness() {
    const auto syn = generate_synthetic({500, 20, 1e2, Coherence::Incoherent, 10, 0.5});
    const Vector x_ls = solve_ols(syn.problem);
    std::vector<double> rpc, pcls;
    for (int t = 0; t < 200; ++t) {
        const SketchOperator op({SketchKind::Gaussian, 25, 500, 30000u + t});
        const auto sp = SketchedProblem::from(syn.problem, op, true);
        rpc.push_back(residual_ratio(solve_rpc(sp, RpcParams{}).x, syn.problem, x_ls) - 1.0);
        pcls.push_back(residual_ratio(solve_pcls(sp), syn.problem, x_ls) - 1.0);
    }
    const double pr = percentile(rpc, 0.9), pp = percentile(pcls, 0.9);
    return {pr < pp, "90th percentile relative_accuracy RPC " + fmt(pr) + " vs PCLS " + fmt(pp)};
}

Outcome blendenpik_baseline() {
    const auto syn = generate_synthetic({2000, 50, 1e6, Coherence::Incoherent, 11, 0.5});
    const Vector x_ols = solve_ols(syn.problem);
    const double tol = 1e-10;
    const SketchOperator op({SketchKind::Gaussian, 200, 2000, 77});
    const LsqrResult pre = solve_blendenpik(syn.problem, op, tol, 100);
    const double eps = eps_optimality(pre.x, syn.problem, x_ols);
    int plain_iters = 0;
    bool plain_capped = false;
    try {
        plain_iters = solve_lsqr(syn.problem, tol, 100).iterations;
    } catch (const ConvergenceError& e) {
        plain_capped = true;
        plain_iters = e.iterations();
    }
    return {eps <= 1e-6 && pre.iterations <= 100 && plain_capped,
            "preconditioned: " + std::to_string(pre.iterations) + " iterations, eps " + fmt(eps) +
                "; unpreconditioned: " + (plain_capped ? "> " : "") + std::to_string(plain_iters) + " iterations"};
}

Outcome profile_cli() {
    const auto dir = std::filesystem::temp_directory_path();
    const auto in = dir / ("rpcls_acceptance_" + std::to_string(::getpid()) + ".txt");
    {
        std::ofstream f(in);
        f << "1.04\n1.00\n1.02\n";
    }
    const std::string cmd = std::string(RPCLS_CLI_PATH) + " profile --input " + in.string();
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return {false, "could not launch CLI"};
    std::string out;
    char buf[256];
    while (std::fgets(buf, sizeof buf, pipe)) out += buf;
    const int status = ::pclose(pipe);
    std::filesystem::remove(in);

    std::istringstream lines(out);
    std::string line;
    std::getline(lines, line);
    const bool header = line == "group,fraction,value";
    std::vector<ProfilePoint> rows;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        const auto a = line.find(','), b = line.rfind(',');
        rows.push_back({std::stod(line.substr(a + 1, b - a - 1)), std::stod(line.substr(b + 1))});
    }
    const double expect_f[] = {1.0 / 3.0, 2.0 / 3.0, 1.0};
    const double expect_v[] = {1.00, 1.02, 1.04};
    bool ok = status == 0 && header && rows.size() == 3;
    for (std::size_t k = 0; ok && k < 3; ++k) {
        ok = std::abs(rows[k].fraction - expect_f[k]) <= 1e-9 && rows[k].value == expect_v[k];
    }
    const bool median_ok = ok && profile_at(rows, 0.5) == lower_median({1.04, 1.00, 1.02});
    return {ok && median_ok, std::to_string(rows.size()) + " rows" + (ok ? " sorted as expected" : " (mismatch)") +
                                 (median_ok ? ", fraction 0.5 reads the median 1.02" : "")};
}

Outcome gradient_check() {
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const Matrix P = randn(15, 5);
        const Vector c = randn(5);
        const Vector x = randn(5);
        const double rho = 0.5 + t % 3;
        const Vector g = rpc_gradient(P, c, x, rho);
        Vector fd(5);
        for (int i = 0; i < 5; ++i) {
            const double h = 1e-6 * std::max(1.0, std::abs(x(i)));
            Vector xp = x, xm = x;
            xp(i) += h;
            xm(i) -= h;
            fd(i) = (rpc_objective(P, c, xp, rho) - rpc_objective(P, c, xm, rho)) / (2 * h);
        }
        worst = std::max(worst, (fd - g).norm() / g.norm());
    }
    return {worst <= 1e-5, "max relative gradient error " + fmt(worst)};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        double limit_s;  // 0: no stated limit
        Outcome (*run)();
    };
    const Criterion criteria[] = {
        {"worst-case-tightness", 10, worst_case_tightness},
        {"rpc-fixed-point", 30, rpc_fixed_point},
        {"oracle-equivalence", 10, oracle_equivalence},
        {"degenerate-and-limit-cases", 0, degenerate_limits},
        {"error-decomposition-identities", 30, error_identities},
        {"sketch-unbiasedness", 0, sketch_unbiasedness},
        {"newton-secular-solver", 0, newton_secular},
        {"pcls-vs-cls-ordering", 0, pcls_vs_cls},
        {"eps-optimality-scaling", 120, eps_scaling},
        {"small-m-robustness", 0, small_m_robustness},
        {"blendenpik-baseline", 0, blendenpik_baseline},
        {"profile-cli", 0, profile_cli},
        {"gradient-check", 0, gradient_check},
    };
    set_warning_handler([](std::string_view) {});
    int failures = 0;
    int index = 0;
    for (const auto& c : criteria) {
        ++index;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.limit_s > 0 && secs >= c.limit_s) {
            o.pass = false;
            o.detail += "; over time limit " + fmt(c.limit_s) + " s";
        }
        if (!o.pass) ++failures;
        std::printf("%s %2d %-32s %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", index, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", index - failures, index);
    return failures == 0 ? 0 : 1;
}
