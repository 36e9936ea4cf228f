// Command-line driver: synthetic generation, single solves, benchmark runs, and
// post-processing of benchmark records into profile / timing tables.

#include "rpcls/csv.hpp"
#include "rpcls/experiment.hpp"
#include "rpcls/methods.hpp"
#include "rpcls/reports.hpp"
#include "rpcls/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using nlohmann::json;

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// Writes to `path`, or stdout when it is empty or "-".
void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw rpcls::InvalidArgument("cannot open '" + path + "' for writing");
    out << text;
}

std::string read_input(const std::string& path) {
    if (path.empty() || path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path);
    if (!in) throw rpcls::InvalidArgument("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// `profile` accepts either JSONL trial records or one residual factor per line.
std::string profile_command(const std::string& text, const std::vector<std::string>& group_by) {
    std::vector<double> plain;
    bool all_numeric = true;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        double v = 0.0;
        const char* begin = line.data() + first;
        const char* end = line.data() + last + 1;
        const auto [ptr, ec] = std::from_chars(begin, end, v);
        if (ec != std::errc() || ptr != end) {
            all_numeric = false;
            break;
        }
        plain.push_back(v);
    }
    if (all_numeric) return rpcls::emit_profile_values(plain);
    std::istringstream in(text);
    return rpcls::emit_profile(rpcls::read_records(in), group_by);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sketched least-squares solvers and benchmark harness"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Write a synthetic problem as CSV (b is the last column)");
    rpcls::SyntheticOptions gopt;
    std::string coherence = "incoherent";
    std::string gen_out;
    gen->add_option("--M,--rows", gopt.M, "Rows")->required();
    gen->add_option("--N,--cols", gopt.N, "Columns")->required();
    gen->add_option("--condition", gopt.condition, "Condition number of A")->capture_default_str();
    gen->add_option("--coherence", coherence, "incoherent | semi-coherent | coherent")->capture_default_str();
    gen->add_option("--seed", gopt.seed, "RNG seed")->capture_default_str();
    gen->add_option("--residual-fraction", gopt.residual_fraction, "||z|| / ||A x||")->capture_default_str();
    gen->add_option("--out,-o", gen_out, "Output CSV (default stdout)");

    // solve
    auto* solve = app.add_subcommand("solve", "Run one method on one instance and print a JSON report");
    std::string input, b_input, method_name = "rpc", sketch_name = "ros", mu_text = "auto", solve_out;
    Eigen::Index m = 0;
    std::uint64_t seed = 0;
    rpcls::MethodParams mp;
    int repeats = 1;
    solve->add_option("--input,-i", input, "CSV with A (and b as last column unless --b)")->required();
    solve->add_option("--b", b_input, "Separate single-column CSV holding b");
    solve->add_option("--method", method_name,
                      "ols | ols-normal | cls | pcls | ridge-cls | ridge-pcls | robust-cls | rpc | blendenpik")
        ->capture_default_str();
    solve->add_option("--sketch", sketch_name, "gaussian | ros | count")->capture_default_str();
    solve->add_option("--m", m, "Sketch rows (default 10 N)");
    solve->add_option("--seed", seed, "Sketch seed")->capture_default_str();
    solve->add_option("--rho", mp.rho, "Uncertainty radius")->capture_default_str();
    solve->add_option("--mu", mu_text, "Ridge parameter or 'auto'")->capture_default_str();
    solve->add_option("--mu-factor", mp.mu_factor, "auto mu = factor * sigma_min(Phi A)^2")->capture_default_str();
    solve->add_option("--lsqr-tol", mp.lsqr_tol, "Blendenpik LSQR tolerance")->capture_default_str();
    solve->add_option("--repeats", repeats, "Timed repetitions (best per phase)")->capture_default_str();
    solve->add_option("--out,-o", solve_out, "Output JSON (default stdout)");

    // bench
    auto* bench = app.add_subcommand("bench", "Run an ExperimentConfig JSON and write JSONL trial records");
    std::string config_path, bench_out;
    std::optional<std::uint64_t> bench_seed;
    bench->add_option("--config,-c", config_path, "Experiment config JSON")->required();
    bench->add_option("--out,-o", bench_out, "Records file (default stdout)");
    bench->add_option("--seed", bench_seed, "Override the config seed");

    // profile
    auto* profile = app.add_subcommand("profile", "Performance-profile CSV from records or residual factors");
    std::string profile_in, profile_out, group_by = "method";
    profile->add_option("--input,-i", profile_in, "JSONL records or one factor per line (default stdin)");
    profile->add_option("--group-by", group_by, "Comma list of method,sketch,m")->capture_default_str();
    profile->add_option("--out,-o", profile_out, "Output CSV (default stdout)");

    // timing
    auto* timing = app.add_subcommand("timing", "Per-phase timing breakdown CSV from records");
    std::string timing_in, timing_out;
    timing->add_option("--input,-i", timing_in, "JSONL records (default stdin)");
    timing->add_option("--out,-o", timing_out, "Output CSV (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            gopt.coherence = rpcls::parse_coherence(coherence);
            const auto syn = rpcls::generate_synthetic(gopt);
            std::ostringstream os;
            rpcls::write_problem_csv(os, syn.problem);
            write_output(gen_out, os.str());
        } else if (*solve) {
            const auto problem = rpcls::load_csv(
                input, b_input.empty() ? std::nullopt : std::optional<std::string>(b_input));
            const rpcls::Method method = rpcls::parse_method(method_name);
            if (mu_text != "auto") mp.mu = std::stod(mu_text);
            std::optional<rpcls::SketchOperator> op;
            json out;
            if (rpcls::uses_sketch(method)) {
                const rpcls::SketchSpec spec{rpcls::parse_sketch_kind(sketch_name), m > 0 ? m : 10 * problem.cols(),
                                             problem.rows(), seed};
                op.emplace(spec);
                out["sketch"] = rpcls::to_json(spec);
            }
            const auto run = rpcls::run_method(method, problem, op ? &*op : nullptr, mp, repeats);
            const auto x_ls = rpcls::solve_ols(problem);
            out["report"] = rpcls::to_json(rpcls::make_report(method_name, run.x, problem, x_ls, run.timings));
            out["x"] = std::vector<double>(run.x.data(), run.x.data() + run.x.size());
            if (!run.details.empty()) out["details"] = run.details;
            write_output(solve_out, out.dump(2) + "\n");
        } else if (*bench) {
            auto config = rpcls::config_from_json(json::parse(read_input(config_path)));
            if (bench_seed) config.seed = *bench_seed;
            std::ofstream file;
            if (!bench_out.empty() && bench_out != "-") {
                file.open(bench_out, std::ios::app);
                if (!file) throw rpcls::InvalidArgument("cannot open '" + bench_out + "'");
            }
            std::ostream& os = file.is_open() ? static_cast<std::ostream&>(file) : std::cout;
            rpcls::run_experiment(config, [&](const rpcls::TrialRecord& r) { rpcls::write_record(os, r); });
        } else if (*profile) {
            write_output(profile_out, profile_command(read_input(profile_in), split_commas(group_by)));
        } else if (*timing) {
            std::istringstream in(read_input(timing_in));
            write_output(timing_out, rpcls::emit_timing_breakdown(rpcls::read_records(in)));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
