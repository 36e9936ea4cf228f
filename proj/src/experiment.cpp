#include "rpcls/experiment.hpp"

#include "rpcls/csv.hpp"
#include "rpcls/reports.hpp"
#include "rpcls/rng.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace rpcls {

using nlohmann::json;

namespace {

SyntheticOptions synthetic_from_json(const json& j) {
    SyntheticOptions o;
    o.M = j.at("M").get<Eigen::Index>();
    o.N = j.at("N").get<Eigen::Index>();
    o.condition = j.value("condition", 1.0);
    o.coherence = parse_coherence(j.value("coherence", std::string("incoherent")));
    o.seed = j.value("seed", std::uint64_t{0});
    o.residual_fraction = j.value("residual_fraction", 0.5);
    return o;
}

struct Instance {
    LSProblem problem;
    Vector x_ls;
};

Instance make_instance(LSProblem p) {
    Vector x = solve_ols(p);
    return {std::move(p), std::move(x)};
}

void evaluate(TrialRecord& rec, const MethodRun& run, const Instance& inst) {
    rec.residual_ratio = residual_ratio(run.x, inst.problem, inst.x_ls);
    rec.relative_accuracy = rec.residual_ratio - 1.0;
    rec.eps_optimality = eps_optimality(run.x, inst.problem, inst.x_ls);
    rec.timings = run.timings;
    rec.details = run.details;
}

}  // namespace

std::vector<Eigen::Index> ExperimentConfig::resolved_m(Eigen::Index N) const {
    std::vector<Eigen::Index> out = m_values;
    for (double f : m_over_n) out.push_back(static_cast<Eigen::Index>(std::llround(f * static_cast<double>(N))));
    return out;
}

void ExperimentConfig::validate(Eigen::Index M, Eigen::Index N) const {
    if (trials < 1) throw InvalidArgument("config: trials must be >= 1");
    if (methods.empty()) throw InvalidArgument("config: no methods listed");
    if (timing_repeats < 1) throw InvalidArgument("config: timing_repeats must be >= 1");
    bool sketched = false;
    for (Method m : methods) sketched = sketched || uses_sketch(m);
    if (!sketched) return;
    if (kinds.empty()) throw InvalidArgument("config: sketched methods need at least one sketch kind");
    const auto grid = resolved_m(N);
    if (grid.empty()) throw InvalidArgument("config: sketched methods need at least one m value");
    for (Eigen::Index m : grid) {
        if (m < N || m > M) {
            throw InvalidArgument("config: m = " + std::to_string(m) + " outside [N, M] = [" +
                                  std::to_string(N) + ", " + std::to_string(M) + "]");
        }
    }
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    const json& p = j.at("problem");
    const std::string type = p.value("type", std::string("synthetic"));
    if (type == "synthetic") {
        c.source = synthetic_from_json(p);
    } else if (type == "csv") {
        CsvSource s;
        s.path = p.at("path").get<std::string>();
        if (p.contains("b_path")) s.b_path = p.at("b_path").get<std::string>();
        if (p.contains("train_rows")) s.train_rows = p.at("train_rows").get<Eigen::Index>();
        c.source = s;
    } else {
        throw InvalidArgument("config: unknown problem type '" + type + "'");
    }
    for (const auto& k : j.value("sketches", json::array())) c.kinds.push_back(parse_sketch_kind(k.get<std::string>()));
    c.m_values = j.value("m", std::vector<Eigen::Index>{});
    c.m_over_n = j.value("m_over_n", std::vector<double>{});
    for (const auto& m : j.at("methods")) c.methods.push_back(parse_method(m.get<std::string>()));
    c.trials = j.value("trials", 1);
    c.seed = j.value("seed", std::uint64_t{0});
    c.params.rho = j.value("rho", 1.0);
    if (j.contains("mu") && !(j["mu"].is_string() && j["mu"] == "auto")) c.params.mu = j["mu"].get<double>();
    c.params.mu_factor = j.value("mu_factor", 5.0);
    c.params.lsqr_tol = j.value("lsqr_tol", 1e-6);
    c.params.lsqr_max_iter = j.value("lsqr_max_iter", 1000);
    c.timing_repeats = j.value("timing_repeats", 3);
    c.output_dir = j.value("output_dir", std::string());
    return c;
}

json to_json(const ExperimentConfig& c) {
    json j;
    if (const auto* s = std::get_if<SyntheticOptions>(&c.source)) {
        j["problem"] = {{"type", "synthetic"},   {"M", s->M},
                        {"N", s->N},             {"condition", s->condition},
                        {"coherence", to_string(s->coherence)}, {"seed", s->seed},
                        {"residual_fraction", s->residual_fraction}};
    } else {
        const auto& csv = std::get<CsvSource>(c.source);
        j["problem"] = {{"type", "csv"}, {"path", csv.path}};
        if (csv.b_path) j["problem"]["b_path"] = *csv.b_path;
        if (csv.train_rows) j["problem"]["train_rows"] = *csv.train_rows;
    }
    j["sketches"] = json::array();
    for (SketchKind k : c.kinds) j["sketches"].push_back(to_string(k));
    j["m"] = c.m_values;
    j["m_over_n"] = c.m_over_n;
    j["methods"] = json::array();
    for (Method m : c.methods) j["methods"].push_back(to_string(m));
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    j["rho"] = c.params.rho;
    j["mu"] = c.params.mu ? json(*c.params.mu) : json("auto");
    j["mu_factor"] = c.params.mu_factor;
    j["lsqr_tol"] = c.params.lsqr_tol;
    j["lsqr_max_iter"] = c.params.lsqr_max_iter;
    j["timing_repeats"] = c.timing_repeats;
    j["output_dir"] = c.output_dir;
    return j;
}

std::string config_hash(const ExperimentConfig& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : to_json(config).dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

double TrialRecord::total_time() const {
    return std::accumulate(timings.begin(), timings.end(), 0.0,
                           [](double acc, const auto& kv) { return acc + kv.second; });
}

json to_json(const TrialRecord& r) {
    json j = {{"config_hash", r.config_hash},
              {"method", to_string(r.method)},
              {"sketch", r.kind ? to_string(*r.kind) : std::string("none")},
              {"m", r.m},
              {"M", r.M},
              {"seed", r.seed},
              {"trial", r.trial},
              {"status", r.ok ? "ok" : "failed"}};
    if (r.ok) {
        j["residual_ratio"] = r.residual_ratio;
        j["relative_accuracy"] = r.relative_accuracy;
        j["eps_optimality"] = r.eps_optimality;
        j["timings"] = r.timings;
        j["timings"]["total"] = r.total_time();
        if (!r.details.empty()) j["details"] = r.details;
    } else {
        j["error"] = r.error;
    }
    return j;
}

TrialRecord trial_record_from_json(const json& j) {
    TrialRecord r;
    r.config_hash = j.value("config_hash", std::string());
    r.method = parse_method(j.at("method").get<std::string>());
    const std::string sketch = j.value("sketch", std::string("none"));
    if (sketch != "none") r.kind = parse_sketch_kind(sketch);
    r.m = j.value("m", Eigen::Index{0});
    r.M = j.value("M", Eigen::Index{0});
    r.seed = j.value("seed", std::uint64_t{0});
    r.trial = j.value("trial", 0);
    r.ok = j.value("status", std::string("ok")) == "ok";
    r.error = j.value("error", std::string());
    if (r.ok) {
        r.residual_ratio = j.at("residual_ratio").get<double>();
        r.relative_accuracy = j.value("relative_accuracy", r.residual_ratio - 1.0);
        r.eps_optimality = j.value("eps_optimality", 0.0);
        if (j.contains("timings")) {
            for (const auto& [phase, v] : j["timings"].items()) {
                if (phase != "total") r.timings[phase] = v.get<double>();
            }
        }
        r.details = j.value("details", json::object());
    }
    return r;
}

std::uint64_t cell_seed(std::uint64_t base, SketchKind kind, Eigen::Index m, int trial) {
    std::uint64_t k = derive_key(base, static_cast<std::uint64_t>(kind) + 1);
    k = derive_key(k, static_cast<std::uint64_t>(m));
    return derive_key(k, static_cast<std::uint64_t>(trial));
}

std::vector<TrialRecord> run_experiment(const ExperimentConfig& config,
                                        const std::function<void(const TrialRecord&)>& sink) {
    std::optional<Instance> fixed;
    std::optional<LSProblem> pool;  // CSV source with per-trial row resampling
    Eigen::Index train_rows = 0;
    if (const auto* s = std::get_if<SyntheticOptions>(&config.source)) {
        fixed = make_instance(generate_synthetic(*s).problem);
    } else {
        const auto& csv = std::get<CsvSource>(config.source);
        LSProblem loaded = load_csv(csv.path, csv.b_path);
        if (csv.train_rows) {
            train_rows = *csv.train_rows;
            pool = std::move(loaded);
        } else {
            fixed = make_instance(std::move(loaded));
        }
    }
    const Eigen::Index N = fixed ? fixed->problem.cols() : pool->cols();
    const Eigen::Index M = fixed ? fixed->problem.rows() : train_rows;
    if (pool && (train_rows < N || train_rows > pool->rows())) {
        throw InvalidArgument("config: train_rows must lie in [N, rows of the CSV]");
    }
    config.validate(M, N);

    std::ofstream out;
    if (!config.output_dir.empty()) {
        std::filesystem::create_directories(config.output_dir);
        const auto path = std::filesystem::path(config.output_dir) / "records.jsonl";
        out.open(path, std::ios::app);
        if (!out) throw InvalidArgument("cannot open '" + path.string() + "' for appending");
    }

    const std::string hash = config_hash(config);
    const auto grid = config.resolved_m(N);
    std::vector<TrialRecord> records;
    auto emit = [&](TrialRecord rec) {
        if (out.is_open()) write_record(out, rec);
        if (sink) sink(rec);
        records.push_back(std::move(rec));
    };

    for (int trial = 0; trial < config.trials; ++trial) {
        std::optional<Instance> resampled;
        if (pool) {
            const std::uint64_t split_seed = derive_key(config.seed, 0x7ea1ULL + static_cast<std::uint64_t>(trial));
            resampled = make_instance(take_rows(*pool, sample_row_split(pool->rows(), train_rows, 0, split_seed).train));
        }
        const Instance& inst = fixed ? *fixed : *resampled;

        auto run_cell = [&](Method method, const SketchOperator* op, std::optional<SketchKind> kind,
                            Eigen::Index m, std::uint64_t seed) {
            TrialRecord rec;
            rec.config_hash = hash;
            rec.method = method;
            rec.kind = kind;
            rec.m = m;
            rec.M = M;
            rec.seed = seed;
            rec.trial = trial;
            try {
                const MethodRun run = run_method(method, inst.problem, op, config.params, config.timing_repeats);
                evaluate(rec, run, inst);
            } catch (const std::exception& e) {
                rec.ok = false;
                rec.error = e.what();
            }
            emit(std::move(rec));
        };

        for (Method method : config.methods) {
            if (!uses_sketch(method)) run_cell(method, nullptr, std::nullopt, 0, config.seed);
        }
        for (SketchKind kind : config.kinds) {
            for (Eigen::Index m : grid) {
                const std::uint64_t seed = cell_seed(config.seed, kind, m, trial);
                std::optional<SketchOperator> op;
                for (Method method : config.methods) {
                    if (!uses_sketch(method)) continue;
                    if (!op) op.emplace(SketchSpec{kind, m, M, seed});
                    run_cell(method, &*op, kind, m, seed);
                }
            }
        }
    }
    return records;
}

}  // namespace rpcls
