#pragma once

#include "rpcls/methods.hpp"
#include "rpcls/sketch.hpp"
#include "rpcls/synthetic.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace rpcls {

struct CsvSource {
    std::string path;
    std::optional<std::string> b_path;      // nullopt: last column is b
    std::optional<Eigen::Index> train_rows; // resample this many rows per trial
};

using ProblemSource = std::variant<SyntheticOptions, CsvSource>;

/// One benchmark run: every method on every (sketch kind, m, trial) cell.
///
/// JSON form (keys optional unless noted):
///   {"problem": {"type": "synthetic", "M": 2000, "N": 50, "condition": 1e4,
///                "coherence": "incoherent", "seed": 1, "residual_fraction": 0.5}
///            or {"type": "csv", "path": "...", "b_path": "...", "train_rows": 5000},
///    "sketches": ["ros", "count"], "m": [500], "m_over_n": [10],
///    "methods": ["pcls", "rpc"] (required), "trials": 50, "seed": 7,
///    "rho": 1, "mu": "auto" | number, "mu_factor": 5, "lsqr_tol": 1e-6,
///    "timing_repeats": 3, "output_dir": "out"}
struct ExperimentConfig {
    ProblemSource source = SyntheticOptions{};
    std::vector<SketchKind> kinds;
    std::vector<Eigen::Index> m_values;
    std::vector<double> m_over_n;
    std::vector<Method> methods;
    int trials = 1;
    std::uint64_t seed = 0;
    MethodParams params;
    int timing_repeats = 3;
    std::string output_dir;

    /// Absolute m grid: m_values followed by round(f * N) for f in m_over_n.
    std::vector<Eigen::Index> resolved_m(Eigen::Index N) const;
    /// Checks trials >= 1, a nonempty method list, and N <= m <= M for every m
    /// (only when some method needs a sketch).
    void validate(Eigen::Index M, Eigen::Index N) const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);

/// 16-hex-digit FNV-1a hash of the canonical JSON form.
std::string config_hash(const ExperimentConfig& config);

struct TrialRecord {
    std::string config_hash;
    Method method = Method::Ols;
    std::optional<SketchKind> kind;  // nullopt for unsketched methods
    Eigen::Index m = 0;
    Eigen::Index M = 0;
    std::uint64_t seed = 0;
    int trial = 0;
    bool ok = true;
    std::string error;
    double residual_ratio = 0.0;     // ||A xhat - b|| / ||A x_LS - b||
    double relative_accuracy = 0.0;  // residual_ratio - 1
    double eps_optimality = 0.0;
    std::map<std::string, double> timings;
    nlohmann::json details = nlohmann::json::object();

    double total_time() const;
};

nlohmann::json to_json(const TrialRecord& r);
TrialRecord trial_record_from_json(const nlohmann::json& j);

/// Seed for one (kind, m, trial) cell; independent of execution order.
std::uint64_t cell_seed(std::uint64_t base, SketchKind kind, Eigen::Index m, int trial);

/// Runs the experiment. Each record is handed to `sink` as soon as it exists, and
/// appended to <output_dir>/records.jsonl when output_dir is set. A failing trial
/// yields a record with ok = false instead of aborting the run.
std::vector<TrialRecord> run_experiment(const ExperimentConfig& config,
                                        const std::function<void(const TrialRecord&)>& sink = {});

}  // namespace rpcls
