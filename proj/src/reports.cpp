#include "rpcls/reports.hpp"

#include "rpcls/solvers.hpp"

#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace rpcls {

using nlohmann::json;

namespace {

std::string group_label(const TrialRecord& r, const std::vector<std::string>& keys) {
    std::string label;
    for (const auto& key : keys) {
        if (!label.empty()) label += '/';
        if (key == "method") {
            label += to_string(r.method);
        } else if (key == "sketch") {
            label += r.kind ? to_string(*r.kind) : "none";
        } else if (key == "m") {
            label += std::to_string(r.m);
        } else {
            throw InvalidArgument("emit_profile: unknown group key '" + key + "'");
        }
    }
    return label.empty() ? "all" : label;
}

void append_profile(std::ostringstream& os, const std::string& group, const std::vector<double>& values) {
    for (const auto& p : relative_residual_profile(values)) {
        os << group << ',' << p.fraction << ',' << p.value << '\n';
    }
}

}  // namespace

json to_json(const SketchSpec& spec) {
    return {{"kind", to_string(spec.kind)}, {"m", spec.m}, {"M", spec.M}, {"seed", spec.seed}};
}

SketchSpec sketch_spec_from_json(const json& j) {
    SketchSpec s;
    s.kind = parse_sketch_kind(j.at("kind").get<std::string>());
    s.m = j.at("m").get<Eigen::Index>();
    s.M = j.at("M").get<Eigen::Index>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.validate();
    return s;
}

json to_json(const SolverReport& r) {
    json j = {{"method", r.method},
              {"residual_norm", r.residual_norm},
              {"relative_accuracy", r.relative_accuracy},
              {"eps_optimality", r.eps_optimality},
              {"timings", r.timings}};
    j["timings"]["total"] = r.total_time();
    return j;
}

json to_json(const RpcSolution& s) {
    return {{"x", std::vector<double>(s.x.data(), s.x.data() + s.x.size())},
            {"alpha", s.alpha},
            {"beta", s.beta},
            {"tau", s.tau},
            {"gamma", s.gamma},
            {"outer_iters", s.outer_iters},
            {"newton_iters_total", s.newton_iters_total},
            {"foc_residual", s.foc_residual},
            {"converged", s.converged}};
}

std::vector<TrialRecord> read_records(std::istream& in) {
    std::vector<TrialRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(trial_record_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw InvalidArgument("records line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

void write_record(std::ostream& out, const TrialRecord& record) {
    out << to_json(record).dump() << '\n';
    out.flush();
}

std::string emit_profile(const std::vector<TrialRecord>& records, const std::vector<std::string>& group_by) {
    std::map<std::string, std::vector<double>> groups;
    for (const auto& r : records) {
        auto& bucket = groups[group_label(r, group_by)];
        if (r.ok) bucket.push_back(r.residual_ratio);
    }
    std::ostringstream os;
    os << std::setprecision(12);
    os << "group,fraction,value\n";
    for (const auto& [group, values] : groups) {
        if (values.empty()) {
            emit_warning("emit_profile: group '" + group + "' has no successful records; omitted");
            continue;
        }
        append_profile(os, group, values);
    }
    return os.str();
}

std::string emit_profile_values(const std::vector<double>& values, const std::string& group) {
    std::ostringstream os;
    os << std::setprecision(12);
    os << "group,fraction,value\n";
    append_profile(os, group, values);
    return os.str();
}

std::string emit_timing_breakdown(const std::vector<TrialRecord>& records) {
    struct Acc {
        int count = 0;
        double sketch = 0.0, factor = 0.0, solve = 0.0;
    };
    std::map<std::tuple<std::string, std::string, Eigen::Index>, Acc> groups;
    for (const auto& r : records) {
        if (!r.ok) continue;
        auto& acc = groups[{to_string(r.method), r.kind ? to_string(*r.kind) : "none", r.m}];
        auto phase = [&](const char* name) {
            const auto it = r.timings.find(name);
            return it == r.timings.end() ? 0.0 : it->second;
        };
        ++acc.count;
        acc.sketch += phase("sketch");
        acc.factor += phase("factor");
        acc.solve += phase("solve");
    }
    std::ostringstream os;
    os << std::setprecision(15);
    os << "method,sketch,m,count,sketch_s,factor_s,solve_s,total_s\n";
    for (const auto& [key, acc] : groups) {
        const double n = acc.count;
        const double s = acc.sketch / n, f = acc.factor / n, v = acc.solve / n;
        os << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ',' << acc.count << ','
           << s << ',' << f << ',' << v << ',' << (s + f + v) << '\n';
    }
    return os.str();
}

}  // namespace rpcls
