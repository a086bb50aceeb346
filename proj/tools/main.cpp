#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "weakres/env/model.hpp"
#include "weakres/error.hpp"
#include "weakres/milp/encoder.hpp"
#include "weakres/milp/lp_format.hpp"
#include "weakres/resolver/resolver.hpp"
#include "weakres/sim/experiment.hpp"
#include "weakres/stl/monitor.hpp"
#include "weakres/weak/weakstl.hpp"

using namespace weakres;
using json = nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kInput = 2, kFallback = 3, kInternal = 4 };

// Always shows a decimal point: -2 prints as -2.0.
std::string num(double v) {
    v += 0.0; // no "-0.0"
    std::string s = fmt::format("{}", v);
    if (std::isfinite(v) && s.find_first_of(".e") == std::string::npos)
        s += ".0";
    return s;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw InvalidInput("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw InvalidInput("cannot write '" + path.string() + "'");
    out << text;
}

std::string tuple(const std::vector<int>& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? ", " : "") + std::to_string(v[i]);
    return s + ")";
}

Eigen::VectorXd parse_vector(const std::string& text) {
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            vals.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos)
                throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw InvalidInput("bad number '" + item + "' in action payload");
        }
    }
    return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

// Past signal with the model's derived columns filled in when absent.
stl::Signal load_past(const std::string& path, const env::TransitionSystem& model) {
    auto s = stl::read_signal_csv_file(path);
    if (model.derived().empty())
        return s;
    bool has_all = true;
    for (const auto& d : model.derived())
        has_all = has_all && s.index_of(d.name).has_value();
    if (has_all)
        return s;
    Eigen::MatrixXd q(s.length(), model.num_states());
    for (int i = 0; i < model.num_states(); ++i) {
        auto col = s.index_of(model.states()[static_cast<std::size_t>(i)].name);
        if (!col)
            throw InvalidInput("past signal lacks state variable '" + model.states()[static_cast<std::size_t>(i)].name + "'");
        q.col(i) = s.samples().col(*col);
    }
    Eigen::MatrixXd full(s.length(), model.num_states() + static_cast<Eigen::Index>(model.derived().size()));
    for (stl::Index k = 0; k < s.length(); ++k) {
        Eigen::VectorXd row = q.row(k).transpose();
        full.row(k) << row.transpose(), env::derived_values(model, row).transpose();
    }
    return stl::Signal(model.signal_variables(), full, s.step_duration());
}

struct ResolveInputs {
    std::string feature1, feature2, model, past;
    int horizon = 3;
    std::string fallback, fallback_action, fallback_tag;
};

void add_resolve_options(CLI::App* cmd, ResolveInputs& in) {
    cmd->add_option("feature1", in.feature1, "first feature file")->required();
    cmd->add_option("feature2", in.feature2, "second feature file")->required();
    cmd->add_option("model", in.model, "environment model file")->required();
    cmd->add_option("past", in.past, "past signal CSV")->required();
    cmd->add_option("-N,--horizon", in.horizon, "prediction horizon")->check(CLI::PositiveNumber);
    cmd->add_option("--fallback", in.fallback, "feature whose action runs when no weakening exists");
    cmd->add_option("--fallback-action", in.fallback_action, "payload of the fallback action, e.g. 1,0");
    cmd->add_option("--fallback-tag", in.fallback_tag, "tag of the fallback action");
}

int run_monitor(const std::string& formula, const std::string& signal, long t, bool as_json) {
    auto f = stl::parse_stl(read_file(formula));
    auto s = stl::read_signal_csv_file(signal);
    double rho = stl::robustness(f, s, t);
    if (as_json)
        std::cout << json{{"formula", stl::to_string(f)}, {"t", t}, {"robustness", rho},
                          {"satisfied", rho >= 0.0}}.dump()
                  << "\n";
    else
        std::cout << num(rho) << "\n";
    return kOk;
}

int run_resolve(const ResolveInputs& in, bool as_json) {
    auto f1 = resolver::parse_feature_file(in.feature1);
    auto f2 = resolver::parse_feature_file(in.feature2);
    auto model = env::parse_model_file(in.model);
    auto past = load_past(in.past, model);
    resolver::FeatureAction fb;
    fb.feature_id = in.fallback.empty() ? f1.id : in.fallback;
    fb.action_space = fb.feature_id == f2.id ? f2.action_space : f1.action_space;
    if (!in.fallback_action.empty())
        fb.payload = parse_vector(in.fallback_action);
    fb.tag = in.fallback_tag;

    auto r = resolver::resolve(f1, f2, model, past, in.horizon, fb);
    if (as_json) {
        json j{{"kind", resolver::to_string(r.kind)}, {"seconds", r.seconds}, {"warnings", r.warnings}};
        if (r.kind == resolver::ResolutionKind::Fallback) {
            j["fallback"] = {{"feature", r.fallback_feature},
                             {"payload", std::vector<double>(fb.payload.data(), fb.payload.data() + fb.payload.size())},
                             {"tag", fb.tag}};
        } else {
            j["theta"] = {{f1.id, r.theta1}, {f2.id, r.theta2}};
            j["delta"] = {{"total", r.delta()}, {f1.id, r.delta1}, {f2.id, r.delta2}};
            json acts = json::array();
            for (Eigen::Index k = 0; k < r.actions.rows(); ++k) {
                json row;
                for (int a = 0; a < model.num_actions(); ++a)
                    row[model.actions()[static_cast<std::size_t>(a)].name] = r.actions(k, a) + 0.0;
                acts.push_back(row);
            }
            j["actions"] = acts;
        }
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "kind: " << resolver::to_string(r.kind) << "\n";
        if (r.kind == resolver::ResolutionKind::Fallback) {
            std::cout << "fallback: " << r.fallback_feature << "\n";
        } else {
            std::cout << "theta(" << f1.id << "): " << tuple(r.theta1) << "\n";
            std::cout << "theta(" << f2.id << "): " << tuple(r.theta2) << "\n";
            std::cout << "delta: " << num(r.delta()) << " (" << f1.id << " " << num(r.delta1) << ", " << f2.id
                      << " " << num(r.delta2) << ")\n";
            std::cout << "actions:\n";
            for (Eigen::Index k = 0; k < r.actions.rows(); ++k) {
                std::cout << "  t+" << k << ":";
                for (int a = 0; a < model.num_actions(); ++a)
                    std::cout << " " << model.actions()[static_cast<std::size_t>(a)].name << "="
                              << num(r.actions(k, a));
                std::cout << "\n";
            }
        }
        for (const auto& w : r.warnings)
            std::cerr << "warning: " << w << "\n";
    }
    return r.kind == resolver::ResolutionKind::Fallback ? kFallback : kOk;
}

int run_encode(const ResolveInputs& in, const std::string& out) {
    auto f1 = resolver::parse_feature_file(in.feature1);
    auto f2 = resolver::parse_feature_file(in.feature2);
    auto model = env::parse_model_file(in.model);
    resolver::check_against(f1, model);
    resolver::check_against(f2, model);
    auto enc = milp::encode_resolution(f1.requirement, f2.requirement, model, load_past(in.past, model), in.horizon);
    write_file(out, milp::export_lp(enc.problem));
    std::cout << fmt::format("{} variables ({} integer), {} constraints -> {}\n", enc.problem.num_variables(),
                             enc.problem.num_integer(), enc.problem.num_constraints(), out);
    return kOk;
}

int run_simulate(const std::string& scenario, const std::string& mode, const std::string& outdir) {
    auto cfg = sim::parse_scenario_file(scenario);
    if (!mode.empty())
        cfg.mode = sim::parse_mode(mode);
    sim::validate(cfg);
    auto r = sim::run_scenario(cfg);
    std::filesystem::path dir(outdir);
    write_file(dir / "trace.csv", sim::trace_csv(r, cfg));
    sim::ExperimentReport rep;
    rep.rows.push_back({cfg.case_study, 0, cfg, r.metrics, {}});
    write_file(dir / "metrics.csv", sim::metrics_csv(rep));
    const auto& m = r.metrics;
    std::cout << fmt::format("{} {} steps {}{}\n", sim::to_string(cfg.case_study), sim::to_string(cfg.mode), m.steps,
                             m.cap_hit ? " (step cap)" : "");
    if (m.interaction)
        std::cout << fmt::format("window [{}, {})  {} {:.3f}  {} {:.3f}  overall {:.3f}\n", m.window_start,
                                 m.window_end, m.f1.id, m.f1.normalized, m.f2.id, m.f2.normalized, m.overall);
    else
        std::cout << "no interaction\n";
    std::cout << fmt::format("resolutions {}  unsat {}  closure failures {}  mean solve {:.3f}s\n", m.resolutions,
                             m.unsat, m.closure_failures, m.solver_mean);
    return kOk;
}

struct ExperimentInputs {
    std::string cases = "all";
    int count = 25;
    std::vector<std::string> modes;
    std::string outdir = "results";
    int workers = 0;
    int horizon = 3;
    bool no_timing = false;
};

int run_experiment(const ExperimentInputs& in, std::uint64_t seed) {
    sim::ExperimentOptions o;
    if (in.cases != "all")
        o.cases = {sim::parse_case(in.cases)};
    o.count = in.count;
    o.seed = seed;
    o.workers = in.workers;
    o.horizon = in.horizon;
    for (const auto& m : in.modes)
        o.modes.push_back(sim::parse_mode(m));
    auto rep = sim::run_experiment(o);
    std::filesystem::path dir(in.outdir);
    write_file(dir / "metrics.csv", sim::metrics_csv(rep, !in.no_timing));
    auto text = sim::summary(rep);
    write_file(dir / "summary.txt", text);
    std::cout << text;
    for (const auto& row : rep.rows)
        if (!row.error.empty()) {
            std::cerr << "error: " << sim::to_string(row.case_study) << " scenario " << row.scenario << " "
                      << sim::to_string(row.config.mode) << ": " << row.error << "\n";
            return kInternal;
        }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Requirement-weakening conflict resolution for STL feature requirements"};
    app.require_subcommand(1);
    app.fallthrough();
    bool as_json = false;
    std::uint64_t seed = 1;
    app.add_flag("--json", as_json, "machine-readable output (monitor, resolve)");
    app.add_option("--seed", seed, "master seed for generated scenarios");

    std::string formula, signal;
    long t = 0;
    auto* monitor = app.add_subcommand("monitor", "robustness of an STL formula on a signal");
    monitor->add_option("formula", formula, "file holding the STL formula")->required();
    monitor->add_option("signal", signal, "signal CSV")->required();
    monitor->add_option("-t,--time", t, "evaluation step")->check(CLI::NonNegativeNumber);

    ResolveInputs rin;
    auto* resolve = app.add_subcommand("resolve", "weaken two conflicting requirements");
    add_resolve_options(resolve, rin);

    ResolveInputs ein;
    std::string lp_out = "resolution.lp";
    auto* encode = app.add_subcommand("encode", "write the resolution MILP in LP format");
    add_resolve_options(encode, ein);
    encode->add_option("-o,--output", lp_out, "LP file to write");

    std::string scenario, mode, sim_out = "run";
    auto* simulate = app.add_subcommand("simulate", "run one scenario");
    simulate->add_option("scenario", scenario, "scenario config file")->required();
    simulate->add_option("--mode", mode, "override the mode, e.g. weakening:land or priority:deliver,land");
    simulate->add_option("-o,--output", sim_out, "directory for trace.csv and metrics.csv");

    ExperimentInputs xin;
    auto* experiment = app.add_subcommand("experiment", "seeded batch of scenarios under every mode");
    experiment->add_option("case", xin.cases, "organ_delivery, surveillance or all");
    experiment->add_option("-n,--count", xin.count, "scenarios per case")->check(CLI::PositiveNumber);
    experiment->add_option("--modes", xin.modes, "modes to run (default: the four per case)");
    experiment->add_option("-o,--output", xin.outdir, "directory for metrics.csv and summary.txt");
    experiment->add_option("-j,--workers", xin.workers, "parallel runs (0: all cores)")->check(CLI::NonNegativeNumber);
    experiment->add_option("-N,--horizon", xin.horizon, "prediction horizon")->check(CLI::PositiveNumber);
    experiment->add_flag("--no-timing", xin.no_timing, "leave timing columns out of metrics.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*monitor)
            return run_monitor(formula, signal, t, as_json);
        if (*resolve)
            return run_resolve(rin, as_json);
        if (*encode)
            return run_encode(ein, lp_out);
        if (*simulate)
            return run_simulate(scenario, mode, sim_out);
        if (*experiment)
            return run_experiment(xin, seed);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kInput;
    } catch (const InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInternal;
    }
    return kUsage;
}
