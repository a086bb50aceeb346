#include "weakres/sim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

#include <fmt/format.h>

#include "weakres/error.hpp"
#include "weakres/resolver/resolver.hpp"
#include "weakres/stl/monitor.hpp"

namespace weakres::sim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

stl::Signal rows_to_signal(const std::vector<std::string>& vars, const std::vector<Eigen::VectorXd>& rows,
                           Index pad, double dt) {
    Eigen::MatrixXd m(static_cast<Index>(rows.size()) + pad, static_cast<Index>(vars.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        m.row(static_cast<Index>(i)) = rows[i].transpose();
    for (Index k = 0; k < pad; ++k)
        m.row(static_cast<Index>(rows.size()) + k) = rows.back().transpose();
    return stl::Signal(vars, m, dt);
}

stl::Signal current(const World& w) {
    Eigen::MatrixXd m = w.sample().transpose();
    return stl::Signal(w.signal_variables(), m);
}

// Model-state past signal: one sample with state and derived values.
stl::Signal model_past(const env::TransitionSystem& model, const Eigen::VectorXd& q) {
    Eigen::VectorXd d = env::derived_values(model, q);
    Eigen::MatrixXd m(1, q.size() + d.size());
    m << q.transpose(), d.transpose();
    return stl::Signal(model.signal_variables(), m);
}

FeatureMetrics feature_metrics(const std::string& id, const ScenarioConfig& cfg, const stl::Signal& padded,
                               Index a, Index b, const std::vector<StepRecord>& steps) {
    const auto& spec = builtin_feature(id);
    auto original = weak::strip(spec.requirement);
    auto minimal = weak::minimal_requirement(spec.requirement);
    FeatureMetrics f;
    f.id = id;
    f.divisor = normalizer(id, cfg);
    f.series.resize(b - a);
    f.minimal_min = f.minimal_min_sat = std::numeric_limits<double>::infinity();
    for (Index k = a; k < b; ++k) {
        f.series(k - a) = stl::robustness(original, padded, k);
        double rm = stl::robustness(minimal, padded, k);
        f.minimal_min = std::min(f.minimal_min, rm);
        const std::string* d = k < static_cast<Index>(steps.size()) ? &steps[static_cast<std::size_t>(k)].decision : nullptr;
        if (d && (*d == "weakened" || *d == "no_conflict"))
            f.minimal_min_sat = std::min(f.minimal_min_sat, rm);
    }
    f.avg = f.series.mean();
    f.min = f.series.minCoeff();
    f.normalized = f.avg / f.divisor;
    return f;
}

} // namespace

RunResult run_scenario(const ScenarioConfig& cfg) {
    World world(cfg);
    auto [id1, id2] = case_features(cfg.case_study);
    const auto& f1 = builtin_feature(id1);
    const auto& f2 = builtin_feature(id2);
    double tol = cfg.tolerance > 0 ? cfg.tolerance : 0.5 * cfg.max_speed;
    if (cfg.mode.kind == ModeKind::Weakening && cfg.mode.fallback != id1 && cfg.mode.fallback != id2)
        throw InvalidInput("fallback '" + cfg.mode.fallback + "' is not a feature of " + to_string(cfg.case_study));

    std::vector<Eigen::VectorXd> rows;
    std::vector<StepRecord> steps;
    RunMetrics m;
    double solver_total = 0.0;
    for (;;) {
        rows.push_back(world.sample());
        StepRecord rec;
        auto now = current(world);
        rec.active1 = resolver::is_active(f1, now);
        rec.active2 = resolver::is_active(f2, now);
        if (world.finished() || world.state().clock >= cfg.step_cap) {
            m.cap_hit = !world.finished();
            rec.decision = "end";
            steps.push_back(rec);
            break;
        }
        Command cmd;
        if (rec.active1 && rec.active2) {
            auto a1 = world.native_action(id1), a2 = world.native_action(id2);
            rec.conflict = !resolver::detect({a1, a2}, tol).consistent();
            if (!rec.conflict) {
                // Agreeing velocities: fly their mean.
                cmd.velocity = {(a1.payload(0) + a2.payload(0)) / 2, (a1.payload(1) + a2.payload(1)) / 2};
                rec.decision = "agree";
            } else if (cfg.mode.kind == ModeKind::Priority) {
                auto chosen = resolver::resolve_priority({a1, a2}, cfg.mode.ordering);
                cmd = world.from_feature(chosen);
                rec.decision = chosen.feature_id;
            } else {
                auto model = world.runtime_model();
                Eigen::VectorXd q = world.model_state();
                const auto& fb = cfg.mode.fallback == id1 ? a1 : a2;
                resolver::ResolveOptions ropt;
                ropt.limits.time_seconds = 10.0;
                auto res = resolver::resolve(f1, f2, model, model_past(model, q), cfg.horizon, fb, ropt);
                ++m.resolutions;
                rec.solve_seconds = res.seconds;
                solver_total += res.seconds;
                m.solver_max = std::max(m.solver_max, res.seconds);
                if (res.kind != resolver::ResolutionKind::Fallback) {
                    cmd = world.from_model(res.actions.row(0).transpose());
                    rec.decision = resolver::to_string(res.kind);
                    rec.theta1 = res.theta1;
                    rec.theta2 = res.theta2;
                    auto replay = env::predict(model, q, res.actions);
                    auto w1 = weak::instantiate(f1.requirement,
                                                weak::Theta(res.theta1, weak::theta_bounds(f1.requirement)));
                    auto w2 = weak::instantiate(f2.requirement,
                                                weak::Theta(res.theta2, weak::theta_bounds(f2.requirement)));
                    rec.closure_margin =
                        std::min(stl::robustness(w1, replay, 0), stl::robustness(w2, replay, 0));
                    rec.closure_ok = rec.closure_margin >= -1e-6;
                    m.closure_failures += !rec.closure_ok;
                } else {
                    cmd = world.from_feature(fb);
                    rec.decision = "fallback:" + fb.feature_id;
                    ++m.unsat;
                }
            }
        } else if (rec.active1 || rec.active2) {
            auto a = world.native_action(rec.active1 ? id1 : id2);
            cmd = world.from_feature(a);
            rec.decision = a.feature_id;
        } else {
            cmd = world.mission();
            rec.decision = "mission";
        }
        steps.push_back(rec);
        world.apply(cmd);
    }
    m.steps = static_cast<int>(rows.size());
    m.solver_mean = m.resolutions ? solver_total / m.resolutions : 0.0;

    // Interaction window: first step with both active until both are off.
    Index n = static_cast<Index>(steps.size());
    Index a = 0;
    while (a < n && !(steps[static_cast<std::size_t>(a)].active1 && steps[static_cast<std::size_t>(a)].active2))
        ++a;
    Index b = a;
    while (b < n && (steps[static_cast<std::size_t>(b)].active1 || steps[static_cast<std::size_t>(b)].active2))
        ++b;
    int pad = std::max(weak::max_horizon(f1.requirement), weak::max_horizon(f2.requirement));
    m.interaction = a < n;
    m.window_start = a;
    m.window_end = b;
    if (m.interaction) {
        // After the run the drone holds its final state.
        auto padded = rows_to_signal(world.signal_variables(), rows, pad, cfg.step_seconds);
        m.f1 = feature_metrics(id1, cfg, padded, a, b, steps);
        m.f2 = feature_metrics(id2, cfg, padded, a, b, steps);
        m.overall = (m.f1.normalized + m.f2.normalized) / 2.0;
    } else {
        m.f1.id = id1;
        m.f2.id = id2;
        m.overall = kNaN;
    }
    return {rows_to_signal(world.signal_variables(), rows, 0, cfg.step_seconds), std::move(steps), m};
}

std::string trace_csv(const RunResult& r, const ScenarioConfig& cfg) {
    auto [id1, id2] = case_features(cfg.case_study);
    std::string s = "step,time";
    for (const auto& v : r.trace.variables())
        s += "," + v;
    s += ",active_" + id1 + ",active_" + id2 + ",conflict,decision\n";
    for (Index k = 0; k < r.trace.length(); ++k) {
        const auto& st = r.steps[static_cast<std::size_t>(k)];
        s += fmt::format("{},{}", k, k * cfg.step_seconds);
        for (Index j = 0; j < r.trace.dimension(); ++j)
            s += fmt::format(",{}", r.trace(k, j));
        s += fmt::format(",{},{},{},{}\n", int(st.active1), int(st.active2), int(st.conflict), st.decision);
    }
    return s;
}

ExperimentReport run_experiment(const ExperimentOptions& opt) {
    ExperimentReport rep;
    for (auto c : opt.cases) {
        auto configs = generate_scenarios(c, opt.count, opt.seed);
        auto modes = opt.modes.empty() ? default_modes(c) : opt.modes;
        for (int i = 0; i < opt.count; ++i)
            for (const auto& mode : modes) {
                ExperimentRow row;
                row.case_study = c;
                row.scenario = i;
                row.config = configs[static_cast<std::size_t>(i)];
                row.config.mode = mode;
                row.config.horizon = opt.horizon;
                rep.rows.push_back(std::move(row));
            }
    }
    int workers = opt.workers > 0 ? opt.workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < rep.rows.size(); i = next++) {
            auto& row = rep.rows[i];
            try {
                row.metrics = run_scenario(row.config).metrics;
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w)
        pool.emplace_back(work);
    work();
    for (auto& t : pool)
        t.join();
    return rep;
}

namespace {

std::string fmt_num(double v) {
    if (std::isnan(v))
        return "";
    return fmt::format("{:.6f}", v);
}

bool same_mode(const Mode& a, const Mode& b) {
    return a.kind == b.kind && a.fallback == b.fallback && a.ordering == b.ordering;
}

} // namespace

std::string metrics_csv(const ExperimentReport& r, bool timing) {
    std::string s = "case,scenario,seed,mode,archetype,interaction,window_start,window_end,"
                    "f1,f1_avg,f1_min,f1_norm,f1_minimal_min,f2,f2_avg,f2_min,f2_norm,f2_minimal_min,"
                    "overall,resolutions,unsat,closure_failures,cap_hit";
    if (timing)
        s += ",solver_mean_s,solver_max_s";
    s += ",error\n";
    for (const auto& row : r.rows) {
        const auto& m = row.metrics;
        bool ok = row.error.empty() && m.interaction;
        auto val = [&](double v) { return ok ? fmt_num(v) : std::string(); };
        s += fmt::format("{},{},{},{},{},{},{},{},", to_string(row.case_study), row.scenario, row.config.seed,
                         to_string(row.config.mode), row.config.cornered ? "cornered" : "random",
                         int(m.interaction), m.window_start, m.window_end);
        s += fmt::format("{},{},{},{},{},", m.f1.id, val(m.f1.avg), val(m.f1.min), val(m.f1.normalized),
                         val(m.f1.minimal_min));
        s += fmt::format("{},{},{},{},{},", m.f2.id, val(m.f2.avg), val(m.f2.min), val(m.f2.normalized),
                         val(m.f2.minimal_min));
        s += fmt::format("{},{},{},{},{}", val(m.overall), m.resolutions, m.unsat, m.closure_failures,
                         int(m.cap_hit));
        if (timing)
            s += "," + fmt_num(m.solver_mean) + "," + fmt_num(m.solver_max);
        std::string err = row.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        s += "," + err + "\n";
    }
    return s;
}

double mean_overall(const ExperimentReport& r, CaseStudy c, const Mode& m) {
    double sum = 0;
    int n = 0;
    for (const auto& row : r.rows)
        if (row.case_study == c && same_mode(row.config.mode, m) && row.error.empty() && row.metrics.interaction) {
            sum += row.metrics.overall;
            ++n;
        }
    return n ? sum / n : kNaN;
}

double mean_overall(const ExperimentReport& r, CaseStudy c, ModeKind kind) {
    double sum = 0;
    int n = 0;
    for (const auto& row : r.rows)
        if (row.case_study == c && row.config.mode.kind == kind && row.error.empty() && row.metrics.interaction) {
            sum += row.metrics.overall;
            ++n;
        }
    return n ? sum / n : kNaN;
}

std::string summary(const ExperimentReport& r) {
    std::string s;
    s += "# normalisation: robustness / largest weakening slack (deliver: initial required speed);\n";
    s += "# overall = mean of the two normalised window averages; runs without interaction are skipped.\n";
    std::vector<CaseStudy> cases;
    for (const auto& row : r.rows)
        if (std::find(cases.begin(), cases.end(), row.case_study) == cases.end())
            cases.push_back(row.case_study);
    for (auto c : cases) {
        s += "\n" + to_string(c) + "\n";
        s += fmt::format("{:<28} {:>5} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>6} {:>9} {:>6}\n", "mode", "runs",
                         "overall", "f1_norm", "f2_norm", "f1_worst", "f2_worst", "f2_minreq", "unsat", "solve_s",
                         "errors");
        std::vector<Mode> modes;
        for (const auto& row : r.rows)
            if (row.case_study == c && std::none_of(modes.begin(), modes.end(),
                                                    [&](const Mode& m) { return same_mode(m, row.config.mode); }))
                modes.push_back(row.config.mode);
        for (const auto& mode : modes) {
            int runs = 0, unsat = 0, errors = 0, res = 0;
            double overall = 0, n1 = 0, n2 = 0, w1 = kNaN, w2 = kNaN, mr = kNaN, solve = 0;
            for (const auto& row : r.rows) {
                if (row.case_study != c || !same_mode(row.config.mode, mode))
                    continue;
                if (!row.error.empty()) {
                    ++errors;
                    continue;
                }
                const auto& m = row.metrics;
                unsat += m.unsat;
                res += m.resolutions;
                solve += m.solver_mean * m.resolutions;
                if (!m.interaction)
                    continue;
                ++runs;
                overall += m.overall;
                n1 += m.f1.normalized;
                n2 += m.f2.normalized;
                w1 = std::isnan(w1) ? m.f1.min : std::min(w1, m.f1.min);
                w2 = std::isnan(w2) ? m.f2.min : std::min(w2, m.f2.min);
                mr = std::isnan(mr) ? m.f2.minimal_min : std::min(mr, m.f2.minimal_min);
            }
            auto avg = [&](double v) { return runs ? v / runs : kNaN; };
            s += fmt::format("{:<28} {:>5} {:>9.3f} {:>9.3f} {:>9.3f} {:>9.2f} {:>9.2f} {:>9.2f} {:>6} {:>9.4f} {:>6}\n",
                             to_string(mode), runs, avg(overall), avg(n1), avg(n2), w1, w2, mr, unsat,
                             res ? solve / res : 0.0, errors);
        }
        double weak = mean_overall(r, c, ModeKind::Weakening);
        for (const auto& mode : modes)
            if (mode.kind == ModeKind::Priority) {
                double pri = mean_overall(r, c, mode);
                s += fmt::format("H1 {}: weakening {:.3f} vs {} {:.3f} -> {}\n", to_string(c), weak, to_string(mode),
                                 pri, weak >= pri ? "holds" : "fails");
            }
    }
    return s;
}

} // namespace weakres::sim
