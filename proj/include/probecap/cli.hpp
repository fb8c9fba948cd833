#pragma once

// Command implementations behind the command-line tool. Kept as a library
// so the test suites can drive the exact code paths the binary runs.

#include <fstream>
#include <iostream>
#include <optional>

#include <json.hpp>

#include "probecap/continuous.hpp"
#include "probecap/curve.hpp"
#include "probecap/model_io.hpp"
#include "probecap/montecarlo.hpp"
#include "probecap/solver.hpp"
#include "probecap/version.hpp"

namespace probecap::cli {

struct RunConfig {
    std::string subcommand; // solve | cutoff | simulate | oracle
    std::string example;    // ex1 ex2 ex3 dpc fading
    std::string model_path;
    int theorem = 0; // 0 = auto: 1 with full decoder knowledge, else 2
    std::optional<double> gamma;
    std::string sweep_spec; // start:stop:count
    double tol = 1e-10;
    int multistarts = 32;
    std::uint64_t seed = 1;
    double cutoff_tol = 2e-5;
    std::string out_path;
    std::string format = "csv"; // csv | json
    // simulate
    std::size_t samples = 1000000;
    bool codec = false;
    int block_length = 12;
    double rate_frac = 0.6;
    double epsilon = 2.0;
    int trials = 2000;
    // oracle
    double resolution = 0.01;
};

namespace detail {

inline nlohmann::ordered_json config_echo(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    j["tool"] = "probecap";
    j["version"] = kVersion;
    j["subcommand"] = cfg.subcommand;
    if (!cfg.example.empty()) j["example"] = cfg.example;
    if (!cfg.model_path.empty()) j["model"] = cfg.model_path;
    j["theorem"] = cfg.theorem;
    if (cfg.gamma) j["gamma"] = *cfg.gamma;
    if (!cfg.sweep_spec.empty()) j["sweep"] = cfg.sweep_spec;
    j["tol"] = cfg.tol;
    j["multistarts"] = cfg.multistarts;
    j["seed"] = cfg.seed;
    j["format"] = cfg.format;
    if (cfg.subcommand == "cutoff") j["cutoff_tol"] = cfg.cutoff_tol;
    if (cfg.subcommand == "simulate") {
        j["n"] = cfg.samples;
        j["codec"] = cfg.codec;
        if (cfg.codec) {
            j["blocklength"] = cfg.block_length;
            j["rate_frac"] = cfg.rate_frac;
            j["epsilon"] = cfg.epsilon;
            j["trials"] = cfg.trials;
        }
    }
    if (cfg.subcommand == "oracle") j["resolution"] = cfg.resolution;
    return j;
}

inline std::vector<double> parse_sweep(const std::string& spec) {
    double start = 0.0, stop = 0.0;
    int count = 0;
    char c1 = 0, c2 = 0;
    std::istringstream ss(spec);
    if (!(ss >> start >> c1 >> stop >> c2 >> count) || c1 != ':' || c2 != ':' || !ss.eof())
        throw std::invalid_argument("bad sweep spec '" + spec + "', expected start:stop:count");
    if (count < 2) throw std::invalid_argument("sweep count must be at least 2");
    if (!(start < stop)) throw std::invalid_argument("sweep start must be below stop");
    return uniform_grid(start, stop, count);
}

inline bool is_continuous(const std::string& example) {
    return example == "dpc" || example == "fading";
}

inline ProbingModel resolve_model(const RunConfig& cfg) {
    if (!cfg.example.empty() && !cfg.model_path.empty())
        throw std::invalid_argument("give either --example or --model, not both");
    if (!cfg.example.empty()) {
        if (cfg.example == "ex1") return build_example1();
        if (cfg.example == "ex2") return build_example2();
        if (cfg.example == "ex3") return build_example3();
        throw std::invalid_argument("unknown example '" + cfg.example +
                                    "' (expected ex1 ex2 ex3 dpc fading)");
    }
    if (cfg.model_path.empty()) throw std::invalid_argument("need --example or --model");
    return load_model_file(cfg.model_path);
}

inline SolveOptions solver_options(const RunConfig& cfg) {
    SolveOptions o;
    o.tol = cfg.tol;
    o.multistarts = cfg.multistarts;
    o.seed = cfg.seed;
    return o;
}

inline int effective_theorem(const RunConfig& cfg, const ProbingModel& m) {
    if (cfg.theorem != 0) return cfg.theorem;
    return (m.encoder_only() && m.decoder_has_full_csi()) ? 1 : 2;
}

inline PointSolver pick_solver(int theorem, const SolveOptions& opts) {
    switch (theorem) {
        case 1:
            return [opts](const ProbingModel& m, double g) { return solve_thm1(m, g, opts); };
        case 2:
            return [opts](const ProbingModel& m, double g) { return solve_thm2_lower(m, g, opts); };
        case 3:
            return [opts](const ProbingModel& m, double g) { return solve_thm3(m, g, opts); };
        case 4:
            return [opts](const ProbingModel& m, double g) { return solve_thm4(m, g, opts); };
        default:
            throw std::invalid_argument("theorem must be 1, 2, 3 or 4");
    }
}

inline nlohmann::ordered_json argmax_json(const SolveResult& r) {
    nlohmann::ordered_json j;
    j["status"] = to_string(r.status);
    j["lower_bound"] = r.lower_bound;
    if (!r.action.empty()) j["action_dist"] = r.action;
    if (!r.rows.empty()) {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (std::size_t k = 0; k < r.rows.size(); ++k) {
            nlohmann::ordered_json row;
            row["se"] = r.row_keys[k].first;
            row["a"] = r.row_keys[k].second;
            row["dist"] = r.rows[k];
            rows.push_back(std::move(row));
        }
        j["rows"] = std::move(rows);
    }
    if (!r.strategies.empty()) {
        nlohmann::ordered_json strategies = nlohmann::ordered_json::array();
        for (std::size_t t = 0; t < r.strategies.size(); ++t) {
            nlohmann::ordered_json s;
            s["ae"] = r.strategies[t].ae;
            s["x_of_se"] = r.strategies[t].x_of_se;
            s["prob"] = r.strategy_probs[t];
            s["ad"] = r.strategy_ad[t];
            strategies.push_back(std::move(s));
        }
        j["strategies"] = std::move(strategies);
    }
    if (!r.f_table.empty()) {
        j["f_table"] = r.f_table;
        j["u_size"] = r.u_size;
    }
    return j;
}

inline nlohmann::ordered_json curve_json(const RunConfig& cfg, const SweepCurve& c) {
    nlohmann::ordered_json j;
    j["config"] = config_echo(cfg);
    j["monotone"] = c.monotone;
    j["concave"] = c.concave;
    nlohmann::ordered_json points = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < c.gammas.size(); ++i) {
        nlohmann::ordered_json p;
        p["gamma"] = c.gammas[i];
        if (c.errors[i].empty()) {
            p["value_bits"] = c.values[i];
            p["achieved_cost"] = c.points[i].achieved_cost;
            p["argmax"] = argmax_json(c.points[i]);
        } else {
            p["error"] = c.errors[i];
        }
        points.push_back(std::move(p));
    }
    j["points"] = std::move(points);
    return j;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write output file: " + path);
    out << content;
}

inline void emit_curve(const RunConfig& cfg, const SweepCurve& c, std::ostream& out) {
    if (cfg.out_path.empty()) return;
    if (cfg.format == "json") {
        write_file(cfg.out_path, curve_json(cfg, c).dump(2) + "\n");
    } else {
        write_file(cfg.out_path, curve_csv(c));
        write_file(cfg.out_path + ".meta.json", curve_json(cfg, c).dump(2) + "\n");
    }
    out << "wrote " << cfg.out_path << "\n";
}

inline SolveResult continuous_point(const RunConfig& cfg, double g) {
    SolveResult r;
    if (cfg.example == "dpc") {
        PowerSplitPoint p = dirty_paper_lower(DirtyPaperParams(1.0, 1.0, 1.0, g));
        r.value = p.value;
        r.action = {p.P1, p.P2};
    } else {
        FadingSplitPoint p = fading_lower(FadingParams(1.0, 1.0, 1.0, 0.01, 1.0, g), 161);
        r.value = p.value;
        r.action = {p.Pstar, p.P1, p.P2};
    }
    r.achieved_cost = g;
    r.status = SolveStatus::converged;
    return r;
}

inline SweepCurve single_point_curve(double g, const std::function<SolveResult(double)>& at) {
    SweepCurve curve;
    curve.gammas = {g};
    curve.values = {std::numeric_limits<double>::quiet_NaN()};
    curve.points.resize(1);
    curve.errors.resize(1);
    curve.points[0] = at(g);
    curve.values[0] = curve.points[0].value;
    recompute_flags(curve);
    return curve;
}

inline int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    std::vector<double> gammas;
    if (cfg.gamma && !cfg.sweep_spec.empty())
        throw std::invalid_argument("give either --gamma or --sweep, not both");
    if (!cfg.sweep_spec.empty()) gammas = parse_sweep(cfg.sweep_spec);

    SweepCurve curve;
    if (is_continuous(cfg.example)) {
        auto at = [&](double g) { return continuous_point(cfg, g); };
        if (gammas.empty())
            curve = single_point_curve(cfg.gamma.value_or(0.5), at);
        else
            curve = sweep_fn(gammas, at);
    } else {
        ProbingModel m = resolve_model(cfg);
        PointSolver solver = pick_solver(effective_theorem(cfg, m), solver_options(cfg));
        auto at = [&](double g) { return solver(m, g); };
        if (gammas.empty())
            curve = single_point_curve(cfg.gamma.value_or(m.budget), at);
        else
            curve = sweep_fn(gammas, at);
    }

    for (std::size_t i = 0; i < curve.gammas.size(); ++i) {
        if (!curve.errors[i].empty()) continue;
        out << "C(" << curve.gammas[i] << ") = " << curve.values[i] << " bits @ cost "
            << curve.points[i].achieved_cost << "\n";
    }
    emit_curve(cfg, curve, out);

    bool ok = curve.all_solved();
    if (!ok)
        for (std::size_t i = 0; i < curve.gammas.size(); ++i)
            if (!curve.errors[i].empty())
                err << "gamma=" << curve.gammas[i] << ": " << curve.errors[i] << "\n";
    return ok ? 0 : 1;
}

inline int cmd_cutoff(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (is_continuous(cfg.example))
        throw std::invalid_argument("cutoff expects a discrete model");
    ProbingModel m = resolve_model(cfg);
    if (effective_theorem(cfg, m) != 1)
        throw std::invalid_argument("cutoff supports theorem 1 only");
    SolveOptions opts = solver_options(cfg);
    std::vector<double> gammas = cfg.sweep_spec.empty()
                                     ? uniform_grid(m.cost.min_cost(), m.cost.max_cost(), 21)
                                     : parse_sweep(cfg.sweep_spec);
    PointSolver solver = pick_solver(1, opts);
    SweepCurve curve = sweep(solver, m, gammas);
    if (!curve.all_solved()) {
        for (std::size_t i = 0; i < curve.gammas.size(); ++i)
            if (!curve.errors[i].empty())
                err << "gamma=" << curve.gammas[i] << ": " << curve.errors[i] << "\n";
        return 1;
    }
    double cut = cutoff_point(curve, cfg.cutoff_tol,
                              [&](double g) { return solver(m, g).value; });
    out << "cutoff gamma = " << cut << " (tol " << cfg.cutoff_tol << ")\n";
    if (!cfg.out_path.empty()) {
        nlohmann::ordered_json j;
        j["config"] = config_echo(cfg);
        j["cutoff_gamma"] = cut;
        j["tol"] = cfg.cutoff_tol;
        j["curve_max_bits"] = *std::max_element(curve.values.begin(), curve.values.end());
        write_file(cfg.out_path, j.dump(2) + "\n");
        out << "wrote " << cfg.out_path << "\n";
    }
    return 0;
}

inline int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    if (is_continuous(cfg.example))
        throw std::invalid_argument("simulate expects a discrete model");
    if (!cfg.codec && cfg.samples == 0) throw std::invalid_argument("--n must be positive");
    ProbingModel m = resolve_model(cfg);
    if (effective_theorem(cfg, m) != 1)
        throw std::invalid_argument("simulate supports theorem 1 only");
    double g = cfg.gamma.value_or(m.budget);
    SolveOptions opts = solver_options(cfg);
    SolveResult r = solve_thm1(m, g, opts);

    nlohmann::ordered_json rep;
    rep["config"] = config_echo(cfg);
    rep["solver_value_bits"] = r.value;

    if (cfg.codec) {
        CodecConfig cc;
        cc.rate1 = 0.0;
        cc.rate2 = cfg.rate_frac * r.value;
        cc.block_length = cfg.block_length;
        cc.epsilon = cfg.epsilon;
        cc.trials = cfg.trials;
        CodecReport crep = rate_split_codec(m, r.action, rows_by_observation(m, r), cc, cfg.seed);
        rep["error_rate"] = crep.error_rate;
        rep["stage1_error_rate"] = crep.stage1_error_rate;
        rep["stderr"] = crep.stderr_value;
        rep["m1_count"] = crep.m1_count;
        rep["m2_count"] = crep.m2_count;
    } else {
        // sample the optimal joint law and estimate the objective back
        std::vector<std::vector<double>> rows(
            static_cast<std::size_t>(m.Se.size() * m.Ae.size()),
            std::vector<double>(static_cast<std::size_t>(m.X.size()), 1.0 / m.X.size()));
        for (std::size_t k = 0; k < r.row_keys.size(); ++k)
            rows[static_cast<std::size_t>(r.row_keys[k].first * m.Ae.size() +
                                          r.row_keys[k].second)] = r.rows[k];
        JointTable j = joint_thm1(m, ProbDist(m.Ae, r.action), CondKernel({m.Se, m.Ae}, {m.X}, rows));
        SampleBatch b = sample_joint(j, cfg.samples, cfg.seed);
        CmiEstimate est = empirical_cmi(b, {"X"}, {"Y"}, {"S"}, 100, mix_seed(cfg.seed, 1));
        rep["estimate_bits"] = est.estimate;
        rep["plug_in_bits"] = est.plug_in;
        rep["stderr"] = est.stderr_value;
        rep["bias_correction"] = est.bias_correction;
        rep["n"] = est.n;
    }
    std::string text = rep.dump(2) + "\n";
    out << text;
    if (!cfg.out_path.empty()) write_file(cfg.out_path, text);
    return 0;
}

inline int cmd_oracle(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    if (is_continuous(cfg.example))
        throw std::invalid_argument("oracle expects a discrete model");
    ProbingModel m = resolve_model(cfg);
    double g = cfg.gamma.value_or(m.budget);
    SolveOptions opts = solver_options(cfg);
    SolveResult fast = solve_thm1(m, g, opts);
    SolveResult slow = grid_oracle_thm1(m, g, cfg.resolution, opts);

    nlohmann::ordered_json rep;
    rep["config"] = config_echo(cfg);
    rep["solver_bits"] = fast.value;
    rep["oracle_bits"] = slow.value;
    rep["gap_bits"] = fast.value - slow.value;
    rep["resolution"] = cfg.resolution;
    std::string text = rep.dump(2) + "\n";
    out << text;
    if (!cfg.out_path.empty()) write_file(cfg.out_path, text);
    return 0;
}

} // namespace detail

// Dispatch. Returns the process exit status; 2 flags usage/config errors,
// 1 solver failures.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        if (cfg.subcommand == "solve") return detail::cmd_solve(cfg, out, err);
        if (cfg.subcommand == "cutoff") return detail::cmd_cutoff(cfg, out, err);
        if (cfg.subcommand == "simulate") return detail::cmd_simulate(cfg, out, err);
        if (cfg.subcommand == "oracle") return detail::cmd_oracle(cfg, out, err);
        err << "unknown subcommand '" << cfg.subcommand << "'\n";
        return 2;
    } catch (const ModelParseError& e) {
        err << "model parse error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace probecap::cli
