#include "deco/runner.hpp"

#include <cmath>

#include "deco/decay_engine.hpp"
#include "deco/dephasing_engine.hpp"
#include "deco/optimizer.hpp"
#include "deco/rng.hpp"

namespace deco::run {

namespace fs = std::filesystem;
using cfg::json;

namespace {

std::string channel_label(const ChannelLayout& layout, int flat) {
    ChannelIndex ch = layout.unflat(flat);
    return "j" + std::to_string(ch.system) + "n" + std::to_string(ch.level);
}

io::Manifest make_manifest(const cfg::ParsedConfig& pc) {
    io::Manifest m;
    m.config_hash = pc.config_hash;
    m.seed = pc.seed;
    m.rng_algorithm = rng::algorithm_name;
    m.timestamp = io::iso_timestamp();
    if (pc.decay) {
        m.phase_convention =
            pc.decay->options.phase_convention == PhaseConvention::printed ? "printed" : "rotating";
    }
    if (pc.dephasing)
        m.sign_convention = pc.dephasing->sign_convention == SignConvention::prose ? "prose" : "formula";
    return m;
}

json residuals_json(const decay::PreservationResiduals& r) {
    return {{"offdiag_norm", r.offdiag_norm}, {"rate_spread", r.rate_spread}, {"phase_spread", r.phase_spread}};
}

}  // namespace

void write_history_csv(const fs::path& path, const io::Manifest& m, const decay::DecoherenceHistory& h,
                       int stride) {
    io::CsvWriter csv(path, m);
    const int nch = h.layout.size();
    std::vector<std::string> cols{"t", "A_re", "A_im", "abs_A", "F_preserve", "mixing_valid"};
    for (int a = 0; a < nch; ++a) {
        std::string l = channel_label(h.layout, a);
        cols.push_back("alpha_re_" + l);
        cols.push_back("alpha_im_" + l);
    }
    for (int a = 0; a < nch; ++a) {
        std::string l = channel_label(h.layout, a);
        cols.push_back("c_re_" + l);
        cols.push_back("c_im_" + l);
        cols.push_back("abs_c_" + l);
    }
    csv.header(cols);
    std::vector<double> row;
    for (int k = 0; k < static_cast<int>(h.amplitudes.size()); k += stride) {
        row.clear();
        row.push_back(h.grid.time(k));
        row.push_back(h.decay[static_cast<size_t>(k)].real());
        row.push_back(h.decay[static_cast<size_t>(k)].imag());
        row.push_back(std::abs(h.decay[static_cast<size_t>(k)]));
        row.push_back(std::exp(-2.0 * h.J[static_cast<size_t>(k)](0, 0).real()));
        row.push_back(h.mixing_valid[static_cast<size_t>(k)] ? 1.0 : 0.0);
        for (int a = 0; a < nch; ++a) {
            row.push_back(h.amplitudes[static_cast<size_t>(k)](a).real());
            row.push_back(h.amplitudes[static_cast<size_t>(k)](a).imag());
        }
        for (int a = 0; a < nch; ++a) {
            cplx c = h.mixing_valid[static_cast<size_t>(k)] ? h.mixing[static_cast<size_t>(k)](a) : cplx(0.0);
            row.push_back(c.real());
            row.push_back(c.imag());
            row.push_back(std::abs(c));
        }
        csv.row(row);
    }
}

void write_jmatrix_csv(const fs::path& path, const io::Manifest& m, const decay::DecoherenceHistory& h,
                       int stride) {
    io::CsvWriter csv(path, m);
    const int nch = h.layout.size();
    std::vector<std::string> cols{"t"};
    for (int a = 0; a < nch; ++a)
        for (int b = 0; b < nch; ++b) {
            std::string l = channel_label(h.layout, a) + "_" + channel_label(h.layout, b);
            cols.push_back("J_re_" + l);
            cols.push_back("J_im_" + l);
        }
    csv.header(cols);
    std::vector<double> row;
    for (int k = 0; k < static_cast<int>(h.J.size()); k += stride) {
        row.clear();
        row.push_back(h.grid.time(k));
        for (int a = 0; a < nch; ++a)
            for (int b = 0; b < nch; ++b) {
                row.push_back(h.J[static_cast<size_t>(k)](a, b).real());
                row.push_back(h.J[static_cast<size_t>(k)](a, b).imag());
            }
        csv.row(row);
    }
}

namespace {

void write_dephasing_csv(const fs::path& path, const io::Manifest& m, const DephasingScenario& s,
                         deph::DephasingEngine& eng, int stride) {
    io::CsvWriter csv(path, m);
    const int M = s.qubits;
    std::vector<std::string> cols{"t", "F_basis"};
    for (int j = 1; j <= M; ++j)
        for (int j2 = 1; j2 <= M; ++j2) {
            cols.push_back("JP_re_" + std::to_string(j) + std::to_string(j2));
            cols.push_back("JP_im_" + std::to_string(j) + std::to_string(j2));
        }
    if (M == 2)
        for (int l = 1; l <= 4; ++l) cols.push_back("F_bell" + std::to_string(l));
    csv.header(cols);
    std::vector<double> row;
    for (int k = 0; k <= s.grid.steps(); k += stride) {
        double t = s.grid.time(k);
        row.clear();
        row.push_back(t);
        row.push_back(eng.basis_state_fidelity(t));
        for (int j = 1; j <= M; ++j)
            for (int j2 = 1; j2 <= M; ++j2) {
                cplx v = eng.compute_jp(j, j2, t);
                row.push_back(v.real());
                row.push_back(v.imag());
            }
        if (M == 2)
            for (int l = 1; l <= 4; ++l) row.push_back(eng.bell_fidelity(l, t));
        csv.row(row);
    }
}

RunResult run_parsed(cfg::ParsedConfig& pc, const fs::path& out_dir, Exec exec) {
    RunResult rr;
    io::Manifest manifest = make_manifest(pc);
    fs::create_directories(out_dir);
    auto out_path = [&](const std::string& suffix) { return out_dir / (pc.output.prefix + suffix); };
    json results = json::object();

    auto add_output = [&](const fs::path& p) { rr.outputs.push_back(p.string()); };

    if (pc.mode == "decay") {
        auto h = decay::evolve_amplitudes(*pc.decay, exec);
        write_history_csv(out_path("_history.csv"), manifest, h, pc.output.stride);
        add_output(out_path("_history.csv"));
        write_jmatrix_csv(out_path("_jmatrix.csv"), manifest, h, pc.output.stride);
        add_output(out_path("_jmatrix.csv"));
        double tend = pc.decay->grid.t_end;
        auto res = decay::preservation_residuals(h, tend);
        results["preservation_residuals"] = residuals_json(res);
        results["preservation_fidelity"] = decay::preservation_fidelity(h, tend);
        results["abs_A_end"] = std::abs(h.decay.back());
        results["preservation_satisfied"] = decay::preservation_satisfied(h, tend);
        // a growing norm means the weak-coupling equation left its validity band
        double norm_max = 0.0;
        for (const auto& a : h.amplitudes) norm_max = std::max(norm_max, a.norm());
        results["born_validity_exceeded"] = norm_max > 1.0 + 1e-9;
    } else if (pc.mode == "dephasing") {
        deph::DephasingEngine eng(*pc.dephasing, exec);
        write_dephasing_csv(out_path("_dephasing.csv"), manifest, *pc.dephasing, eng, pc.output.stride);
        add_output(out_path("_dephasing.csv"));
        double tend = pc.dephasing->grid.t_end;
        bool flagged = false;
        results["basis_fidelity_end"] = eng.basis_state_fidelity(tend, &flagged);
        results["second_order_flagged"] = flagged;
        if (pc.dephasing->qubits == 2) {
            for (int l = 1; l <= 4; ++l)
                results["bell_fidelity_end"].push_back(eng.bell_fidelity(l, tend));
        }
    } else if (pc.mode == "oracle") {
        if (pc.decay) {
            auto h = decay::evolve_amplitudes(*pc.decay, exec);
            auto exact = oracle::exact_decay_solve(*pc.decay, exec);
            io::CsvWriter csv(out_path("_oracle.csv"), manifest);
            csv.header({"t", "abs_A_engine", "abs_A_exact", "rel_diff"});
            double worst = 0.0;
            for (int k = 0; k <= pc.decay->grid.steps(); k += pc.output.stride) {
                double ae = h.amplitudes[static_cast<size_t>(k)].norm();
                double ax = exact[static_cast<size_t>(k)].norm();
                double rel = std::abs(ae - ax) / std::max(1e-300, std::abs(ax));
                worst = std::max(worst, rel);
                double row[] = {pc.decay->grid.time(k), ae, ax, rel};
                csv.row(row);
            }
            add_output(out_path("_oracle.csv"));
            oracle::OracleReport rep;
            rep.quantity = "abs_A max relative difference, engine vs exact memory-kernel solve";
            rep.engine_value = std::abs(h.decay.back());
            rep.oracle_value = exact.back().norm();
            rep.tolerance = 0.05;
            rep.pass = worst <= 0.05;
            rep.step = pc.decay->grid.dt;
            results["reports"].push_back({{"quantity", rep.quantity},
                                          {"engine_value", rep.engine_value},
                                          {"oracle_value", rep.oracle_value},
                                          {"max_rel_diff", worst},
                                          {"tolerance", rep.tolerance},
                                          {"pass", rep.pass},
                                          {"step", rep.step}});
        } else {
            deph::DephasingEngine eng(*pc.dephasing, exec);
            auto mc = oracle::mc_dephasing_fidelity(*pc.dephasing, pc.oracle.realizations, pc.oracle.seed, exec);
            io::CsvWriter csv(out_path("_oracle.csv"), manifest);
            csv.header({"t", "F_engine", "F_mc", "F_mc_se"});
            const bool bell = pc.dephasing->initial.kind == DephasingInitial::Kind::bell;
            auto engine_f = [&](double t) {
                return bell ? eng.bell_fidelity(pc.dephasing->initial.index, t) : eng.basis_state_fidelity(t);
            };
            for (int k = 0; k <= pc.dephasing->grid.steps(); k += pc.output.stride) {
                double t = pc.dephasing->grid.time(k);
                double row[] = {t, engine_f(t), mc.mean[static_cast<size_t>(k)],
                                mc.standard_error[static_cast<size_t>(k)]};
                csv.row(row);
            }
            add_output(out_path("_oracle.csv"));
            for (double t : pc.oracle.times) {
                int k = pc.dephasing->grid.index_of(t);
                double fe = engine_f(t);
                double fm = mc.mean[static_cast<size_t>(k)];
                double se = mc.standard_error[static_cast<size_t>(k)];
                bool pass = std::abs(fe - fm) <= 3.0 * se;
                results["reports"].push_back({{"quantity", "dephasing fidelity at t=" + io::format_double(t)},
                                              {"engine_value", fe},
                                              {"oracle_value", fm},
                                              {"standard_error", se},
                                              {"tolerance_se", 3.0},
                                              {"pass", pass},
                                              {"realizations", pc.oracle.realizations},
                                              {"seed", pc.oracle.seed},
                                              {"rng_algorithm", std::string(rng::algorithm_name)}});
            }
        }
    } else if (pc.mode == "optimize" || pc.mode == "steer") {
        pc.problem->exec = exec;
        auto res = opt::minimize(*pc.problem);
        json starts = json::array();
        for (const auto& sr : res.starts)
            starts.push_back({{"objective", sr.objective},
                              {"evaluations", sr.evaluations},
                              {"converged", sr.converged},
                              {"error", sr.error}});
        std::vector<double> best(res.best.data(), res.best.data() + res.best.size());
        results["best_parameters"] = best;
        results["objective"] = res.objective;
        results["converged"] = res.converged;
        results["starts"] = starts;
        results["trace"] = res.trace;
        if (pc.problem->objective == opt::ObjectiveKind::preserve)
            results["residuals"] = residuals_json(res.residuals);
        if (pc.problem->objective == opt::ObjectiveKind::steer)
            results["steering_residual"] = res.steering_residual;
        if (pc.problem->decay) {  // verification run at the optimum
            DecayScenario s = *pc.problem->decay;
            opt::apply_parameters(s.modulation, pc.problem->free, res.best);
            auto h = decay::evolve_amplitudes(s, exec);
            write_history_csv(out_path("_optimum_history.csv"), manifest, h, pc.output.stride);
            add_output(out_path("_optimum_history.csv"));
        }
    } else if (pc.mode == "sweep") {
        auto rows = opt::power_sweep(*pc.decay, pc.sweep_powers, pc.sweep_options);
        io::CsvWriter csv(out_path("_sweep.csv"), manifest);
        const int nch = pc.decay->layout.size();
        std::vector<std::string> cols{"power_over_pi", "tau",      "power_optimized_over_pi",
                                      "abs_A_global",  "abs_A_local", "symmetrized"};
        for (int a = 1; a <= nch; ++a) cols.push_back("theta_over_pi_" + std::to_string(a));
        for (int a = 1; a <= nch; ++a) cols.push_back("mix_dev_global_" + std::to_string(a));
        for (int a = 1; a <= nch; ++a) cols.push_back("mix_dev_local_" + std::to_string(a));
        csv.header(cols);
        std::vector<double> row;
        for (const auto& r : rows) {
            row.clear();
            row.push_back(r.power / pi);
            row.push_back(r.tau);
            row.push_back(r.power_optimized / pi);
            row.push_back(r.decay_global);
            row.push_back(r.decay_local);
            row.push_back(r.symmetrized ? 1.0 : 0.0);
            for (double th : r.theta) row.push_back(th / pi);
            for (double v : r.mixing_dev_global) row.push_back(v);
            for (double v : r.mixing_dev_local) row.push_back(v);
            csv.row(row);
        }
        add_output(out_path("_sweep.csv"));
        results["points"] = rows.size();
    }

    json summary;
    summary["manifest"] = manifest.to_json();
    summary["config"] = pc.effective;
    summary["outputs"] = rr.outputs;
    summary["results"] = results;
    fs::path spath = out_path("_summary.json");
    std::ofstream out(spath);
    out << summary.dump(2) << "\n";
    out.close();
    rr.outputs.push_back(spath.string());
    rr.summary = std::move(summary);
    rr.exit_code = 0;
    return rr;
}

}  // namespace

RunResult run_config(const json& config, std::optional<fs::path> out_dir, std::optional<uint64_t> seed_override,
                     Exec exec) {
    RunResult rr;
    try {
        cfg::ParsedConfig pc = cfg::build_config(config, seed_override);
        fs::path dir = out_dir.value_or(fs::path(pc.output.dir));
        return run_parsed(pc, dir, exec);
    } catch (const ConfigError& ex) {
        rr.exit_code = 2;
        rr.error = ex.what();
    } catch (const NumericalRefusal& ex) {
        rr.exit_code = 3;
        rr.error = ex.what();
    } catch (const std::exception& ex) {
        rr.exit_code = 1;
        rr.error = ex.what();
    }
    return rr;
}

// ------------------------------------------------------------- figures

namespace {

json fig2_config(const std::vector<double>& theta_over_pi, const std::string& prefix) {
    json c;
    c["mode"] = "decay";
    c["systems"] = {{"count", 1}, {"levels", 4}, {"omega1", 0.5}, {"delta", 0.1}};
    c["bath"] = {{"model", "gaussian_dipole"},
                 {"coupling_diag", 1.0},
                 {"coupling_offdiag", 0.5},
                 {"dipole_angles_over_pi", {0.246, 0.0, 0.326, 0.370}},
                 {"correlation_time", 1.0}};
    c["modulation"] = {{"tau", 1.0}, {"theta_over_pi", theta_over_pi}, {"global", false}};
    c["initial_state"] = {{"named", "uniform"}};
    c["grid"] = {{"t_end", 50.0}, {"dt", 0.05}};
    c["output"] = {{"prefix", prefix}};
    return c;
}

json fig4_config(bool identical_coupling, bool global_modulation, const std::string& prefix, double t_end = 25.0) {
    json c;
    c["mode"] = "decay";
    c["systems"] = {{"count", 3}, {"levels", 1}, {"omega0", 0.5}};
    std::vector<double> tj = identical_coupling ? std::vector<double>{1.0, 1.0, 1.0}
                                                : std::vector<double>{0.75, 0.81, 1.0};
    c["bath"] = {{"model", "correlated_gaussian_decay"},
                 {"gamma", 0.05},
                 {"r0", 1.0},
                 {"correlation_times", tj},
                 {"ring_radius", 1.0}};
    std::vector<double> th = global_modulation ? std::vector<double>{1.0, 1.0, 1.0}
                                               : std::vector<double>{1.0, 0.70, 0.58};
    c["modulation"] = {{"tau", 1.0}, {"theta_over_pi", th}, {"global", global_modulation}};
    c["initial_state"] = {{"named", "dicke"}, {"l", 1}};
    c["grid"] = {{"t_end", t_end}, {"dt", 0.025}};
    c["output"] = {{"prefix", prefix}};
    return c;
}

json fig5_config(bool global_modulation, const std::string& prefix) {
    json c;
    c["mode"] = "decay";
    c["systems"] = {{"count", 3}, {"levels", 1}, {"omega0", 0.5}};
    c["bath"] = {{"model", "correlated_gaussian_decay"},
                 {"gamma", 0.05},
                 {"r0", 1.0},
                 {"correlation_times", {0.75, 0.81, 1.0}},
                 {"ring_radius", 1.0}};
    std::vector<double> th = global_modulation ? std::vector<double>{1.0, 1.0, 1.0}
                                               : std::vector<double>{0.80, 0.56, 0.47};
    c["modulation"] = {{"tau", 1.0}, {"theta_over_pi", th}, {"global", global_modulation}};
    c["initial_state"] = {{"mixing", {1.0, 1.57, 1.64}}, {"decay", 1.0}};
    c["grid"] = {{"t_end", 25.0}, {"dt", 0.025}};
    c["output"] = {{"prefix", prefix}};
    return c;
}

json fig6_config(double theta2_over_pi, const std::string& prefix) {
    json c;
    c["mode"] = "dephasing";
    c["systems"] = {{"count", 2}, {"levels", 1}};
    c["bath"] = {{"model", "exponential_dephasing"},
                 {"gamma", 0.01},
                 {"correlation_times", {1.0, 1.0}},
                 {"pair_distance", 1.0}};
    bool global = theta2_over_pi == 0.9;
    c["modulation"] = {{"tau", {1.0, 1.0}}, {"theta_over_pi", {0.9, theta2_over_pi}}, {"global", global}};
    c["initial_state"] = {{"named", "bell"}, {"l", 2}};
    c["grid"] = {{"t_end", 25.0}, {"dt", 0.05}};
    c["output"] = {{"prefix", prefix}};
    return c;
}

}  // namespace

RunResult emit_figure(const std::string& name, const fs::path& out_dir, Exec exec) {
    RunResult rr;
    auto merge = [&](RunResult part) {
        if (part.exit_code != 0 && rr.exit_code == 0) {
            rr.exit_code = part.exit_code;
            rr.error = part.error;
        }
        rr.outputs.insert(rr.outputs.end(), part.outputs.begin(), part.outputs.end());
    };
    if (name == "fig2") {
        merge(run_config(fig2_config({1.0, 9.0, 8.0, 7.0}, "fig2_local"), out_dir, std::nullopt, exec));
        merge(run_config(fig2_config({1.0, 1.0, 1.0, 1.0}, "fig2_global"), out_dir, std::nullopt, exec));
    } else if (name == "fig3") {
        json c = fig2_config({1.0, 1.0, 1.0, 1.0}, "fig3");
        c["mode"] = "sweep";
        c["modulation"] = {{"tau", 1.0}, {"theta_over_pi", 1.0}};
        c["sweep"] = {{"min_over_pi", 0.5}, {"max_over_pi", 4.0}, {"count", 10}};
        merge(run_config(c, out_dir, std::nullopt, exec));
    } else if (name == "fig4") {
        merge(run_config(fig4_config(true, true, "fig4_identical_global"), out_dir, std::nullopt, exec));
        merge(run_config(fig4_config(true, false, "fig4_identical_local"), out_dir, std::nullopt, exec));
        merge(run_config(fig4_config(false, true, "fig4_different_global"), out_dir, std::nullopt, exec));
        merge(run_config(fig4_config(false, false, "fig4_different_local"), out_dir, std::nullopt, exec));
    } else if (name == "fig5") {
        merge(run_config(fig5_config(true, "fig5_global"), out_dir, std::nullopt, exec));
        merge(run_config(fig5_config(false, "fig5_local"), out_dir, std::nullopt, exec));
    } else if (name == "fig6") {
        merge(run_config(fig6_config(0.9, "fig6_global"), out_dir, std::nullopt, exec));
        merge(run_config(fig6_config(0.8, "fig6_local"), out_dir, std::nullopt, exec));
    } else {
        rr.exit_code = 2;
        rr.error = "unknown figure name '" + name + "' (expected fig2..fig6)";
    }
    return rr;
}

}  // namespace deco::run
