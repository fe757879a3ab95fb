#include "commands.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "autores/averaging.hpp"
#include "autores/error.hpp"
#include "autores/format.hpp"
#include "autores/integrator.hpp"
#include "autores/parallel.hpp"
#include "autores/phase_model.hpp"
#include "autores/solution.hpp"
#include "autores/stability.hpp"

namespace autores::cli {

namespace {

using ojson = nlohmann::ordered_json;

phase_model::PhaseRoot pick_root(const ModelParams& p, double sigma) {
    const auto roots = phase_model::find_roots(p);
    if (roots.empty()) throw Error(ErrorKind::InvalidArgument, "no roots of P");
    auto dist = [&](const phase_model::PhaseRoot& r) {
        return std::fabs(std::remainder(r.sigma - sigma, 2.0 * std::numbers::pi));
    };
    const phase_model::PhaseRoot* best = &roots.front();
    for (const auto& r : roots)
        if (dist(r) < dist(*best)) best = &r;
    return *best;
}

// Tabular output in the configured format under `stem`.csv / `stem`.json.
void emit_table(const RunConfig& cfg, OutputSet& out, const std::string& stem, const std::string& csv) {
    if (cfg.format() == "json")
        out.write(stem + ".json", csv_to_json(csv).dump(2) + "\n");
    else
        out.write(stem + ".csv", csv);
}

// Single record: pretty JSON or a one-row CSV.
void emit_record(const RunConfig& cfg, OutputSet& out, const std::string& stem, const ojson& obj) {
    if (cfg.format() == "json")
        out.write(stem + ".json", obj.dump(2) + "\n");
    else
        out.write(stem + ".csv", object_to_csv(obj));
}

ojson root_json(const phase_model::PhaseRoot& r) {
    ojson j;
    j["sigma"] = r.sigma;
    j["multiplicity"] = r.multiplicity;
    j["class"] = std::string(phase_model::to_string(r.stability_class));
    j["p_derivs"] = r.p_derivs;
    return j;
}

void run_roots(const RunConfig& cfg, OutputSet& out) {
    const ModelParams p = cfg.params();
    const auto roots = phase_model::find_roots(p, cfg.number("options.root_tol"), cfg.number("options.deriv_tol"));
    const auto region = phase_model::classify_region(p.delta(), p.nu);
    if (cfg.format() == "json") {
        ojson j;
        j["lambda"] = p.lambda;
        j["nu"] = p.nu;
        j["mu0"] = p.mu0();
        j["delta"] = p.delta();
        j["gamma"] = region.gamma;
        j["region"] = std::string(phase_model::to_string(region.kind));
        j["roots"] = ojson::array();
        for (const auto& r : roots) j["roots"].push_back(root_json(r));
        out.write("roots.json", j.dump(2) + "\n");
        return;
    }
    std::ostringstream os;
    os << "sigma,multiplicity,class,dP1,dP2,dP3,dP4,dP5\n";
    for (const auto& r : roots) {
        os << fmt17(r.sigma) << ',' << r.multiplicity << ',' << phase_model::to_string(r.stability_class);
        for (double d : r.p_derivs) os << ',' << fmt17(d);
        os << '\n';
    }
    out.write("roots.csv", os.str());
}

void run_partition(const RunConfig& cfg, OutputSet& out) {
    const auto n = cfg.integer("options.nu_steps");
    std::vector<double> nu(static_cast<std::size_t>(n));
    for (long long k = 0; k < n; ++k) nu[static_cast<std::size_t>(k)] = std::numbers::pi * static_cast<double>(k) / n;
    const auto rows = phase_model::sweep_partition(cfg.number("params.lambda"), nu, cfg.range("options.delta").expand(),
                                                   threaded_for(cfg.threads()), cfg.number("options.boundary_tol"));
    std::ostringstream os;
    phase_model::write_partition_csv(os, rows);
    emit_table(cfg, out, "partition", os.str());
}

series::AsymptoticSolution solution_for(const RunConfig& cfg) {
    const ModelParams p = cfg.params();
    const auto root = pick_root(p, cfg.number("options.sigma"));
    return series::build_solution(p, root, static_cast<int>(cfg.integer("options.branch")),
                                  static_cast<int>(cfg.integer("options.orders")));
}

void run_series(const RunConfig& cfg, OutputSet& out) {
    const auto sol = solution_for(cfg);
    if (cfg.format() == "json") {
        out.write("series.json", series::to_json(sol) + "\n");
        return;
    }
    std::ostringstream os;
    os << "series,k,tau_exponent,coeff\n";
    auto rows = [&](const char* name, const PuiseuxSeries& s) {
        for (std::size_t i = 0; i < s.coeffs.size(); ++i) {
            const int k = s.offset + static_cast<int>(i);
            os << name << ',' << k << ',' << fmt17(static_cast<double>(-k) / s.q) << ',' << fmt17(s.coeffs[i]) << '\n';
        }
    };
    rows("rho", sol.rho_series);
    rows("psi", sol.psi_series);
    out.write("series.csv", os.str());
}

void run_simulate(const RunConfig& cfg, OutputSet& out) {
    const ModelParams p = cfg.params();
    const integrator::InitialCondition ic{cfg.number("options.tau0"), cfg.number("options.rho0"),
                                          cfg.number("options.psi0")};
    const auto traj = integrator::integrate(p, ic, cfg.number("options.tau_end"), cfg.solver());
    std::ostringstream os;
    integrator::write_trajectory_csv(os, traj);
    emit_table(cfg, out, "trajectory", os.str());

    const auto v = integrator::classify_capture(traj, p, cfg.number("options.capture_tol"),
                                                cfg.number("options.winding_cap"));
    ojson j;
    j["verdict"] = std::string(integrator::to_string(v.verdict));
    j["rho_ratio_end"] = v.rho_ratio_end;
    j["psi_winding"] = v.psi_winding;
    j["steps"] = traj.solver_stats.steps;
    j["rejected_steps"] = traj.solver_stats.rejected_steps;
    emit_record(cfg, out, "capture", j);
}

void run_capture_map(const RunConfig& cfg, OutputSet& out) {
    integrator::CaptureGrid grid;
    const auto n_rho = cfg.integer("options.n_rho0"), n_psi = cfg.integer("options.n_psi0");
    const double r0 = cfg.number("options.rho0_min"), r1 = cfg.number("options.rho0_max");
    const double p0 = cfg.number("options.psi0_min"), p1 = cfg.number("options.psi0_max");
    for (long long i = 0; i < n_rho; ++i)
        grid.rho0.push_back(n_rho == 1 ? r0 : r0 + (r1 - r0) * static_cast<double>(i) / static_cast<double>(n_rho - 1));
    for (long long j = 0; j < n_psi; ++j)
        grid.psi0.push_back(p0 + (p1 - p0) * static_cast<double>(j) / static_cast<double>(n_psi));
    grid.tau0 = cfg.number("options.tau0");
    const auto cells = integrator::capture_map(cfg.params(), grid, cfg.number("options.horizon"), cfg.solver(),
                                               threaded_for(cfg.threads()), cfg.number("options.capture_tol"),
                                               cfg.number("options.winding_cap"));
    std::ostringstream os;
    integrator::write_capture_csv(os, cells);
    emit_table(cfg, out, "capture_map", os.str());
}

void run_oscillator(const RunConfig& cfg, OutputSet& out) {
    const double eps = cfg.number("options.epsilon");
    const double vartheta = cfg.is_auto("options.vartheta")
                                ? integrator::oscillator_vartheta(eps, cfg.number("params.lambda"))
                                : cfg.number("options.vartheta");
    const auto traj = integrator::integrate_oscillator(eps, vartheta, {cfg.number("options.x0"), cfg.number("options.v0")},
                                                       cfg.number("options.t_end"), cfg.solver(),
                                                       cfg.number("options.sample_dt"));
    std::ostringstream os;
    integrator::write_oscillator_csv(os, traj);
    emit_table(cfg, out, "oscillator", os.str());
}

void run_stability(const RunConfig& cfg, OutputSet& out) {
    const ModelParams p = cfg.params();
    const auto root = pick_root(p, cfg.number("options.sigma"));
    const int branch = static_cast<int>(cfg.integer("options.branch"));

    stability::StabilityOptions opts;
    opts.mode = cfg.text("options.mode") == "partial-rho" ? stability::StabilityMode::PartialRho
                                                          : stability::StabilityMode::Lyapunov;
    opts.tau0 = cfg.number("options.tau0");
    opts.kappa = cfg.number("options.kappa");
    opts.d_star = cfg.number("options.d_star");
    opts.escape_norm = cfg.number("options.escape_norm");
    opts.epsilon = cfg.number("options.epsilon");
    opts.n_orders = static_cast<int>(cfg.integer("options.orders"));
    opts.seed = cfg.seed();
    opts.sensitivity_rerun = cfg.flag("options.sensitivity");

    double radius = cfg.number("options.radius");
    double horizon = cfg.number("options.horizon");
    if (opts.mode == stability::StabilityMode::PartialRho && (std::isnan(radius) || std::isnan(horizon))) {
        const auto sol = series::build_solution(p, root, branch, opts.n_orders);
        if (std::isnan(radius)) radius = stability::partial_rho_radius(p, sol, opts.epsilon, opts.tau0, opts.kappa);
        if (std::isnan(horizon)) horizon = stability::partial_rho_horizon(sol, opts.epsilon, opts.tau0);
    }
    if (std::isnan(radius)) radius = 0.03;
    if (std::isnan(horizon)) horizon = 1e4;

    const auto report =
        stability::measure_stability(p, root, branch, radius, static_cast<int>(cfg.integer("options.samples")), horizon,
                                     cfg.solver(), opts, threaded_for(cfg.threads()));
    if (cfg.format() == "json")
        out.write("stability.json", stability::to_json(report) + "\n");
    else
        out.write("stability.csv", object_to_csv(ojson::parse(stability::to_json(report))));
}

void run_portrait(const RunConfig& cfg, OutputSet& out) {
    const ModelParams p = cfg.params();
    const auto root = pick_root(p, cfg.number("options.sigma"));
    const auto grid = averaging::level_grid(root, p, {cfg.number("options.r_min"), cfg.number("options.r_max")},
                                            {cfg.number("options.psi_min"), cfg.number("options.psi_max")},
                                            static_cast<int>(cfg.integer("options.n_r")),
                                            static_cast<int>(cfg.integer("options.n_psi")));
    std::ostringstream os;
    averaging::write_level_csv(os, grid);
    emit_table(cfg, out, "portrait", os.str());

    std::ostringstream cp;
    cp << "R,Psi,kind,multiplicity\n";
    for (const auto& c : averaging::critical_points(root, p))
        cp << fmt17(c.R) << ',' << fmt17(c.Psi) << ',' << averaging::to_string(c.kind) << ',' << c.multiplicity << '\n';
    emit_table(cfg, out, "critical_points", cp.str());
}

void run_action_angle(const RunConfig& cfg, OutputSet& out) {
    const ModelParams p = cfg.params();
    const auto root = pick_root(p, cfg.number("options.sigma"));
    const auto& levels = cfg.list("options.levels");
    const auto table = levels.empty() ? averaging::action_angle_table(root, p, static_cast<int>(cfg.integer("options.n_levels")),
                                                                      cfg.solver())
                                      : averaging::action_angle_table(root, p, levels, cfg.solver());
    if (cfg.format() == "json") {
        ojson j;
        j["sigma"] = root.sigma;
        j["I_star"] = table.I_star;
        j["omega0"] = table.omega0;
        j["rows"] = ojson::array();
        for (const auto& r : table.rows)
            j["rows"].push_back({{"I", r.I}, {"T", r.T}, {"omega", r.omega}, {"closure", r.closure},
                                 {"energy_drift", r.energy_drift}});
        out.write("action_angle.json", j.dump(2) + "\n");
        return;
    }
    std::ostringstream os;
    averaging::write_action_angle_csv(os, table);
    out.write("action_angle.csv", os.str());
}

void run_envelope(const RunConfig& cfg, OutputSet& out) {
    const ModelParams p = cfg.params();
    const auto sol = solution_for(cfg);
    const double t0 = cfg.number("options.t0");
    const auto s0 = series::eval_solution(sol, t0);
    const auto traj = integrator::integrate(
        p, {t0, s0.rho + cfg.number("options.drho"), s0.psi + cfg.number("options.dpsi")},
        cfg.number("options.tau_end"), cfg.solver());
    averaging::EnvelopeOptions eo;
    eo.tau_min = cfg.number("options.tau_min");
    eo.tau_max = cfg.number("options.tau_max");
    const auto fit = averaging::envelope_fit(traj, sol, p, eo);

    ojson j;
    j["case"] = std::string(series::to_string(sol.case_tag));
    j["sigma"] = sol.root.sigma;
    j["branch"] = sol.branch;
    j["amp_exponent"] = fit.amp_exponent;
    j["amp_coeff"] = fit.amp_coeff;
    j["phase_exponent"] = fit.phase_exponent;
    j["phase_coeff"] = fit.phase_coeff;
    j["residual_rms"] = fit.residual_rms;
    j["n_extrema"] = fit.n_extrema;
    j["tau_min"] = fit.tau_min;
    j["tau_max"] = fit.tau_max;
    emit_record(cfg, out, "envelope", j);
    if (cfg.flag("options.emit_trajectory")) {
        std::ostringstream os;
        integrator::write_trajectory_csv(os, traj);
        emit_table(cfg, out, "trajectory", os.str());
    }
}

}  // namespace

void run(const RunConfig& cfg, OutputSet& out) {
    switch (cfg.subcommand) {
        case Subcommand::Roots: return run_roots(cfg, out);
        case Subcommand::Partition: return run_partition(cfg, out);
        case Subcommand::Series: return run_series(cfg, out);
        case Subcommand::Simulate: return run_simulate(cfg, out);
        case Subcommand::CaptureMap: return run_capture_map(cfg, out);
        case Subcommand::OscillatorDemo: return run_oscillator(cfg, out);
        case Subcommand::Stability: return run_stability(cfg, out);
        case Subcommand::Portrait: return run_portrait(cfg, out);
        case Subcommand::ActionAngle: return run_action_angle(cfg, out);
        case Subcommand::Envelope: return run_envelope(cfg, out);
    }
}

}  // namespace autores::cli
