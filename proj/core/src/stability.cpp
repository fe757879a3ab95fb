#include "autores/stability.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include "autores/error.hpp"
#include "autores/fit.hpp"
#include "autores/format.hpp"
#include "autores/integrator.hpp"
#include "json.hpp"

namespace autores::stability {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Star {
    double tau, rho, psi, mu, a;
};

Star star_at(const ModelParams& params, const series::AsymptoticSolution& sol, double tau) {
    const double z = std::pow(tau, -1.0 / sol.q());
    const double rho = sol.rho_series.eval_z(z);
    const double psi = sol.psi_series.eval_z(z);
    return {tau, rho, psi, params.mu_at(tau), 2.0 * psi + params.nu};
}

void require_tau(double tau) {
    if (!(tau >= 1.0)) throw Error(ErrorKind::InvalidArgument, "tau must be >= 1 on the series solution");
}

// cos a - cos(a + 2 Psi)
double cos_gap(double a, double Psi) { return 2.0 * std::sin(a + Psi) * std::sin(Psi); }

double h_at(const Star& s, double R, double Psi) {
    const double t14 = std::pow(s.tau, 0.25);
    const double lin = -2.0 * std::sin(s.psi + 0.5 * Psi) * std::sin(0.5 * Psi) + Psi * std::sin(s.psi);
    const double gap = cos_gap(s.a, Psi);
    return s.rho * R * R / t14 + t14 * lin + t14 * 0.5 * s.rho * s.mu * (gap - 2.0 * Psi * std::sin(s.a)) +
           0.5 * s.mu * R * gap + R * R * R / (3.0 * std::sqrt(s.tau)) - R * Psi / (4.0 * s.tau);
}

double f_at(const Star& s, double R, double Psi, double guard) {
    const double t14 = std::pow(s.tau, 0.25);
    const double dx = R / t14;
    const double rho = s.rho + dx;
    if (!(rho > guard))
        throw Error(ErrorKind::AmplitudeUnderflow, "rho = " + fmt17(rho) + " at tau = " + fmt17(s.tau));
    const double dcos = -2.0 * std::sin(s.psi + 0.5 * Psi) * std::sin(0.5 * Psi);
    return dcos / rho - std::cos(s.psi) * dx / (rho * s.rho) + 0.5 * s.mu * cos_gap(s.a, Psi) + Psi / (4.0 * s.tau);
}

// int_0^Psi P(sigma + zeta) dzeta
double p_integral(double delta, double nu, double sigma, double Psi) {
    const double a = 2.0 * sigma + nu;
    return -0.5 * delta * (-cos_gap(a, Psi)) + (-2.0 * std::sin(sigma + 0.5 * Psi) * std::sin(0.5 * Psi));
}

int multiplicity_of(LyapunovKind k) {
    switch (k) {
        case LyapunovKind::V1: return 1;
        case LyapunovKind::U2:
        case LyapunovKind::V2: return 2;
        case LyapunovKind::U3:
        case LyapunovKind::V3: return 3;
    }
    return 0;
}

bool is_decay(LyapunovKind k) { return k == LyapunovKind::V1 || k == LyapunovKind::V2 || k == LyapunovKind::V3; }

}  // namespace

double l_kappa(double kappa) {
    if (!(kappa > 0.0 && kappa < 1.0)) throw Error(ErrorKind::InvalidArgument, "kappa must lie in (0, 1)");
    return (1.0 - kappa) / (1.0 + kappa);
}

LinearizationSample linearization(const ModelParams& params, const series::AsymptoticSolution& sol, double tau) {
    require_tau(tau);
    const Star s = star_at(params, sol, tau);
    LinearizationSample out;
    out.tau = tau;
    out.matrix[0][0] = -s.mu * std::sin(s.a);
    out.matrix[0][1] = std::cos(s.psi) - 2.0 * s.rho * s.mu * std::cos(s.a);
    out.matrix[1][0] = 2.0 * s.rho - std::cos(s.psi) / (s.rho * s.rho);
    out.matrix[1][1] = 2.0 * s.mu * std::sin(s.a) - std::sin(s.psi) / s.rho;
    const double tr = out.matrix[0][0] + out.matrix[1][1];
    const double det = out.matrix[0][0] * out.matrix[1][1] - out.matrix[0][1] * out.matrix[1][0];
    const std::complex<double> root = std::sqrt(std::complex<double>(0.25 * tr * tr - det, 0.0));
    out.z_plus = 0.5 * tr + root;
    out.z_minus = 0.5 * tr - root;
    return out;
}

double omega_squared(const series::AsymptoticSolution& sol) {
    const double psi1 = sol.psi_coeff(1);
    switch (sol.multiplicity()) {
        case 1: return sol.root.derivative(1);
        case 2: return psi1 * sol.root.derivative(2);
        default: return 0.5 * psi1 * psi1 * sol.root.derivative(3);
    }
}

double leading_eigenvalue_magnitude(const ModelParams& params, const series::AsymptoticSolution& sol, double tau) {
    const double w = std::sqrt(std::fabs(omega_squared(sol)));
    const double lam = params.lambda;
    switch (sol.multiplicity()) {
        case 1: return std::pow(4.0 * lam * tau, 0.25) * w;
        case 2: return std::pow(4.0 * lam, 0.25) * std::pow(tau, 0.125) * w;
        // lambda^(1/4) sqrt(chi^2 P''') = (4 lambda)^(1/4) sqrt(chi^2 P'''/2)
        default: return std::pow(lam, 0.25) * std::pow(tau, 1.0 / 12.0) * std::sqrt(2.0) * w;
    }
}

double hamiltonian_h(const ModelParams& params, const series::AsymptoticSolution& sol, double R, double Psi,
                     double tau) {
    require_tau(tau);
    return h_at(star_at(params, sol, tau), R, Psi);
}

double forcing_f(const ModelParams& params, const series::AsymptoticSolution& sol, double R, double Psi, double tau,
                 double guard_rho_min) {
    require_tau(tau);
    return f_at(star_at(params, sol, tau), R, Psi, guard_rho_min);
}

HamiltonianGrad hamiltonian_grad(const ModelParams& params, const series::AsymptoticSolution& sol, double R,
                                 double Psi, double tau) {
    require_tau(tau);
    const Star s = star_at(params, sol, tau);
    const double t14 = std::pow(s.tau, 0.25);
    HamiltonianGrad g;
    g.dR = 2.0 * s.rho * R / t14 + 0.5 * s.mu * cos_gap(s.a, Psi) + R * R / std::sqrt(tau) - Psi / (4.0 * tau);
    const double sin_gap = std::sin(s.a + 2.0 * Psi) - std::sin(s.a);
    g.dPsi = t14 * (std::sin(s.psi) - std::sin(s.psi + Psi)) + t14 * s.rho * s.mu * sin_gap +
             s.mu * R * std::sin(s.a + 2.0 * Psi) - R / (4.0 * tau);
    return g;
}

std::string_view to_string(LyapunovKind k) noexcept {
    switch (k) {
        case LyapunovKind::V1: return "V1";
        case LyapunovKind::U2: return "U2";
        case LyapunovKind::U3: return "U3";
        case LyapunovKind::V2: return "V2";
        case LyapunovKind::V3: return "V3";
    }
    return "?";
}

LyapunovKind instability_kind(const series::AsymptoticSolution& sol) {
    switch (sol.multiplicity()) {
        case 1: return LyapunovKind::V1;
        case 2: return LyapunovKind::U2;
        default: return LyapunovKind::U3;
    }
}

LyapunovKind partial_kind(const series::AsymptoticSolution& sol) {
    switch (sol.multiplicity()) {
        case 2: return LyapunovKind::V2;
        case 3: return LyapunovKind::V3;
        default: throw Error(ErrorKind::InvalidArgument, "partial rho-stability applies to double and triple roots");
    }
}

double theory_rate(LyapunovKind k, double kappa) {
    const double l = l_kappa(kappa);
    switch (k) {
        case LyapunovKind::V1: return l / 8.0;
        case LyapunovKind::U2: return l / 6.0;
        case LyapunovKind::U3: return 3.0 * l / 26.0;
        case LyapunovKind::V2: return 3.0 * l / 16.0;
        case LyapunovKind::V3: return 5.0 * l / 24.0;
    }
    return kNaN;
}

ScaledState to_scaled(LyapunovKind k, double x, double y, double tau) {
    switch (k) {
        case LyapunovKind::V1: return {std::pow(tau, 0.25) * x, y, tau};
        case LyapunovKind::U2:
            return {std::pow(tau, 0.625) * x, std::pow(tau, 0.25) * y, 8.0 / 9.0 * std::pow(tau, 1.125)};
        case LyapunovKind::U3:
            return {std::pow(tau, 7.0 / 12.0) * x, std::pow(tau, 1.0 / 6.0) * y,
                    12.0 / 13.0 * std::pow(tau, 13.0 / 12.0)};
        case LyapunovKind::V2: return {std::pow(tau, 0.25) * x, std::pow(tau, 0.25) * y, tau};
        case LyapunovKind::V3: return {std::pow(tau, 0.25) * x, std::pow(tau, 1.0 / 6.0) * y, tau};
    }
    return {};
}

std::pair<double, double> from_scaled(LyapunovKind k, double a, double b, double tau) {
    const ScaledState unit = to_scaled(k, 1.0, 1.0, tau);
    return {a / unit.a, b / unit.b};
}

LyapunovValue lyapunov_eval_deviation(LyapunovKind k, const ModelParams& params,
                                      const series::AsymptoticSolution& sol, double x, double y, double tau,
                                      double d_star) {
    require_tau(tau);
    if (multiplicity_of(k) != sol.multiplicity())
        throw Error(ErrorKind::InvalidArgument, std::string(to_string(k)) + " does not apply to a root of multiplicity " +
                                                    std::to_string(sol.multiplicity()));
    const ScaledState sc = to_scaled(k, x, y, tau);
    LyapunovValue out;
    out.time = sc.time;
    out.d = std::hypot(sc.a, sc.b);
    if (out.d > d_star)
        throw Error(ErrorKind::OutOfDomain, "scaled distance " + fmt17(out.d) + " exceeds d* = " + fmt17(d_star));

    const Star s = star_at(params, sol, tau);
    const double R = std::pow(tau, 0.25) * x;
    const double Psi = y;
    const double H = h_at(s, R, Psi);
    const double sl = std::sqrt(params.lambda);
    const double w2 = std::fabs(omega_squared(sol));
    const double a = sc.a, b = sc.b;
    switch (k) {
        case LyapunovKind::V1: {
            const double f2 = p_integral(params.delta(), params.nu, sol.root.sigma, Psi);
            out.value = H / std::pow(tau, 0.25) + std::pow(tau, -0.75) * (2.0 * sl * R * R * R / 3.0 + R * f2) -
                        std::pow(tau, -1.25) * R * Psi / 8.0;
            out.norm_w = std::sqrt(sl * a * a + w2 * b * b / 2.0);
            break;
        }
        case LyapunovKind::U2:
            out.value = std::sqrt(tau) * H - a * b / (6.0 * sc.time);
            out.norm_w = std::sqrt(sl * a * a + w2 * b * b / 2.0);
            break;
        case LyapunovKind::U3:
            out.value = std::pow(tau, 5.0 / 12.0) * H - 5.0 * a * b / (26.0 * sc.time);
            out.norm_w = std::sqrt(sl * a * a + w2 * b * b / 2.0);
            break;
        case LyapunovKind::V2:
            out.value = std::pow(tau, -0.25) * H +
                        std::pow(tau, -1.5) * (-3.0 * a * b / 16.0 - std::cos(sol.root.sigma) * a * a / (2.0 * sl));
            out.norm_w = std::sqrt(sl * a * a + std::pow(tau, -0.75) * w2 * b * b / 2.0);
            break;
        case LyapunovKind::V3:
            out.value = std::pow(tau, -0.25) * H + std::pow(tau, -17.0 / 12.0) * (-5.0 * a * b / 24.0);
            out.norm_w = std::sqrt(sl * a * a + std::pow(tau, -2.0 / 3.0) * w2 * b * b / 2.0);
            break;
    }
    return out;
}

double lyapunov_eval(LyapunovKind k, const ModelParams& params, const series::AsymptoticSolution& sol, double rho,
                     double psi, double tau, double d_star) {
    require_tau(tau);
    const auto v = series::eval_solution(sol, tau);
    return lyapunov_eval_deviation(k, params, sol, rho - v.rho, psi - v.psi, tau, d_star).value;
}

LyapunovTrace lyapunov_trace(LyapunovKind k, const ModelParams& params, const series::AsymptoticSolution& sol,
                             double x0, double y0, double tau0, double tau_end, const SolverConfig& cfg,
                             const TraceOptions& opts) {
    LyapunovTrace tr;
    tr.which = k;
    const integrator::DeviationSystem sys(params, sol, cfg.guard_rho_min);
    const bool down = is_decay(k);
    long steps = 0, monotone = 0;
    bool first = true;
    double prev = 0.0, last_log = -std::numeric_limits<double>::infinity();
    TraceSample last{};

    auto observe = [&](double tau, const StateN<2>& xy) {
        LyapunovValue v;
        try {
            v = lyapunov_eval_deviation(k, params, sol, xy[0], xy[1], tau, opts.d_star);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::OutOfDomain) throw;
            tr.left_domain = true;
            return false;
        }
        tr.tau_end = tau;
        tr.max_abs_x = std::max(tr.max_abs_x, std::fabs(xy[0]));
        tr.max_abs_a = std::max(tr.max_abs_a, std::fabs(to_scaled(k, xy[0], xy[1], tau).a));
        if (!first) {
            ++steps;
            if (down ? v.value <= prev : v.value >= prev) ++monotone;
        }
        first = false;
        prev = v.value;
        last = {v.time, v.value, v.norm_w};
        const double lt = std::log(v.time);
        if (lt - last_log >= opts.log_stride) {
            tr.samples.push_back(last);
            last_log = lt;
        }
        if (v.norm_w > opts.escape_norm || std::fabs(xy[0]) >= opts.x_bound) {
            tr.escaped = true;
            return false;
        }
        return true;
    };
    StateN<2> xy{x0, y0};
    tr.solver_stats = integrator::integrate_deviation(sys, tau0, xy, tau_end, cfg, observe);
    if (tr.samples.empty() || tr.samples.back().time != last.time) tr.samples.push_back(last);
    tr.monotone_fraction = steps > 0 ? static_cast<double>(monotone) / static_cast<double>(steps) : 1.0;
    if (tr.samples.size() >= 2) {
        std::vector<double> lx, ly;
        for (const auto& s : tr.samples) {
            if (!(s.norm_w > 0.0)) continue;
            lx.push_back(std::log(s.time));
            ly.push_back(std::log(s.norm_w));
        }
        if (lx.size() >= 2) tr.fitted_exponent = fit_line(lx, ly).slope;
    }
    return tr;
}

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::AsymptoticallyStable: return "AsymptoticallyStable";
        case Verdict::Unstable: return "Unstable";
        case Verdict::PartiallyRhoStable: return "PartiallyRhoStable";
    }
    return "?";
}

double partial_rho_radius(const ModelParams& params, const series::AsymptoticSolution& sol, double epsilon,
                          double tau0, double kappa) {
    const double e = sol.multiplicity() == 2 ? 3.0 / 8.0 : sol.multiplicity() == 3 ? 1.0 / 3.0 : kNaN;
    if (std::isnan(e)) throw Error(ErrorKind::InvalidArgument, "partial rho-stability applies to double and triple roots");
    const double sl = std::sqrt(params.lambda);
    const double half_w2 = 0.5 * std::fabs(omega_squared(sol));
    const double m_lo = std::min(sl, half_w2), m_hi = std::max(sl, half_w2);
    return std::pow(tau0, -e) * epsilon * std::sqrt(l_kappa(kappa) * m_lo / (2.0 * m_hi));
}

double partial_rho_horizon(const series::AsymptoticSolution& sol, double epsilon, double tau0) {
    switch (sol.multiplicity()) {
        case 2: return tau0 * std::pow(epsilon, -8.0 / 3.0);
        case 3: return tau0 * std::pow(epsilon, -3.0);
        default: throw Error(ErrorKind::InvalidArgument, "partial rho-stability applies to double and triple roots");
    }
}

StabilityReport measure_stability(const ModelParams& params, const phase_model::PhaseRoot& root, int branch,
                                  double radius, int n_samples, double horizon, const SolverConfig& cfg,
                                  const StabilityOptions& opts, const ParallelFor& pfor) {
    if (n_samples < 1) throw Error(ErrorKind::InvalidArgument, "n_samples must be positive");
    if (!(radius > 0.0) || radius > opts.d_star / 10.0)
        throw Error(ErrorKind::InvalidArgument, "radius must lie in (0, d*/10]");
    if (!(horizon > opts.tau0)) throw Error(ErrorKind::InvalidArgument, "horizon must exceed tau0");
    const auto sol = series::build_solution(params, root, branch, opts.n_orders);

    StabilityReport rep;
    rep.root = root;
    rep.branch = branch;
    rep.mode = opts.mode;
    rep.horizon = horizon;
    rep.tau0 = opts.tau0;
    rep.n_samples = n_samples;
    rep.d_star = opts.d_star;
    rep.kappa = opts.kappa;
    rep.radius = radius;

    const LyapunovKind kind = opts.mode == StabilityMode::PartialRho ? partial_kind(sol) : instability_kind(sol);
    rep.kind = kind;
    const double psi1 = sol.psi_coeff(1);
    using phase_model::StabilityClass;
    const bool covered = (kind == LyapunovKind::V1 && root.stability_class == StabilityClass::StableCaseI) ||
                         (kind == LyapunovKind::U2 && root.stability_class == StabilityClass::CaseII && psi1 < 0.0) ||
                         (kind == LyapunovKind::U3 && root.stability_class == StabilityClass::CaseIII) ||
                         (kind == LyapunovKind::V2 && root.stability_class == StabilityClass::CaseII && psi1 < 0.0) ||
                         (kind == LyapunovKind::V3 && root.stability_class == StabilityClass::CaseIII);
    rep.theory_rate = covered ? theory_rate(kind, opts.kappa) : kNaN;

    // Angles are drawn up front so parallel runs see the same states.
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::vector<double> thetas(static_cast<std::size_t>(n_samples));
    for (double& t : thetas) t = angle(rng);

    const double sl4 = std::pow(params.lambda, 0.25);
    const double w2 = std::fabs(omega_squared(sol));
    TraceOptions topt;
    topt.d_star = opts.d_star;
    if (opts.mode == StabilityMode::PartialRho)
        topt.x_bound = opts.epsilon;
    else
        topt.escape_norm = opts.escape_norm;

    std::vector<std::optional<LyapunovTrace>> traces(thetas.size());
    std::vector<std::string> errs(thetas.size());
    pfor(thetas.size(), [&](std::size_t i) {
        const double c = std::cos(thetas[i]), s = std::sin(thetas[i]);
        double a, b;
        if (opts.mode == StabilityMode::PartialRho) {
            a = radius * c;
            b = radius * s;
        } else {
            a = radius * c / sl4;
            b = radius * s * std::sqrt(2.0 / w2);
        }
        const auto [x0, y0] = from_scaled(kind, a, b, opts.tau0);
        try {
            traces[i] = lyapunov_trace(kind, params, sol, x0, y0, opts.tau0, horizon, cfg, topt);
        } catch (const Error& e) {
            errs[i] = e.what();
        }
    });

    const bool down = is_decay(kind);
    double worst = std::numeric_limits<double>::infinity();
    bool any_out = false;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        if (!traces[i]) {
            ++rep.n_failed;
            rep.errors.push_back("sample " + std::to_string(i) + ": " + errs[i]);
            continue;
        }
        const LyapunovTrace& t = *traces[i];
        const double rate = down ? -t.fitted_exponent : t.fitted_exponent;
        rep.sample_rates.push_back(rate);
        worst = std::min(worst, rate);
        rep.n_escaped += t.escaped ? 1 : 0;
        any_out = any_out || t.escaped || t.left_domain;
        rep.min_monotone_fraction = std::min(rep.min_monotone_fraction, t.monotone_fraction);
        rep.max_rho_deviation = std::max(rep.max_rho_deviation, t.max_abs_x);
    }
    rep.measured_rate = rep.sample_rates.empty() ? kNaN : worst;

    if (rep.n_failed == n_samples) {
        rep.verdict = Verdict::Unstable;
    } else if (opts.mode == StabilityMode::PartialRho) {
        rep.verdict = !any_out && rep.n_failed == 0 ? Verdict::PartiallyRhoStable : Verdict::Unstable;
    } else if (down) {
        rep.verdict = !any_out && rep.n_failed == 0 && worst > 0.0 ? Verdict::AsymptoticallyStable : Verdict::Unstable;
    } else {
        rep.verdict = any_out || rep.n_failed > 0 || worst > 0.0 ? Verdict::Unstable : Verdict::AsymptoticallyStable;
    }
    if (opts.sensitivity_rerun) {
        StabilityOptions o = opts;
        o.sensitivity_rerun = false;
        o.tau0 = 4.0 * opts.tau0;
        double r4 = radius;
        if (opts.mode == StabilityMode::PartialRho)
            r4 *= std::pow(4.0, sol.multiplicity() == 2 ? -3.0 / 8.0 : -1.0 / 3.0);
        const StabilityReport again = measure_stability(params, root, branch, r4, n_samples, 4.0 * horizon, cfg, o, pfor);
        rep.sensitivity_tau0 = o.tau0;
        rep.sensitivity_rate = again.measured_rate;
        rep.sensitivity_verdict = again.verdict;
    }
    return rep;
}

std::string to_json(const StabilityReport& r) {
    nlohmann::ordered_json j;
    j["sigma"] = r.root.sigma;
    j["multiplicity"] = r.root.multiplicity;
    j["stability_class"] = std::string(phase_model::to_string(r.root.stability_class));
    j["branch"] = r.branch;
    j["mode"] = r.mode == StabilityMode::PartialRho ? "PartialRho" : "Lyapunov";
    j["lyapunov"] = r.kind ? nlohmann::ordered_json(std::string(to_string(*r.kind))) : nlohmann::ordered_json(nullptr);
    j["verdict"] = std::string(to_string(r.verdict));
    j["measured_rate"] = r.measured_rate;
    j["theory_rate"] = r.theory_rate;
    j["n_samples"] = r.n_samples;
    j["horizon"] = r.horizon;
    j["tau0"] = r.tau0;
    j["n_escaped"] = r.n_escaped;
    j["n_failed"] = r.n_failed;
    j["min_monotone_fraction"] = r.min_monotone_fraction;
    j["max_rho_deviation"] = r.max_rho_deviation;
    j["sample_rates"] = r.sample_rates;
    j["errors"] = r.errors;
    j["d_star"] = r.d_star;
    j["kappa"] = r.kappa;
    j["radius"] = r.radius;
    j["sensitivity_tau0"] = r.sensitivity_tau0;
    j["sensitivity_rate"] = r.sensitivity_rate;
    j["sensitivity_verdict"] = r.sensitivity_verdict ? nlohmann::ordered_json(std::string(to_string(*r.sensitivity_verdict)))
                                                     : nlohmann::ordered_json(nullptr);
    return j.dump(2);
}

void write_trace_csv(std::ostream& os, const LyapunovTrace& trace) {
    os << "time,value,norm_w\n";
    for (const TraceSample& s : trace.samples)
        os << fmt17(s.time) << ',' << fmt17(s.value) << ',' << fmt17(s.norm_w) << '\n';
}

}  // namespace autores::stability
