#include "autores/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "autores/error.hpp"
#include "autores/format.hpp"

namespace autores {

void SolverConfig::validate() const {
    auto bad = [](const char* what) { throw Error(ErrorKind::InvalidArgument, what); };
    if (!(rtol > 0.0 && rtol <= 1e-2)) bad("rtol must lie in (0, 1e-2]");
    if (!(atol > 0.0 && atol <= 1e-2)) bad("atol must lie in (0, 1e-2]");
    if (!(h_init > 0.0)) bad("h_init must be positive");
    if (!(h_max > 0.0)) bad("h_max must be positive");
    if (!(guard_rho_min > 0.0)) bad("guard_rho_min must be positive");
}

}  // namespace autores

namespace autores::integrator {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

[[noreturn]] void underflow(double tau, double rho) {
    throw Error(ErrorKind::AmplitudeUnderflow, "rho = " + fmt17(rho) + " at tau = " + fmt17(tau));
}

double local_step_cap(double rho, double dpsi) {
    const double omega = std::max(std::fabs(dpsi), std::sqrt(2.0 * std::max(rho, 0.0)));
    return omega > 0.0 ? kTwoPi / (kSamplesPerPeriod * omega) : std::numeric_limits<double>::infinity();
}

void check_ic(const InitialCondition& ic, double tau_end, const SolverConfig& cfg) {
    if (!(ic.tau0 >= 0.0)) throw Error(ErrorKind::InvalidArgument, "tau0 must be non-negative");
    if (!(tau_end > ic.tau0)) throw Error(ErrorKind::InvalidArgument, "tau_end must exceed tau0");
    if (!(ic.rho0 > cfg.guard_rho_min))
        throw Error(ErrorKind::InvalidArgument, "rho0 must exceed guard_rho_min");
}

// Drops every coefficient below `start`.
PuiseuxSeries tail_from(const PuiseuxSeries& s, int start) {
    const int from = std::clamp(start, s.offset, s.horizon());
    std::vector<double> c(s.coeffs.begin() + (from - s.offset), s.coeffs.end());
    while (!c.empty() && c.back() == 0.0) c.pop_back();
    if (c.empty()) return PuiseuxSeries(s.q, from, {0.0});
    return PuiseuxSeries(s.q, from, std::move(c));
}

}  // namespace

std::pair<double, double> rhs_ms(double tau, double rho, double psi, const ModelParams& params,
                                 double guard_rho_min) {
    if (!(rho > guard_rho_min)) underflow(tau, rho);
    const double mu = params.mu_at(tau);
    const double a = 2.0 * psi + params.nu;
    return {std::sin(psi) - mu * rho * std::sin(a),
            rho * rho - params.lambda * tau - mu * std::cos(a) + std::cos(psi) / rho};
}

SolverStats integrate_observed(const ModelParams& params, const InitialCondition& ic, double tau_end,
                               const SolverConfig& cfg,
                               const std::function<bool(double tau, double rho, double psi)>& observe) {
    params.validate();
    cfg.validate();
    check_ic(ic, tau_end, cfg);
    if (params.is_asymptotic() && ic.tau0 < 1.0)
        throw Error(ErrorKind::InvalidArgument, "series mu profiles are integrated from tau0 >= 1 only");
    const double guard = cfg.guard_rho_min;
    auto f = [&](double t, const StateN<2>& y) -> StateN<2> {
        const auto [dr, dp] = rhs_ms(t, y[0], y[1], params, guard);
        return {dr, dp};
    };
    auto cap = [&](double t, const StateN<2>& y) {
        const auto [dr, dp] = rhs_ms(t, y[0], y[1], params, guard);
        (void)dr;
        return local_step_cap(y[0], dp);
    };
    StateN<2> y{ic.rho0, ic.psi0};
    return dopri5_integrate<2>(f, ic.tau0, y, tau_end, cfg,
                               [&](double t, const StateN<2>& s) { return observe(t, s[0], s[1]); }, cap);
}

Trajectory integrate(const ModelParams& params, const InitialCondition& ic, double tau_end,
                     const SolverConfig& cfg) {
    Trajectory traj;
    traj.solver_stats = integrate_observed(params, ic, tau_end, cfg, [&](double t, double r, double p) {
        traj.samples.push_back({t, r, p});
        return true;
    });
    return traj;
}

DeviationSystem::DeviationSystem(const ModelParams& params, const series::AsymptoticSolution& sol,
                                 double guard_rho_min)
    : params_(params), sol_(sol), guard_(guard_rho_min) {
    auto [e1, e2] = series::residual(sol_, params_, 2 * sol_.q());
    e1_ = tail_from(e1, series::residual_start_e1(sol_));
    e2_ = tail_from(e2, series::residual_start_e2(sol_));
}

StateN<2> DeviationSystem::operator()(double tau, const StateN<2>& xy) const {
    const double zq = std::pow(tau, -1.0 / sol_.q());
    const double rs = sol_.rho_series.eval_z(zq);
    const double ps = sol_.psi_series.eval_z(zq);
    const double x = xy[0];
    const double y = xy[1];
    const double rho = rs + x;
    if (!(rho > guard_)) underflow(tau, rho);
    const double mu = params_.mu_at(tau);
    const double a = 2.0 * ps + params_.nu;
    const double sh = std::sin(0.5 * y);
    const double sy = std::sin(y);

    const double df1 = 2.0 * std::cos(ps + 0.5 * y) * sh - mu * (x * std::sin(a + 2.0 * y) + 2.0 * rs * std::cos(a + y) * sy);
    const double df2 = x * (2.0 * rs + x) + 2.0 * mu * std::sin(a + y) * sy - 2.0 * std::sin(ps + 0.5 * y) * sh / rho -
                       std::cos(ps) * x / (rs * rho);
    return {df1 - e1_.eval_z(zq), df2 - e2_.eval_z(zq) / rs};
}

SolverStats integrate_deviation(const DeviationSystem& sys, double tau0, StateN<2>& xy, double tau_end,
                                const SolverConfig& cfg,
                                const std::function<bool(double tau, const StateN<2>& xy)>& observe) {
    if (!(tau0 >= 1.0)) throw Error(ErrorKind::InvalidArgument, "deviation integration starts at tau0 >= 1");
    // local frequency from the linearization, sqrt(2 rho |d rho'/d psi|)
    const ModelParams& p = sys.params();
    auto cap = [&](double t, const StateN<2>& s) {
        const double rho = sys.solution().rho_series.eval(t) + s[0];
        const double psi = sys.solution().psi_series.eval(t) + s[1];
        const double dpsi_f1 = std::cos(psi) - 2.0 * p.mu_at(t) * rho * std::cos(2.0 * psi + p.nu);
        const double omega = std::sqrt(2.0 * std::max(rho, 0.0) * std::fabs(dpsi_f1));
        return omega > 0.0 ? kTwoPi / (kSamplesPerPeriod * omega) : std::numeric_limits<double>::infinity();
    };
    return dopri5_integrate<2>(sys, tau0, xy, tau_end, cfg, observe, cap);
}

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::Captured: return "Captured";
        case Verdict::NotCaptured: return "NotCaptured";
        case Verdict::Undecided: return "Undecided";
    }
    return "?";
}

CaptureVerdict classify_capture(const Trajectory& traj, const ModelParams& params, double capture_tol,
                                double winding_cap) {
    if (traj.samples.size() < 2) throw Error(ErrorKind::InvalidArgument, "trajectory needs at least two samples");
    const Sample& last = traj.samples.back();
    const double t_half = 0.5 * (traj.samples.front().tau + last.tau);
    double lo = last.psi, hi = last.psi;
    for (const Sample& s : traj.samples) {
        if (s.tau < t_half) continue;
        lo = std::min(lo, s.psi);
        hi = std::max(hi, s.psi);
    }
    CaptureVerdict out;
    out.rho_ratio_end = last.rho / std::sqrt(params.lambda * last.tau);
    out.psi_winding = hi - lo;
    const bool locked = std::fabs(out.rho_ratio_end - 1.0) <= capture_tol;
    const bool slipping = out.psi_winding >= kTwoPi * winding_cap;
    if (locked && !slipping)
        out.verdict = Verdict::Captured;
    else if (!locked && slipping)
        out.verdict = Verdict::NotCaptured;
    else
        out.verdict = Verdict::Undecided;
    return out;
}

std::vector<CaptureCell> capture_map(const ModelParams& params, const CaptureGrid& grid, double horizon,
                                     const SolverConfig& cfg, const ParallelFor& pfor, double capture_tol,
                                     double winding_cap) {
    const std::size_t nr = grid.rho0.size();
    const std::size_t np = grid.psi0.size();
    std::vector<CaptureCell> cells(nr * np);
    pfor(cells.size(), [&](std::size_t idx) {
        CaptureCell& cell = cells[idx];
        cell.rho0 = grid.rho0[idx / np];
        cell.psi0 = grid.psi0[idx % np];
        try {
            const Trajectory traj = integrate(params, {grid.tau0, cell.rho0, cell.psi0}, horizon, cfg);
            cell.verdict = classify_capture(traj, params, capture_tol, winding_cap);
        } catch (const Error& e) {
            cell.error = e.what();
        }
    });
    return cells;
}

double oscillator_kappa() { return std::cbrt(4.0 / 3.0); }

ModelParams oscillator_params(double epsilon, double vartheta) {
    if (!(epsilon > 0.0) || !(vartheta > 0.0))
        throw Error(ErrorKind::InvalidArgument, "epsilon and vartheta must be positive");
    const double k = oscillator_kappa();
    return ModelParams::regularized(8.0 * vartheta * k * k / (epsilon * epsilon), 0.0, std::sqrt(2.0 * k) / 4.0,
                                    1.0 / (2.0 * k));
}

double oscillator_vartheta(double epsilon, double lambda) {
    const double k = oscillator_kappa();
    return lambda * epsilon * epsilon / (8.0 * k * k);
}

OscillatorTrajectory integrate_oscillator(double epsilon, double vartheta, std::pair<double, double> ic,
                                          double t_end, const SolverConfig& cfg, double sample_dt) {
    cfg.validate();
    if (!(epsilon >= 0.0) || !(vartheta >= 0.0))
        throw Error(ErrorKind::InvalidArgument, "epsilon and vartheta must be non-negative");
    if (!(t_end > 0.0)) throw Error(ErrorKind::InvalidArgument, "t_end must be positive");
    if (!(sample_dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "sample_dt must be positive");

    auto f = [&](double t, const StateN<2>& s) -> StateN<2> {
        const double zeta = t - vartheta * t * t;
        const double beta = 1.0 / std::sqrt(1.0 + epsilon * t);
        const double x = s[0];
        return {s[1], -(1.0 + epsilon * beta * std::cos(2.0 * zeta)) * (x - epsilon * x * x * x) +
                          epsilon * std::cos(zeta)};
    };

    OscillatorTrajectory out;
    double unwrapped = 0.0;
    bool first = true;
    auto record = [&](double t, const StateN<2>& s) {
        const double x = s[0], v = s[1];
        const double raw = std::atan2(-v, x);
        if (first) {
            unwrapped = raw;
            first = false;
        } else {
            unwrapped += std::remainder(raw - unwrapped, kTwoPi);
        }
        out.samples.push_back({t, x, v, 0.5 * v * v + 0.5 * x * x - 0.25 * epsilon * x * x * x * x, unwrapped});
    };

    StateN<2> y{ic.first, ic.second};
    record(0.0, y);
    SolverConfig seg = cfg;
    double carry_h = cfg.h_init;
    const auto n = static_cast<long>(std::ceil(t_end / sample_dt - 1e-9));
    for (long i = 0; i < n; ++i) {
        const double t0 = static_cast<double>(i) * sample_dt;
        const double t1 = i + 1 == n ? t_end : static_cast<double>(i + 1) * sample_dt;
        seg.h_init = std::min(carry_h, t1 - t0);
        double prev_t = t0;
        const SolverStats st = dopri5_integrate<2>(f, t0, y, t1, seg, [&](double t, const StateN<2>&) {
            // Full steps only; the segment end is clipped.
            if (t < t1 && t > prev_t) carry_h = t - prev_t;
            prev_t = t;
            return true;
        });
        out.solver_stats.steps += st.steps;
        out.solver_stats.rejected_steps += st.rejected_steps;
        out.solver_stats.max_error_estimate = std::max(out.solver_stats.max_error_estimate, st.max_error_estimate);
        record(t1, y);
    }
    return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "tau,rho,psi\n";
    for (const Sample& s : traj.samples) os << fmt17(s.tau) << ',' << fmt17(s.rho) << ',' << fmt17(s.psi) << '\n';
}

void write_capture_csv(std::ostream& os, const std::vector<CaptureCell>& cells) {
    os << "rho0,psi0,verdict,rho_ratio_end,psi_winding\n";
    for (const CaptureCell& c : cells) {
        os << fmt17(c.rho0) << ',' << fmt17(c.psi0) << ',';
        if (c.error)
            os << "Error,nan,nan\n";
        else
            os << to_string(c.verdict.verdict) << ',' << fmt17(c.verdict.rho_ratio_end) << ','
               << fmt17(c.verdict.psi_winding) << '\n';
    }
}

void write_oscillator_csv(std::ostream& os, const OscillatorTrajectory& traj) {
    os << "t,x,v,E,Psi\n";
    for (const OscillatorSample& s : traj.samples)
        os << fmt17(s.t) << ',' << fmt17(s.x) << ',' << fmt17(s.v) << ',' << fmt17(s.energy) << ','
           << fmt17(s.phase) << '\n';
}

}  // namespace autores::integrator
