#include "autores/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "autores/error.hpp"
#include "autores/fit.hpp"
#include "autores/format.hpp"

namespace autores::averaging {

namespace {

constexpr double kPi = std::numbers::pi;

// cos a - cos(a + 2 Psi)
double cos_gap(double a, double Psi) { return 2.0 * std::sin(a + Psi) * std::sin(Psi); }

}  // namespace

double p_integral(double sigma, double Psi, double delta, double nu) {
    // -delta/2 [cos(2 sigma + 2 Psi + nu) - cos(2 sigma + nu)] + [cos(sigma + Psi) - cos sigma]
    return 0.5 * delta * cos_gap(2.0 * sigma + nu, Psi) - 2.0 * std::sin(sigma + 0.5 * Psi) * std::sin(0.5 * Psi);
}

double h_minus1(double R, double Psi, const phase_model::PhaseRoot& root, const ModelParams& params) {
    return std::sqrt(params.lambda) * R * R + p_integral(root.sigma, Psi, params.delta(), params.nu);
}

CaseIIConstants case2_constants(const phase_model::PhaseRoot& root, const ModelParams& params) {
    if (root.multiplicity != 2 || !(root.derivative(2) < 0.0))
        throw Error(ErrorKind::InvalidArgument, "h_2^0 needs a double root with P'' < 0");
    CaseIIConstants c;
    c.p2 = root.derivative(2);
    c.phi = series::phi(params.lambda, c.p2);
    c.omega2 = std::sqrt(-c.phi * c.p2);
    c.omega0 = std::pow(4.0 * params.lambda, 0.25) * c.omega2;
    c.i_star = 2.0 * (c.omega2 * c.phi) * (c.omega2 * c.phi) / 3.0;
    return c;
}

double h2_0(double r, double p, const phase_model::PhaseRoot& root, const ModelParams& params) {
    const auto c = case2_constants(root, params);
    return std::sqrt(params.lambda) * r * r + c.omega2 * c.omega2 * p * p / 2.0 + c.p2 * p * p * p / 6.0;
}

std::string_view to_string(CriticalKind k) noexcept {
    switch (k) {
        case CriticalKind::Center: return "Center";
        case CriticalKind::Saddle: return "Saddle";
        case CriticalKind::Degenerate: return "Degenerate";
    }
    return "?";
}

std::vector<CriticalPoint> critical_points(const phase_model::PhaseRoot& root, const ModelParams& params) {
    std::vector<CriticalPoint> out;
    for (const auto& r : phase_model::find_roots(params.delta(), params.nu)) {
        CriticalPoint cp;
        cp.R = 0.0;
        cp.Psi = r.sigma - root.sigma;
        cp.multiplicity = r.multiplicity;
        if (r.multiplicity > 1)
            cp.kind = CriticalKind::Degenerate;
        else
            cp.kind = r.derivative(1) > 0.0 ? CriticalKind::Center : CriticalKind::Saddle;
        out.push_back(cp);
    }
    return out;
}

std::vector<LevelSample> level_grid(const phase_model::PhaseRoot& root, const ModelParams& params,
                                    std::pair<double, double> R_range, std::pair<double, double> Psi_range, int n_R,
                                    int n_Psi) {
    if (n_R < 2 || n_Psi < 2) throw Error(ErrorKind::InvalidArgument, "level grid needs at least 2 x 2 points");
    std::vector<LevelSample> out;
    out.reserve(static_cast<std::size_t>(n_R) * static_cast<std::size_t>(n_Psi));
    for (int i = 0; i < n_R; ++i) {
        const double R = R_range.first + (R_range.second - R_range.first) * i / (n_R - 1);
        for (int j = 0; j < n_Psi; ++j) {
            const double Psi = Psi_range.first + (Psi_range.second - Psi_range.first) * j / (n_Psi - 1);
            out.push_back({R, Psi, h_minus1(R, Psi, root, params)});
        }
    }
    return out;
}

void write_level_csv(std::ostream& os, const std::vector<LevelSample>& grid) {
    os << "R,Psi,h\n";
    for (const auto& s : grid) os << fmt17(s.R) << ',' << fmt17(s.Psi) << ',' << fmt17(s.h) << '\n';
}

SolverConfig tight_config() {
    SolverConfig cfg;
    cfg.rtol = 1e-12;
    cfg.atol = 1e-14;
    return cfg;
}

ActionAngleTable action_angle_table(const phase_model::PhaseRoot& root, const ModelParams& params,
                                    const std::vector<double>& levels, const SolverConfig& cfg) {
    cfg.validate();
    const auto c = case2_constants(root, params);
    const double sl = std::sqrt(params.lambda);
    const double w2 = c.omega2 * c.omega2;
    ActionAngleTable table;
    table.I_star = c.i_star;
    table.omega0 = c.omega0;
    const double t_cap = 1e3 * 2.0 * kPi / c.omega0;

    auto f = [&](double, const StateN<2>& s) -> StateN<2> {
        return {-(w2 * s[1] + 0.5 * c.p2 * s[1] * s[1]), 2.0 * sl * s[0]};
    };
    auto h = [&](const StateN<2>& s) { return sl * s[0] * s[0] + 0.5 * w2 * s[1] * s[1] + c.p2 * s[1] * s[1] * s[1] / 6.0; };

    double prev = 0.0;
    for (double I : levels) {
        if (!(I > prev)) throw Error(ErrorKind::InvalidArgument, "levels must be positive and strictly increasing");
        if (!(I < c.i_star))
            throw Error(ErrorKind::SeparatrixProximity, "level " + fmt17(I) + " is not below I_star = " + fmt17(c.i_star));
        prev = I;
        // left turning point p_- < 0 of h(0, p) = I, by Newton from the
        // quadratic estimate
        double p = -std::sqrt(2.0 * I / w2);
        for (int it = 0; it < 100; ++it) {
            const double g = 0.5 * w2 * p * p + c.p2 * p * p * p / 6.0 - I;
            const double dg = w2 * p + 0.5 * c.p2 * p * p;
            const double step = g / dg;
            p -= step;
            if (std::fabs(step) <= 1e-16 * std::fabs(p)) break;
        }
        const StateN<2> y0{0.0, p};

        // r leaves 0 upwards and returns through 0 from below after one period
        StateN<2> y = y0;
        double t_prev = 0.0;
        StateN<2> y_prev = y0;
        bool half = false, done = false, escaped = false;
        auto observe = [&](double t, const StateN<2>& s) {
            if (t == 0.0) return true;
            if (s[1] >= 2.0 * c.phi) {
                escaped = true;
                return false;
            }
            if (!half && s[0] < 0.0) half = true;
            if (half && s[0] >= 0.0) {
                done = true;
                return false;
            }
            t_prev = t;
            y_prev = s;
            return true;
        };
        dopri5_integrate<2>(f, 0.0, y, t_cap, cfg, observe);
        if (escaped)
            throw Error(ErrorKind::SeparatrixProximity, "orbit at I = " + fmt17(I) + " crossed the saddle (I_star = " +
                                                            fmt17(c.i_star) + ")");
        if (!done)
            throw Error(ErrorKind::SeparatrixProximity,
                        "period at I = " + fmt17(I) + " exceeds 1e3 small-oscillation periods (I_star = " +
                            fmt17(c.i_star) + ")");
        // Newton on r(t_prev + dt) = 0 with single steps from the last state
        double dt = -y_prev[0] / f(t_prev, y_prev)[0];
        StateN<2> y_end = y_prev;
        for (int it = 0; it < 20; ++it) {
            const auto st = dopri5_step<2>(f, t_prev, y_prev, f(t_prev, y_prev), dt);
            y_end = st.y;
            const double corr = st.y[0] / st.k7[0];
            dt -= corr;
            if (std::fabs(corr) <= 1e-15 * (t_prev + dt)) {
                y_end = dopri5_step<2>(f, t_prev, y_prev, f(t_prev, y_prev), dt).y;
                break;
            }
        }
        ActionAngleRow row;
        row.I = I;
        row.T = t_prev + dt;
        row.omega = 2.0 * kPi / row.T;
        row.closure = std::hypot(y_end[0] - y0[0], y_end[1] - y0[1]);
        row.energy_drift = std::fabs(h(y_end) - I) / I;
        table.rows.push_back(row);
    }
    return table;
}

ActionAngleTable action_angle_table(const phase_model::PhaseRoot& root, const ModelParams& params, int n_levels,
                                    const SolverConfig& cfg) {
    if (n_levels < 1) throw Error(ErrorKind::InvalidArgument, "n_levels must be positive");
    const double i_star = case2_constants(root, params).i_star;
    std::vector<double> levels;
    for (int k = 1; k <= n_levels; ++k) levels.push_back(i_star * k / (n_levels + 1));
    return action_angle_table(root, params, levels, cfg);
}

void write_action_angle_csv(std::ostream& os, const ActionAngleTable& table) {
    os << "I,T,omega\n";
    for (const auto& r : table.rows) os << fmt17(r.I) << ',' << fmt17(r.T) << ',' << fmt17(r.omega) << '\n';
}

double action_of_state(double r, double p, const phase_model::PhaseRoot& root, const ModelParams& params) {
    const auto c = case2_constants(root, params);
    const double I = h2_0(r, p, root, params);
    if (!(p < 2.0 * c.phi && I < c.i_star))
        throw Error(ErrorKind::OutOfDomain, "state lies outside the separatrix (h = " + fmt17(I) + ")");
    return I;
}

EnvelopeFit envelope_fit_signal(const std::vector<double>& tau, const std::vector<double>& d,
                                const EnvelopeOptions& opts) {
    if (tau.size() != d.size()) throw Error(ErrorKind::InvalidArgument, "tau and signal differ in length");
    if (tau.size() < 3) throw Error(ErrorKind::InsufficientOscillations, "fewer than 3 samples");
    const double lo = std::isnan(opts.tau_min) ? 3.0 * tau.front() : opts.tau_min;
    const double hi = opts.tau_max;

    std::vector<double> te, de;
    for (std::size_t i = 1; i + 1 < tau.size(); ++i) {
        const double a = d[i - 1], b = d[i], c = d[i + 1];
        const bool peak = (b > a && b >= c) || (b < a && b <= c);
        if (!peak) continue;
        // parabola through the three samples
        const double t0 = tau[i - 1], t1 = tau[i], t2 = tau[i + 1];
        const double d01 = (b - a) / (t1 - t0), d12 = (c - b) / (t2 - t1);
        const double curv = (d12 - d01) / (t2 - t0);
        double tv = t1, dv = b;
        if (curv != 0.0) {
            const double slope1 = d01 + curv * (t1 - t0);  // derivative at t1
            const double shift = std::clamp(-slope1 / (2.0 * curv), t0 - t1, t2 - t1);
            tv = t1 + shift;
            dv = b + slope1 * shift + curv * shift * shift;
        }
        if (tv < lo || tv > hi) continue;
        te.push_back(tv);
        de.push_back(dv);
    }
    if (te.size() < 10)
        throw Error(ErrorKind::InsufficientOscillations,
                    std::to_string(te.size()) + " extrema in [" + fmt17(lo) + ", " + fmt17(hi) + "]");

    // amplitude: mean half-swing to the neighbouring extrema
    std::vector<double> lt, la;
    for (std::size_t k = 1; k + 1 < te.size(); ++k) {
        const double amp = 0.25 * (std::fabs(de[k] - de[k - 1]) + std::fabs(de[k] - de[k + 1]));
        if (!(amp > 0.0)) continue;
        lt.push_back(std::log(te[k]));
        la.push_back(std::log(amp));
    }
    const LineFit amp = fit_line(lt, la);

    // local frequency pi / spacing at the midpoints
    std::vector<double> lm, lf;
    for (std::size_t k = 0; k + 1 < te.size(); ++k) {
        lm.push_back(std::log(0.5 * (te[k] + te[k + 1])));
        lf.push_back(std::log(kPi / (te[k + 1] - te[k])));
    }
    const LineFit freq = fit_line(lm, lf);
    const double e = freq.slope + 1.0;
    // phases k pi against tau^e
    std::vector<double> xe, th;
    for (std::size_t k = 0; k < te.size(); ++k) {
        xe.push_back(std::pow(te[k], e));
        th.push_back(kPi * static_cast<double>(k));
    }
    const LineFit ph = fit_line(xe, th);

    EnvelopeFit out;
    out.amp_exponent = amp.slope;
    out.amp_coeff = std::exp(amp.intercept);
    out.phase_exponent = e;
    out.phase_coeff = ph.slope;
    out.residual_rms = amp.residual_rms;
    out.n_extrema = static_cast<int>(te.size());
    out.tau_min = te.front();
    out.tau_max = te.back();
    return out;
}

EnvelopeFit envelope_fit(const integrator::Trajectory& traj, const series::AsymptoticSolution& sol,
                         const ModelParams& params, const EnvelopeOptions& opts) {
    params.validate();
    std::vector<double> tau, d;
    tau.reserve(traj.samples.size());
    d.reserve(traj.samples.size());
    for (const auto& s : traj.samples) {
        if (s.tau < 1.0) continue;
        tau.push_back(s.tau);
        d.push_back(s.rho - sol.rho_series.eval(s.tau));
    }
    return envelope_fit_signal(tau, d, opts);
}

}  // namespace autores::averaging
