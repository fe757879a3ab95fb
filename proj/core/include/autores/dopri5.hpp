#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "autores/error.hpp"

namespace autores {

struct SolverConfig {
    double rtol = 1e-9;
    double atol = 1e-11;
    double h_init = 1e-3;
    double h_max = std::numeric_limits<double>::infinity();
    double guard_rho_min = 1e-6;

    // Throws InvalidArgument unless rtol, atol in (0, 1e-2] and the step and
    // guard values are positive.
    void validate() const;
};

inline constexpr double kMinStep = 1e-12;

struct SolverStats {
    long steps = 0;
    long rejected_steps = 0;
    double max_error_estimate = 0.0;  // largest accepted scaled error (<= 1)
};

template <std::size_t N>
using StateN = std::array<double, N>;

template <std::size_t N>
struct Dopri5Step {
    StateN<N> y;    // fifth-order solution
    StateN<N> err;  // difference to the embedded fourth-order solution
    StateN<N> k7;   // f(t + h, y), reusable as the next k1
};

// One Dormand-Prince 5(4) step from (t, y) with derivative k1 = f(t, y).
template <std::size_t N, class F>
Dopri5Step<N> dopri5_step(F&& f, double t, const StateN<N>& y, const StateN<N>& k1, double h) {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;

    StateN<N> tmp, k2, k3, k4, k5, k6;
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    k2 = f(t + c2 * h, tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    k3 = f(t + c3 * h, tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    k4 = f(t + c4 * h, tmp);
    for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    k5 = f(t + c5 * h, tmp);
    for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    k6 = f(t + h, tmp);

    Dopri5Step<N> out;
    for (std::size_t i = 0; i < N; ++i)
        out.y[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    out.k7 = f(t + h, out.y);
    for (std::size_t i = 0; i < N; ++i)
        out.err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * out.k7[i]);
    return out;
}

// Adaptive integration of y' = f(t, y) from t0 to t_end (t_end > t0).
// observe(t, y) is called at t0 and after every accepted step and returns
// false to stop early. max_step(t, y) bounds the next step on top of
// cfg.h_max. Returns the solver statistics; the final state is left in y.
template <std::size_t N, class F, class Observe, class MaxStep>
SolverStats dopri5_integrate(F&& f, double t0, StateN<N>& y, double t_end, const SolverConfig& cfg,
                             Observe&& observe, MaxStep&& max_step) {
    cfg.validate();
    if (!(t_end > t0)) throw Error(ErrorKind::InvalidArgument, "integration end must exceed the start");
    SolverStats stats;
    double t = t0;
    double h = std::min(cfg.h_init, t_end - t0);
    StateN<N> k1 = f(t, y);
    if (!observe(t, y)) return stats;
    while (t < t_end) {
        h = std::min({h, cfg.h_max, max_step(t, y)});
        bool last = false;
        if (t + h >= t_end || t_end - (t + h) < 1e-12 * std::fabs(t_end)) {
            h = t_end - t;
            last = true;
        }
        if (h < kMinStep || t + h == t)
            throw Error(ErrorKind::StepUnderflow, "step size " + std::to_string(h) + " at t = " + std::to_string(t));
        Dopri5Step<N> step;
        try {
            step = dopri5_step<N>(f, t, y, k1, h);
        } catch (const Error& e) {
            // A trial stage may overshoot into the guarded region; only a
            // persistent violation at tiny steps is reported.
            if (e.kind() != ErrorKind::AmplitudeUnderflow || h <= 1e-8) throw;
            ++stats.rejected_steps;
            h *= 0.2;
            continue;
        }
        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double scale = cfg.atol + cfg.rtol * std::max(std::fabs(y[i]), std::fabs(step.y[i]));
            err = std::max(err, std::fabs(step.err[i]) / scale);
        }
        if (!std::isfinite(err)) {
            ++stats.rejected_steps;
            h *= 0.2;
            continue;
        }
        if (err <= 1.0) {
            t = last ? t_end : t + h;
            y = step.y;
            k1 = step.k7;
            ++stats.steps;
            stats.max_error_estimate = std::max(stats.max_error_estimate, err);
            if (!observe(t, y)) return stats;
            const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
            h *= fac;
        } else {
            ++stats.rejected_steps;
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
        }
    }
    return stats;
}

template <std::size_t N, class F, class Observe>
SolverStats dopri5_integrate(F&& f, double t0, StateN<N>& y, double t_end, const SolverConfig& cfg,
                             Observe&& observe) {
    return dopri5_integrate<N>(std::forward<F>(f), t0, y, t_end, cfg, std::forward<Observe>(observe),
                               [](double, const StateN<N>&) { return std::numeric_limits<double>::infinity(); });
}

}  // namespace autores
