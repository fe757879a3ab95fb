#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "autores/dopri5.hpp"
#include "autores/model_params.hpp"
#include "autores/parallel.hpp"
#include "autores/solution.hpp"

namespace autores::stability {

inline constexpr double kDefaultKappa = 0.5;
inline constexpr double kDefaultDStar = 0.3;
inline constexpr double kDefaultTau0 = 100.0;

// l = (1 - kappa) / (1 + kappa)
double l_kappa(double kappa);

struct LinearizationSample {
    double tau = 0.0;
    std::array<std::array<double, 2>, 2> matrix{};  // d(rho', psi') / d(rho, psi)
    std::complex<double> z_plus, z_minus;
};

// Jacobian of the model system at the series solution, eigenvalues from the
// characteristic quadratic. Needs tau >= 1.
LinearizationSample linearization(const ModelParams& params, const series::AsymptoticSolution& sol, double tau);

// Leading |z+-(tau)| by case: (4 lambda tau)^(1/4) |P'|^(1/2),
// (4 lambda)^(1/4) tau^(1/8) |psi_1 P''|^(1/2), lambda^(1/4) tau^(1/12) |psi_1^2 P'''|^(1/2).
double leading_eigenvalue_magnitude(const ModelParams& params, const series::AsymptoticSolution& sol, double tau);

// H(R, Psi, tau) and F(R, Psi, tau) of the shifted system
//   rho = rho* + tau^(-1/4) R, psi = psi* + Psi,
//   R' = -dH/dPsi, Psi' = dH/dR + F.
// Throws AmplitudeUnderflow when rho* + tau^(-1/4) R <= guard.
double hamiltonian_h(const ModelParams& params, const series::AsymptoticSolution& sol, double R, double Psi,
                     double tau);
double forcing_f(const ModelParams& params, const series::AsymptoticSolution& sol, double R, double Psi, double tau,
                 double guard_rho_min = SolverConfig{}.guard_rho_min);

struct HamiltonianGrad {
    double dR = 0.0;
    double dPsi = 0.0;
};
HamiltonianGrad hamiltonian_grad(const ModelParams& params, const series::AsymptoticSolution& sol, double R,
                                 double Psi, double tau);

enum class LyapunovKind { V1, U2, U3, V2, V3 };

std::string_view to_string(LyapunovKind k) noexcept;

// Construction matching the root (V1 for simple, U2 for double, U3 for triple).
LyapunovKind instability_kind(const series::AsymptoticSolution& sol);
// V2 / V3 for double / triple roots.
LyapunovKind partial_kind(const series::AsymptoticSolution& sol);

// Frozen frequency squared of the construction: P', psi_1 P'', psi_1^2 P'''/2
// (= omega_1^2, -phi P'', chi^2 P'''/2 on the stable branches).
double omega_squared(const series::AsymptoticSolution& sol);

// Rate the construction guarantees at kappa: V1 l/8 (decay of w1 in tau),
// U2 l/6 and U3 3l/26 (growth of w in s), V2 3l/16 and V3 5l/24 (decay of W in tau).
double theory_rate(LyapunovKind k, double kappa = kDefaultKappa);

// Scaled coordinates (a, b) and time of each construction:
//   V1: (R, Psi, tau)        R = tau^(1/4) x, Psi = y
//   U2: (r, p, s)            x = tau^(-5/8) r, y = tau^(-1/4) p, s = (8/9) tau^(9/8)
//   U3: (r, p, s)            x = tau^(-7/12) r, y = tau^(-1/6) p, s = (12/13) tau^(13/12)
//   V2: (varrho, varphi, tau) x = tau^(-1/4) varrho, y = tau^(-1/4) varphi
//   V3: (varrho, varphi, tau) x = tau^(-1/4) varrho, y = tau^(-1/6) varphi
// with (x, y) = (rho - rho*, psi - psi*).
struct ScaledState {
    double a = 0.0;
    double b = 0.0;
    double time = 0.0;
};
ScaledState to_scaled(LyapunovKind k, double x, double y, double tau);
std::pair<double, double> from_scaled(LyapunovKind k, double a, double b, double tau);

struct LyapunovValue {
    double value = 0.0;
    double norm_w = 0.0;  // w1 / w2 / w3 / W2 / W3
    double time = 0.0;    // tau or s
    double d = 0.0;       // Euclidean norm in the scaled coordinates
};

// Evaluates the construction at the deviation (x, y) from the series solution.
// Throws OutOfDomain when d > d_star; InvalidArgument when the kind does not
// match the root multiplicity.
LyapunovValue lyapunov_eval_deviation(LyapunovKind k, const ModelParams& params,
                                      const series::AsymptoticSolution& sol, double x, double y, double tau,
                                      double d_star = kDefaultDStar);
double lyapunov_eval(LyapunovKind k, const ModelParams& params, const series::AsymptoticSolution& sol, double rho,
                     double psi, double tau, double d_star = kDefaultDStar);

struct TraceSample {
    double time = 0.0;
    double value = 0.0;
    double norm_w = 0.0;
};

struct TraceOptions {
    double d_star = kDefaultDStar;
    // Stop once norm_w exceeds this.
    double escape_norm = std::numeric_limits<double>::infinity();
    // Stop once |rho - rho*| reaches this (also counted as escape).
    double x_bound = std::numeric_limits<double>::infinity();
    // Samples are kept when log(time) advanced by at least this much.
    double log_stride = 1e-3;
};

struct LyapunovTrace {
    LyapunovKind which = LyapunovKind::V1;
    std::vector<TraceSample> samples;
    // Least-squares slope of log norm_w against log time over the kept samples.
    double fitted_exponent = 0.0;
    // Fraction of accepted steps where the value moved in the direction of the
    // construction (down for V*, up for U*).
    double monotone_fraction = 0.0;
    bool escaped = false;
    bool left_domain = false;
    double tau_end = 0.0;
    double max_abs_x = 0.0;  // max |rho - rho*|
    double max_abs_a = 0.0;  // max |first scaled coordinate|
    SolverStats solver_stats;
};

// Integrates the deviation from (x0, y0) at tau0 and evaluates the construction
// at every accepted step. Stops at tau_end, on escape, or on leaving d_star.
LyapunovTrace lyapunov_trace(LyapunovKind k, const ModelParams& params, const series::AsymptoticSolution& sol,
                             double x0, double y0, double tau0, double tau_end, const SolverConfig& cfg = {},
                             const TraceOptions& opts = {});

enum class Verdict { AsymptoticallyStable, Unstable, PartiallyRhoStable };

std::string_view to_string(Verdict v) noexcept;

enum class StabilityMode {
    Lyapunov,    // V1 decay, U2/U3 growth, escape for the other classes
    PartialRho,  // bounded |rho - rho*| with V2/V3 scaling
};

struct StabilityOptions {
    StabilityMode mode = StabilityMode::Lyapunov;
    double tau0 = kDefaultTau0;
    double kappa = kDefaultKappa;
    double d_star = kDefaultDStar;
    // Lyapunov mode: norm at which a growing sample counts as escaped.
    double escape_norm = 0.1;
    // PartialRho mode: amplitude bound.
    double epsilon = 0.05;
    int n_orders = series::kDefaultOrders;
    std::uint64_t seed = 1;
    // Repeat the measurement from 4 tau0 (horizon scaled alike).
    bool sensitivity_rerun = true;
};

struct StabilityReport {
    phase_model::PhaseRoot root;
    int branch = +1;
    std::optional<LyapunovKind> kind;
    StabilityMode mode = StabilityMode::Lyapunov;
    Verdict verdict = Verdict::Unstable;
    // Worst sample: smallest decay (V*) or growth (U*) exponent of norm_w.
    double measured_rate = 0.0;
    double theory_rate = 0.0;
    double horizon = 0.0;
    double tau0 = 0.0;
    int n_samples = 0;
    int n_escaped = 0;
    int n_failed = 0;
    double min_monotone_fraction = 1.0;
    double max_rho_deviation = 0.0;
    std::vector<double> sample_rates;
    std::vector<std::string> errors;
    double d_star = kDefaultDStar;
    double kappa = kDefaultKappa;
    double radius = 0.0;
    // Rerun from 4 tau0; NaN when not requested.
    double sensitivity_tau0 = std::numeric_limits<double>::quiet_NaN();
    double sensitivity_rate = std::numeric_limits<double>::quiet_NaN();
    std::optional<Verdict> sensitivity_verdict;
};

// Initial states sit on the w-ellipse of the construction at `radius`
// (PartialRho: on the circle varrho^2 + varphi^2 = radius^2) with seeded
// random angles. Per-sample failures are recorded in `errors`.
StabilityReport measure_stability(const ModelParams& params, const phase_model::PhaseRoot& root, int branch,
                                  double radius, int n_samples, double horizon, const SolverConfig& cfg = {},
                                  const StabilityOptions& opts = {}, const ParallelFor& pfor = sequential_for());

// Partial rho-stability starting radius delta_eps = tau0^(-e) eps sqrt(l m_- / (2 m_+)),
// e = 3/8 (double root) or 1/3 (triple root), m_-+ = min/max(sqrt(lambda), omega^2/2).
double partial_rho_radius(const ModelParams& params, const series::AsymptoticSolution& sol, double epsilon,
                          double tau0, double kappa = kDefaultKappa);
// tau0 eps^(-8/3) (double root) or tau0 eps^(-3) (triple root).
double partial_rho_horizon(const series::AsymptoticSolution& sol, double epsilon, double tau0);

// {sigma, multiplicity, verdict, measured_rate, theory_rate, n_samples, horizon, ...}
std::string to_json(const StabilityReport& r);
void write_trace_csv(std::ostream& os, const LyapunovTrace& trace);

}  // namespace autores::stability
