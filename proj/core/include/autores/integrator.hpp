#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "autores/dopri5.hpp"
#include "autores/model_params.hpp"
#include "autores/parallel.hpp"
#include "autores/puiseux.hpp"
#include "autores/solution.hpp"

namespace autores::integrator {

inline constexpr double kDefaultCaptureTol = 0.1;
inline constexpr double kDefaultWindingCap = 1.0;
inline constexpr int kSamplesPerPeriod = 32;

struct Sample {
    double tau = 0.0;
    double rho = 0.0;
    double psi = 0.0;  // unwrapped
};

struct Trajectory {
    std::vector<Sample> samples;
    SolverStats solver_stats;
};

struct InitialCondition {
    double tau0 = 0.0;
    double rho0 = 1.0;
    double psi0 = 0.0;
};

// Right-hand side of the model system solved for the derivatives. Throws
// AmplitudeUnderflow when rho <= guard_rho_min.
std::pair<double, double> rhs_ms(double tau, double rho, double psi, const ModelParams& params,
                                 double guard_rho_min = SolverConfig{}.guard_rho_min);

// Every accepted step is recorded; steps are capped at 2 pi / (32 omega_loc)
// with omega_loc = max(|psi'|, sqrt(2 rho)).
Trajectory integrate(const ModelParams& params, const InitialCondition& ic, double tau_end,
                     const SolverConfig& cfg = {});

// Step-by-step variant without storage; observe returns false to stop.
SolverStats integrate_observed(const ModelParams& params, const InitialCondition& ic, double tau_end,
                               const SolverConfig& cfg,
                               const std::function<bool(double tau, double rho, double psi)>& observe);

// Deviation (x, y) = (rho - rho*, psi - psi*) from a series solution,
//   x' = f1(rho* + x, psi* + y) - f1(rho*, psi*) - E1(tau)
//   y' = f2(rho* + x, psi* + y) - f2(rho*, psi*) - E2(tau) / rho*(tau)
// with the differences expanded so that small deviations keep full relative
// precision, and (E1, E2) the truncation residual of the series.
class DeviationSystem {
public:
    DeviationSystem(const ModelParams& params, const series::AsymptoticSolution& sol,
                    double guard_rho_min = SolverConfig{}.guard_rho_min);

    StateN<2> operator()(double tau, const StateN<2>& xy) const;

    const series::AsymptoticSolution& solution() const { return sol_; }
    const ModelParams& params() const { return params_; }

private:
    ModelParams params_;
    series::AsymptoticSolution sol_;
    PuiseuxSeries e1_, e2_;  // residual tails from their start exponents
    double guard_;
};

SolverStats integrate_deviation(const DeviationSystem& sys, double tau0, StateN<2>& xy, double tau_end,
                                const SolverConfig& cfg,
                                const std::function<bool(double tau, const StateN<2>& xy)>& observe);

enum class Verdict { Captured, NotCaptured, Undecided };

std::string_view to_string(Verdict v) noexcept;

struct CaptureVerdict {
    Verdict verdict = Verdict::Undecided;
    double rho_ratio_end = 0.0;  // rho / sqrt(lambda tau) at the horizon
    double psi_winding = 0.0;    // max - min of psi over the trailing half of the horizon
};

CaptureVerdict classify_capture(const Trajectory& traj, const ModelParams& params,
                                double capture_tol = kDefaultCaptureTol, double winding_cap = kDefaultWindingCap);

struct CaptureCell {
    double rho0 = 0.0;
    double psi0 = 0.0;
    CaptureVerdict verdict;
    std::optional<std::string> error;
};

struct CaptureGrid {
    std::vector<double> rho0;
    std::vector<double> psi0;
    double tau0 = 0.0;
};

// Row-major over (rho0, psi0).
std::vector<CaptureCell> capture_map(const ModelParams& params, const CaptureGrid& grid, double horizon,
                                     const SolverConfig& cfg = {}, const ParallelFor& pfor = sequential_for(),
                                     double capture_tol = kDefaultCaptureTol,
                                     double winding_cap = kDefaultWindingCap);

struct OscillatorSample {
    double t = 0.0;
    double x = 0.0;
    double v = 0.0;
    double energy = 0.0;
    double phase = 0.0;  // unwrapped -arctan(v / x)
};

struct OscillatorTrajectory {
    std::vector<OscillatorSample> samples;
    SolverStats solver_stats;
};

// x'' + (1 + eps beta(t) cos 2 zeta(t)) (x - eps x^3) = eps cos zeta(t),
// beta = (1 + eps t)^(-1/2), zeta = t - vartheta t^2.
// Samples every `sample_dt` of t (and at t_end).
OscillatorTrajectory integrate_oscillator(double epsilon, double vartheta, std::pair<double, double> ic,
                                          double t_end, const SolverConfig& cfg = {}, double sample_dt = 0.05);

// Slow parameters of the averaged oscillator: kappa = (4/3)^(1/3),
// lambda = 8 vartheta kappa^2 / eps^2, mu(tau) = (sqrt(2 kappa)/4) (1/(2 kappa) + tau)^(-1/2), nu = 0,
// tau = eps t / (2 kappa).
double oscillator_kappa();
ModelParams oscillator_params(double epsilon, double vartheta);
double oscillator_vartheta(double epsilon, double lambda);

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_capture_csv(std::ostream& os, const std::vector<CaptureCell>& cells);
void write_oscillator_csv(std::ostream& os, const OscillatorTrajectory& traj);

}  // namespace autores::integrator
