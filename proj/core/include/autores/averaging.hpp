#pragma once

#include <iosfwd>
#include <limits>
#include <string_view>
#include <vector>

#include "autores/dopri5.hpp"
#include "autores/integrator.hpp"
#include "autores/model_params.hpp"
#include "autores/phase_model.hpp"
#include "autores/solution.hpp"

namespace autores::averaging {

// h_{-1}(R, Psi) = sqrt(lambda) R^2 + int_0^Psi P(sigma + zeta) dzeta
double h_minus1(double R, double Psi, const phase_model::PhaseRoot& root, const ModelParams& params);

// int_0^Psi P(sigma + zeta) dzeta in closed form
double p_integral(double sigma, double Psi, double delta, double nu);

// h_2^0(r, p) = sqrt(lambda) r^2 + omega_2^2 p^2 / 2 + P'' p^3 / 6, omega_2^2 = -phi P''.
// Needs a double root with P'' < 0.
double h2_0(double r, double p, const phase_model::PhaseRoot& root, const ModelParams& params);

struct CaseIIConstants {
    double phi = 0.0;
    double omega2 = 0.0;  // sqrt(-phi P'')
    double p2 = 0.0;      // P''(sigma)
    double omega0 = 0.0;  // (4 lambda)^(1/4) omega_2
    double i_star = 0.0;  // 2 (omega_2 phi)^2 / 3
};
CaseIIConstants case2_constants(const phase_model::PhaseRoot& root, const ModelParams& params);

enum class CriticalKind { Center, Saddle, Degenerate };

std::string_view to_string(CriticalKind k) noexcept;

struct CriticalPoint {
    double R = 0.0;
    double Psi = 0.0;  // sigma + Psi is a root of P, Psi in [-sigma, 2 pi - sigma)
    CriticalKind kind = CriticalKind::Center;
    int multiplicity = 1;
};

// Critical points of h_{-1} for the root's (delta, nu). Center when
// P'(sigma + Psi) > 0, Saddle when < 0, Degenerate at multiple roots.
std::vector<CriticalPoint> critical_points(const phase_model::PhaseRoot& root, const ModelParams& params);

struct LevelSample {
    double R = 0.0;
    double Psi = 0.0;
    double h = 0.0;
};

// h_{-1} on an n_R x n_Psi grid (R-major), endpoints included.
std::vector<LevelSample> level_grid(const phase_model::PhaseRoot& root, const ModelParams& params,
                                    std::pair<double, double> R_range, std::pair<double, double> Psi_range, int n_R,
                                    int n_Psi);
void write_level_csv(std::ostream& os, const std::vector<LevelSample>& grid);

// rtol 1e-12, atol 1e-14
SolverConfig tight_config();

struct ActionAngleRow {
    double I = 0.0;
    double T = 0.0;
    double omega = 0.0;
    double closure = 0.0;       // |state(T) - state(0)|
    double energy_drift = 0.0;  // |h(T) - I| / I
};

struct ActionAngleTable {
    std::vector<ActionAngleRow> rows;
    double I_star = 0.0;
    double omega0 = 0.0;
};

// Periods of the closed h_2^0 orbits at the given levels (0 < I < I_star),
// integrated in the Hamiltonian time of dr/da = -dh/dp, dp/da = dh/dr.
// Throws SeparatrixProximity for levels at or above I_star, orbits that cross
// the saddle, or periods beyond 1e3 * 2 pi / omega0.
ActionAngleTable action_angle_table(const phase_model::PhaseRoot& root, const ModelParams& params,
                                    const std::vector<double>& levels, const SolverConfig& cfg = tight_config());
// n_levels equally spaced levels I_star k / (n_levels + 1).
ActionAngleTable action_angle_table(const phase_model::PhaseRoot& root, const ModelParams& params, int n_levels,
                                    const SolverConfig& cfg = tight_config());

void write_action_angle_csv(std::ostream& os, const ActionAngleTable& table);

// The h_2^0 level through (r, p). Throws OutOfDomain outside the region
// bounded by the separatrix.
double action_of_state(double r, double p, const phase_model::PhaseRoot& root, const ModelParams& params);

struct EnvelopeFit {
    double amp_exponent = 0.0;
    double amp_coeff = 0.0;
    double phase_exponent = 0.0;
    double phase_coeff = 0.0;
    double residual_rms = 0.0;  // of log amplitude
    int n_extrema = 0;
    double tau_min = 0.0;
    double tau_max = 0.0;
};

struct EnvelopeOptions {
    // Window; NaN tau_min means 3 x the first sample time.
    double tau_min = std::numeric_limits<double>::quiet_NaN();
    double tau_max = std::numeric_limits<double>::infinity();
};

// Fits |d| at the extrema of d(tau) to a tau^b and the extremum phases k pi
// to c tau^e + const. Extrema are refined by parabolas through three samples.
// Throws InsufficientOscillations below 10 extrema in the window.
EnvelopeFit envelope_fit_signal(const std::vector<double>& tau, const std::vector<double>& d,
                                const EnvelopeOptions& opts = {});

// Same on d = rho - rho*(tau) along a trajectory.
EnvelopeFit envelope_fit(const integrator::Trajectory& traj, const series::AsymptoticSolution& sol,
                         const ModelParams& params, const EnvelopeOptions& opts = {});

}  // namespace autores::averaging
