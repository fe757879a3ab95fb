#pragma once

#include <optional>
#include <string>
#include <utility>

#include "autores/model_params.hpp"
#include "autores/phase_model.hpp"
#include "autores/puiseux.hpp"

// Particular autoresonant solutions rho*(tau), psi*(tau) as truncated series.
namespace autores::series {

inline constexpr int kDefaultOrders = 6;

enum class CaseTag { I = 1, II = 2, III = 3 };

std::string_view to_string(CaseTag c) noexcept;

struct SeriesConstants {
    std::optional<double> theta;
    std::optional<double> phi;
    std::optional<double> chi;
};

struct AsymptoticSolution {
    CaseTag case_tag = CaseTag::I;
    int branch = +1;
    phase_model::PhaseRoot root;
    // rho = sqrt(lambda) z^(-q/2) + sum_{k>=0} rho_k z^k, z = tau^(-1/q)
    PuiseuxSeries rho_series;
    // psi = sigma + sum_{k>=1} psi_k z^k
    PuiseuxSeries psi_series;
    SeriesConstants constants;
    int n_orders = 0;
    // First omitted coefficients rho_{n+q+1} and psi_{n+1}.
    double next_rho = 0.0;
    double next_psi = 0.0;

    int q() const { return rho_series.q; }
    int multiplicity() const { return static_cast<int>(case_tag); }
    // rho_k (k >= -1) and psi_k (k >= 0) in the z-grid indexing above.
    double rho_coeff(int k) const;
    double psi_coeff(int k) const;
};

// Closed-form leading phase corrections.
double theta(double lambda, double p1);
double phi(double lambda, double p2);
double chi(double lambda, double p3);

// Solves the coefficients order by order: rho_k from the second equation
// (pivot -2 lambda), psi_k from the first (pivot P^(m) psi_1^(m-1)/(m-1)!),
// psi_1 from the nonlinear leading balance. n_orders psi coefficients are
// produced; rho is carried q orders further so both residuals start past them.
AsymptoticSolution build_solution(const ModelParams& params, const phase_model::PhaseRoot& root, int branch = +1,
                                  int n_orders = kDefaultOrders);

// Residual series (E1, E2) of the truncated solution in
//   E1 = rho' + mu rho sin(2 psi + nu) - sin psi
//   E2 = rho psi' - rho (rho^2 - lambda tau) + mu rho cos(2 psi + nu) - cos psi
// (the second equation multiplied through by rho). `extra` terms beyond the
// first nonvanishing exponent are kept.
std::pair<PuiseuxSeries, PuiseuxSeries> residual(const AsymptoticSolution& sol, const ModelParams& params,
                                                 int extra = -1);

// Exponents (in z) where the residual of a solution with these orders starts.
int residual_start_e1(const AsymptoticSolution& sol);
int residual_start_e2(const AsymptoticSolution& sol);

struct SolutionValue {
    double rho = 0.0;
    double psi = 0.0;
    bool extrapolated = false;  // tau < 1
};

SolutionValue eval_solution(const AsymptoticSolution& sol, double tau);
// (rho*', psi*') by term-wise differentiation.
std::pair<double, double> eval_solution_derivative(const AsymptoticSolution& sol, double tau);

struct TruncationEstimate {
    double rho = 0.0;
    double psi = 0.0;
};

// Magnitudes of the first omitted terms of rho and psi at tau.
TruncationEstimate truncation_estimate(const AsymptoticSolution& sol, double tau);

// {case, branch, sigma, q, rho_offset, rho_coeffs, psi_coeffs, constants}
std::string to_json(const AsymptoticSolution& sol);

}  // namespace autores::series
