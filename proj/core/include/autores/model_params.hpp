#pragma once

#include <variant>
#include <vector>

namespace autores {

// mu(tau) = tau^{-1/2} (mu0 + sum_k mu_k tau^{-k}); singular at tau = 0.
struct AsymptoticSeries {
    std::vector<double> mu_coeffs;
};

// mu(tau) = mu0 (shift + tau)^{-1/2}; integrator-only profile.
struct Regularized {
    double mu0 = 0.0;
    double shift = 1.0;
};

using MuProfile = std::variant<AsymptoticSeries, Regularized>;

struct ModelParams {
    double lambda = 1.0;
    double nu = 0.0;
    MuProfile mu = AsymptoticSeries{{0.0}};

    static ModelParams asymptotic(double lambda, double nu, std::vector<double> mu_coeffs);
    static ModelParams regularized(double lambda, double nu, double mu0, double shift);

    // Leading pump amplitude mu0 of either profile.
    double mu0() const;
    // delta = mu0 sqrt(lambda); never stored.
    double delta() const;
    double mu_at(double tau) const;
    bool is_asymptotic() const { return std::holds_alternative<AsymptoticSeries>(mu); }

    // Throws InvalidArgument on lambda <= 0, nu outside [0, pi), an empty
    // coefficient list, or a non-positive shift.
    void validate() const;
};

// Parameters realising a given (delta, nu) with a pure tau^{-1/2} pump.
ModelParams params_for_delta(double lambda, double nu, double delta);

}  // namespace autores
