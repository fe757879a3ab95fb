#include "autores/model_params.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "autores/error.hpp"

namespace autores {

ModelParams ModelParams::asymptotic(double lambda, double nu, std::vector<double> mu_coeffs) {
    ModelParams p{lambda, nu, AsymptoticSeries{std::move(mu_coeffs)}};
    p.validate();
    return p;
}

ModelParams ModelParams::regularized(double lambda, double nu, double mu0, double shift) {
    ModelParams p{lambda, nu, Regularized{mu0, shift}};
    p.validate();
    return p;
}

double ModelParams::mu0() const {
    if (const auto* s = std::get_if<AsymptoticSeries>(&mu)) return s->mu_coeffs.empty() ? 0.0 : s->mu_coeffs.front();
    return std::get<Regularized>(mu).mu0;
}

double ModelParams::delta() const { return mu0() * std::sqrt(lambda); }

double ModelParams::mu_at(double tau) const {
    if (const auto* s = std::get_if<AsymptoticSeries>(&mu)) {
        const double inv = 1.0 / tau;
        double acc = 0.0;
        for (auto it = s->mu_coeffs.rbegin(); it != s->mu_coeffs.rend(); ++it) acc = acc * inv + *it;
        return acc / std::sqrt(tau);
    }
    const auto& r = std::get<Regularized>(mu);
    return r.mu0 / std::sqrt(r.shift + tau);
}

void ModelParams::validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw Error(ErrorKind::InvalidArgument, "lambda must be positive, got " + std::to_string(lambda));
    if (!(nu >= 0.0 && nu < std::numbers::pi))
        throw Error(ErrorKind::InvalidArgument, "nu must lie in [0, pi), got " + std::to_string(nu));
    if (const auto* s = std::get_if<AsymptoticSeries>(&mu)) {
        if (s->mu_coeffs.empty())
            throw Error(ErrorKind::InvalidArgument, "asymptotic mu profile needs at least one coefficient");
    } else if (!(std::get<Regularized>(mu).shift > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "regularized mu profile needs a positive shift");
    }
}

ModelParams params_for_delta(double lambda, double nu, double delta) {
    return ModelParams::asymptotic(lambda, nu, {delta / std::sqrt(lambda)});
}

}  // namespace autores
