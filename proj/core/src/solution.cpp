#include "autores/solution.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "autores/error.hpp"
#include "autores/format.hpp"
#include "json.hpp"

namespace autores::series {

namespace {

struct Workspace {
    int m = 1;
    int q = 2;
    double sqrt_lambda = 1.0;
    double sigma = 0.0;
    double nu = 0.0;
    std::vector<double> mu;   // mu_0, mu_1, ...
    std::vector<double> rho;  // rho_0, rho_1, ... (z^k)
    std::vector<double> psi;  // psi_0 = sigma, psi_1, ...

    PuiseuxSeries rho_series() const {
        std::vector<double> c(static_cast<std::size_t>(m), 0.0);
        c[0] = sqrt_lambda;
        c.insert(c.end(), rho.begin(), rho.end());
        return {q, -m, std::move(c)};
    }
    PuiseuxSeries psi_series() const { return {q, 0, psi}; }

    // Both residuals known at least through exponent horizon - 1, treating the stored
    // coefficients (and the mu list) as exact polynomials.
    std::pair<PuiseuxSeries, PuiseuxSeries> residuals(int horizon) const {
        const int hb = horizon + 4 * q;
        const PuiseuxSeries r = rho_series().padded(hb);
        const PuiseuxSeries p = psi_series().padded(hb);
        std::vector<double> muc(static_cast<std::size_t>(hb - m), 0.0);
        for (std::size_t k = 0; k < mu.size(); ++k) {
            const std::size_t idx = k * static_cast<std::size_t>(q);
            if (idx < muc.size()) muc[idx] = mu[k];
        }
        const PuiseuxSeries mu_s(q, m, std::move(muc));

        PuiseuxSeries h = p;
        h.coeffs[0] = 0.0;  // psi - sigma
        const PuiseuxSeries two_h = 2.0 * h;
        const PuiseuxSeries mu_rho = mu_s * r;
        // (sqrt lambda)^2 rather than lambda so the growing parts cancel exactly.
        const PuiseuxSeries lam_tau = PuiseuxSeries::monomial(sqrt_lambda * sqrt_lambda, -q, q, hb);

        PuiseuxSeries e1 = r.derivative() + mu_rho * series_sin_around(2.0 * sigma + nu, two_h) -
                           series_sin_around(sigma, h);
        PuiseuxSeries e2 = r * p.derivative() - r * (r * r - lam_tau) +
                           mu_rho * series_cos_around(2.0 * sigma + nu, two_h) - series_cos_around(sigma, h);
        return {std::move(e1), std::move(e2)};
    }

    double e1_at(int exponent) const { return residuals(exponent + 1).first.at(exponent); }
    double e2_at(int exponent) const { return residuals(exponent + 1).second.at(exponent); }
};

// Root of the affine map x -> c(x). The probe step scales with c(0) so the
// slope is resolved even when the coefficients grow large.
double solve_affine(const std::function<double(double)>& c, const std::string& what) {
    const double c0 = c(0.0);
    const double step = std::max(1.0, std::fabs(c0));
    const double c1 = c(step);
    const double a = (c1 - c0) / step;
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * (std::fabs(c0) + std::fabs(c1));
    if (a == 0.0 || std::fabs(a) * step <= noise)
        throw Error(ErrorKind::UnsolvableOrder, "singular pivot while solving for " + what);
    const double x = -c0 / a;
    return x - c(x) / a;
}

CaseTag case_for(int multiplicity) {
    switch (multiplicity) {
        case 1: return CaseTag::I;
        case 2: return CaseTag::II;
        case 3: return CaseTag::III;
        default:
            throw Error(ErrorKind::InvalidArgument,
                        "root multiplicity " + std::to_string(multiplicity) + " has no series construction");
    }
}

}  // namespace

std::string_view to_string(CaseTag c) noexcept {
    switch (c) {
        case CaseTag::I: return "I";
        case CaseTag::II: return "II";
        case CaseTag::III: return "III";
    }
    return "?";
}

double AsymptoticSolution::rho_coeff(int k) const {
    if (k == -1) return rho_series.coeffs.front();
    return rho_series.at(k);
}

double AsymptoticSolution::psi_coeff(int k) const { return psi_series.at(k); }

double theta(double lambda, double p1) { return std::sqrt(lambda) / (2.0 * p1); }
double phi(double lambda, double p2) { return std::sqrt(-std::sqrt(lambda) / p2); }
double chi(double lambda, double p3) { return std::cbrt(3.0 * std::sqrt(lambda) / p3); }

AsymptoticSolution build_solution(const ModelParams& params, const phase_model::PhaseRoot& root, int branch,
                                  int n_orders) {
    params.validate();
    const auto* mu = std::get_if<AsymptoticSeries>(&params.mu);
    if (!mu) throw Error(ErrorKind::InvalidArgument, "series construction needs an asymptotic mu profile");
    if (n_orders < 2) throw Error(ErrorKind::InvalidArgument, "n_orders must be at least 2");
    if (branch != 1 && branch != -1) throw Error(ErrorKind::InvalidArgument, "branch must be +1 or -1");

    AsymptoticSolution sol;
    sol.case_tag = case_for(root.multiplicity);
    sol.branch = branch;
    sol.root = root;
    sol.n_orders = n_orders;

    Workspace w;
    w.m = root.multiplicity;
    w.q = 2 * w.m;
    w.sqrt_lambda = std::sqrt(params.lambda);
    w.sigma = root.sigma;
    w.nu = params.nu;
    w.mu = mu->mu_coeffs;
    w.psi = {root.sigma};

    // One order past the requested truncation is solved for the error estimate.
    const int n_solve = n_orders + 1;
    for (int k = 0; k <= n_solve + w.q; ++k) {
        w.rho.push_back(0.0);
        w.rho.back() = solve_affine(
            [&](double x) {
                w.rho.back() = x;
                return w.e2_at(k - w.q);
            },
            "rho_" + std::to_string(k));

        if (k < 1 || k > n_solve) continue;
        w.psi.push_back(0.0);
        const int e = k + w.m - 1;
        auto e1_with = [&](double x) {
            w.psi.back() = x;
            return w.e1_at(e);
        };
        if (k == 1) {
            const double c0 = e1_with(0.0);
            const double c1 = e1_with(1.0);
            // c(psi_1) = a psi_1^m + b
            const double a = c1 - c0;
            if (a == 0.0) throw Error(ErrorKind::UnsolvableOrder, "leading phase balance is degenerate");
            const double t = -c0 / a;
            if (w.m == 1) {
                w.psi.back() = t;
            } else if (w.m == 2) {
                if (t < 0.0)
                    throw Error(ErrorKind::NoRealBranch, "psi_1^2 = " + fmt17(t) + " < 0 at sigma = " +
                                                             fmt17(root.sigma) + "; no real double-root branch");
                w.psi.back() = branch * std::sqrt(t);
            } else {
                w.psi.back() = std::cbrt(t);
            }
        } else {
            const double x = solve_affine(e1_with, "psi_" + std::to_string(k));
            w.psi.back() = x;
        }
    }

    const double lam = params.lambda;
    switch (sol.case_tag) {
        case CaseTag::I: sol.constants.theta = theta(lam, root.derivative(1)); break;
        case CaseTag::II: sol.constants.phi = phi(lam, root.derivative(2)); break;
        case CaseTag::III: sol.constants.chi = chi(lam, root.derivative(3)); break;
    }

    const PuiseuxSeries full_rho = w.rho_series();
    const PuiseuxSeries full_psi = w.psi_series();
    sol.rho_series = full_rho.truncated(n_orders + w.q + 1);
    sol.psi_series = full_psi.truncated(n_orders + 1);
    sol.next_rho = full_rho.at(n_orders + w.q + 1);
    sol.next_psi = full_psi.at(n_orders + 1);
    return sol;
}

int residual_start_e1(const AsymptoticSolution& sol) { return sol.n_orders + sol.multiplicity(); }
int residual_start_e2(const AsymptoticSolution& sol) { return sol.n_orders + 1; }

std::pair<PuiseuxSeries, PuiseuxSeries> residual(const AsymptoticSolution& sol, const ModelParams& params,
                                                 int extra) {
    const auto* mu = std::get_if<AsymptoticSeries>(&params.mu);
    if (!mu) throw Error(ErrorKind::InvalidArgument, "residual needs an asymptotic mu profile");
    Workspace w;
    w.m = sol.multiplicity();
    w.q = sol.q();
    w.sqrt_lambda = sol.rho_series.coeffs.front();
    w.sigma = sol.root.sigma;
    w.nu = params.nu;
    w.mu = mu->mu_coeffs;
    w.rho.assign(sol.rho_series.coeffs.begin() + w.m, sol.rho_series.coeffs.end());
    w.psi = sol.psi_series.coeffs;
    if (extra < 0) extra = w.q;
    const int horizon = std::max(residual_start_e1(sol), residual_start_e2(sol)) + extra;
    auto [e1, e2] = w.residuals(horizon);
    return {e1.truncated(horizon), e2.truncated(horizon)};
}

SolutionValue eval_solution(const AsymptoticSolution& sol, double tau) {
    return {sol.rho_series.eval(tau), sol.psi_series.eval(tau), tau < 1.0};
}

std::pair<double, double> eval_solution_derivative(const AsymptoticSolution& sol, double tau) {
    return {sol.rho_series.derivative().eval(tau), sol.psi_series.derivative().eval(tau)};
}

TruncationEstimate truncation_estimate(const AsymptoticSolution& sol, double tau) {
    const double z = std::pow(tau, -1.0 / sol.q());
    return {std::fabs(sol.next_rho) * std::pow(z, sol.n_orders + sol.q() + 1),
            std::fabs(sol.next_psi) * std::pow(z, sol.n_orders + 1)};
}

std::string to_json(const AsymptoticSolution& sol) {
    nlohmann::ordered_json j;
    j["case"] = std::string(to_string(sol.case_tag));
    j["branch"] = sol.branch;
    j["sigma"] = sol.root.sigma;
    j["multiplicity"] = sol.root.multiplicity;
    j["q"] = sol.q();
    j["rho_offset"] = sol.rho_series.offset;
    j["rho_coeffs"] = sol.rho_series.coeffs;
    j["psi_coeffs"] = sol.psi_series.coeffs;
    nlohmann::ordered_json c = nlohmann::ordered_json::object();
    auto put = [&](const char* name, const std::optional<double>& v) {
        c[name] = v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    };
    put("theta", sol.constants.theta);
    put("phi", sol.constants.phi);
    put("chi", sol.constants.chi);
    j["constants"] = c;
    return j.dump(2);
}

}  // namespace autores::series
